#pragma once

// Compositions (symbol-count vectors) and exact counting over them. Counts
// are indexed 0-based by symbol; sequences carry 1-based symbols.

#include <cstdint>
#include <span>
#include <vector>

#include "typesize/bigint.hpp"
#include "typesize/expofam.hpp"

namespace typesize {

using Counts = std::vector<std::uint32_t>;

/// Throws DomainError when a symbol falls outside 1..alphabet_size.
Counts counts_of(std::span<const Symbol> seq, std::size_t alphabet_size);

/// n! / prod(counts!).
BigInt multinomial(std::span<const std::uint32_t> counts);

/// log2 of the multinomial via lgamma.
double log2_multinomial(std::span<const std::uint32_t> counts);

/// C(n + k - 1, k - 1) compositions of n into k parts.
BigInt composition_count(std::size_t alphabet_size, std::uint32_t n);

/// Colexicographic order: compare from the last symbol's count backwards.
bool colex_less(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Visits every composition of n into `alphabet_size` parts in colex order.
template <typename Visitor>
void for_each_composition(std::size_t alphabet_size, std::uint32_t n, Visitor&& visit) {
  Counts counts(alphabet_size, 0);
  // counts[k-1..1] are free; counts[0] takes the remainder.
  auto recurse = [&](auto& self, std::size_t position, std::uint32_t remaining) -> void {
    if (position == 0) {
      counts[0] = remaining;
      visit(std::span<const std::uint32_t>(counts));
      return;
    }
    for (std::uint32_t c = 0; c <= remaining; ++c) {
      counts[position] = c;
      self(self, position - 1, remaining - c);
    }
    counts[position] = 0;
  };
  recurse(recurse, alphabet_size - 1, n);
}

/// Lexicographic index of `seq` among all arrangements of its composition.
BigInt rank_within_composition(std::span<const Symbol> seq, std::size_t alphabet_size);

/// Inverse of rank_within_composition. Requires 0 <= index < multinomial(counts).
Sequence unrank_within_composition(std::span<const std::uint32_t> counts, const BigInt& index);

}  // namespace typesize
