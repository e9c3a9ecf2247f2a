#include "typesize/composition.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "typesize/errors.hpp"

namespace typesize {

Counts counts_of(std::span<const Symbol> seq, std::size_t alphabet_size) {
  Counts counts(alphabet_size, 0);
  for (Symbol x : seq) {
    if (x < 1 || x > alphabet_size) throw DomainError("symbol out of range: " + std::to_string(x));
    ++counts[x - 1];
  }
  return counts;
}

BigInt multinomial(std::span<const std::uint32_t> counts) {
  BigInt out = 1;
  BigInt factor;
  unsigned long total = 0;
  for (std::uint32_t c : counts) {
    total += c;
    if (c == 0) continue;
    mpz_bin_uiui(factor.get_mpz_t(), total, c);
    out *= factor;
  }
  return out;
}

double log2_multinomial(std::span<const std::uint32_t> counts) {
  double n = 0.0;
  double denom = 0.0;
  for (std::uint32_t c : counts) {
    n += c;
    denom += std::lgamma(static_cast<double>(c) + 1.0);
  }
  return (std::lgamma(n + 1.0) - denom) / std::numbers::ln2;
}

BigInt composition_count(std::size_t alphabet_size, std::uint32_t n) {
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), n + alphabet_size - 1, alphabet_size - 1);
  return out;
}

bool colex_less(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Arrangements starting with symbol s = M * c_s / m, with M the multinomial
// of the remaining counts and m their total.
BigInt rank_within_composition(std::span<const Symbol> seq, std::size_t alphabet_size) {
  Counts counts = counts_of(seq, alphabet_size);
  BigInt arrangements = multinomial(counts);
  BigInt rank = 0;
  unsigned long remaining = seq.size();
  for (Symbol x : seq) {
    const std::size_t sym = x - 1;
    for (std::size_t s = 0; s < sym; ++s) {
      if (counts[s] == 0) continue;
      rank += arrangements * counts[s] / remaining;
    }
    arrangements = arrangements * counts[sym] / remaining;
    --counts[sym];
    --remaining;
  }
  return rank;
}

Sequence unrank_within_composition(std::span<const std::uint32_t> counts_in, const BigInt& index) {
  Counts counts(counts_in.begin(), counts_in.end());
  BigInt arrangements = multinomial(counts);
  if (index < 0 || index >= arrangements) {
    throw DomainError("index outside the arrangements of the composition");
  }
  unsigned long remaining = std::accumulate(counts.begin(), counts.end(), 0UL);
  Sequence out;
  out.reserve(remaining);
  BigInt rest = index;
  BigInt block;
  while (remaining > 0) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s] == 0) continue;
      block = arrangements * counts[s] / remaining;
      if (rest < block) {
        out.push_back(static_cast<Symbol>(s + 1));
        arrangements = block;
        --counts[s];
        break;
      }
      rest -= block;
    }
    --remaining;
  }
  return out;
}

}  // namespace typesize
