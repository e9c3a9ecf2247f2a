#pragma once

// Type Size code: sequences ranked by ascending type-class size and mapped
// to the enumeration {empty, 0, 1, 00, 01, 10, 11, 000, ...} of binary strings.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "typesize/bigint.hpp"
#include "typesize/expofam.hpp"
#include "typesize/type_index.hpp"

namespace typesize {

struct Codeword {
  std::vector<bool> bits;

  std::size_t length() const { return bits.size(); }
  /// '0'/'1' text, MSB first; "" for the empty string.
  std::string to_string() const;
  static Codeword from_string(const std::string& text);

  friend bool operator==(const Codeword&, const Codeword&) = default;
};

/// The k-th string: length m = floor(log2(k+1)), value k + 1 - 2^m.
Codeword string_of_index(const BigInt& k);
BigInt index_of_string(const Codeword& word);

/// Classes of an index sorted by exact size, ties by class key, with
/// cumulative offsets.
class ClassOrdering {
 public:
  explicit ClassOrdering(const TypeIndex& index);

  std::size_t size() const { return order_.size(); }
  /// TypeIndex class at sorted position `pos`.
  std::size_t class_at(std::size_t pos) const { return order_[pos]; }
  std::size_t position_of(std::size_t cls) const { return position_[cls]; }
  /// offsets()[pos] is the first rank of the class at `pos`; the last entry is |X|^n.
  const std::vector<BigInt>& offsets() const { return offsets_; }
  const BigInt& total() const { return offsets_.back(); }
  /// Sorted position of the class holding rank k (0 <= k < total).
  std::size_t position_of_rank(const BigInt& k) const;

  friend bool operator==(const ClassOrdering&, const ClassOrdering&) = default;

 private:
  std::vector<std::size_t> order_;
  std::vector<std::size_t> position_;
  std::vector<BigInt> offsets_;
};

/// Rank inside a class: earlier members (colex) first, then the
/// lexicographic index inside the composition.
BigInt rank_within_class(const TypeIndex& index, std::size_t cls, std::span<const Symbol> seq);
Sequence unrank_within_class(const TypeIndex& index, std::size_t cls, const BigInt& k);

class TypeSizeCodec {
 public:
  explicit TypeSizeCodec(std::shared_ptr<const TypeIndex> index);

  const TypeIndex& index() const { return *index_; }
  const ClassOrdering& ordering() const { return ordering_; }
  std::uint32_t n() const { return index_->n(); }

  /// Throws DomainError on a bad symbol or a length other than n.
  BigInt rank(std::span<const Symbol> seq) const;
  /// Throws DomainError unless 0 <= k < |X|^n.
  Sequence unrank(const BigInt& k) const;

  Codeword encode(std::span<const Symbol> seq) const;
  /// Throws CorruptInputError when the word's index is >= |X|^n.
  Sequence decode(const Codeword& word) const;

 private:
  std::shared_ptr<const TypeIndex> index_;
  ClassOrdering ordering_;
};

}  // namespace typesize
