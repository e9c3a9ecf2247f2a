#include "typesize/codec.hpp"

#include <algorithm>
#include <numeric>

#include "typesize/composition.hpp"
#include "typesize/errors.hpp"

namespace typesize {

std::string Codeword::to_string() const {
  std::string out;
  out.reserve(bits.size());
  for (bool b : bits) out.push_back(b ? '1' : '0');
  return out;
}

Codeword Codeword::from_string(const std::string& text) {
  Codeword word;
  word.bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw CorruptInputError("codeword text may only contain '0' and '1'");
    word.bits.push_back(c == '1');
  }
  return word;
}

Codeword string_of_index(const BigInt& k) {
  if (k < 0) throw DomainError("codeword index must be nonnegative");
  const BigInt next = k + 1;
  const std::uint64_t m = bit_length(next) - 1;
  Codeword word;
  word.bits.resize(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    word.bits[m - 1 - i] = mpz_tstbit(next.get_mpz_t(), i) != 0;
  }
  return word;
}

BigInt index_of_string(const Codeword& word) {
  BigInt value = 1;  // leading 1 contributes 2^m
  for (bool b : word.bits) {
    value <<= 1;
    if (b) value += 1;
  }
  return value - 1;
}

ClassOrdering::ClassOrdering(const TypeIndex& index) {
  const std::size_t count = index.class_count();
  order_.resize(count);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  // Classes are key-sorted already, so a stable sort breaks size ties by key.
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return index.type_class(a).size < index.type_class(b).size;
  });
  position_.resize(count);
  offsets_.resize(count + 1);
  offsets_[0] = 0;
  for (std::size_t pos = 0; pos < count; ++pos) {
    position_[order_[pos]] = pos;
    offsets_[pos + 1] = offsets_[pos] + index.type_class(order_[pos]).size;
  }
}

std::size_t ClassOrdering::position_of_rank(const BigInt& k) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), k);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

BigInt rank_within_class(const TypeIndex& index, std::size_t cls, std::span<const Symbol> seq) {
  const Counts counts = counts_of(seq, index.alphabet_size());
  const std::size_t position = index.member_position(cls, counts);
  BigInt rank = 0;
  for (std::size_t j = 0; j < position; ++j) rank += multinomial(index.member(cls, j));
  return rank + rank_within_composition(seq, index.alphabet_size());
}

Sequence unrank_within_class(const TypeIndex& index, std::size_t cls, const BigInt& k) {
  BigInt rest = k;
  for (std::size_t j = 0; j < index.type_class(cls).count; ++j) {
    const auto member = index.member(cls, j);
    const BigInt size = multinomial(member);
    if (rest < size) return unrank_within_composition(member, rest);
    rest -= size;
  }
  throw DomainError("rank outside the class");
}

TypeSizeCodec::TypeSizeCodec(std::shared_ptr<const TypeIndex> index)
    : index_(std::move(index)), ordering_(*index_) {}

BigInt TypeSizeCodec::rank(std::span<const Symbol> seq) const {
  if (seq.size() != index_->n()) {
    throw DomainError("sequence length " + std::to_string(seq.size()) + " does not match n = " +
                      std::to_string(index_->n()));
  }
  const Counts counts = counts_of(seq, index_->alphabet_size());
  const std::size_t cls = index_->class_of_counts(counts);
  return ordering_.offsets()[ordering_.position_of(cls)] + rank_within_class(*index_, cls, seq);
}

Sequence TypeSizeCodec::unrank(const BigInt& k) const {
  if (k < 0 || k >= ordering_.total()) throw DomainError("rank outside [0, |X|^n)");
  const std::size_t pos = ordering_.position_of_rank(k);
  return unrank_within_class(*index_, ordering_.class_at(pos), k - ordering_.offsets()[pos]);
}

Codeword TypeSizeCodec::encode(std::span<const Symbol> seq) const {
  return string_of_index(rank(seq));
}

Sequence TypeSizeCodec::decode(const Codeword& word) const {
  const BigInt k = index_of_string(word);
  if (k >= ordering_.total()) {
    throw CorruptInputError("codeword index " + to_decimal(k) + " is not below |X|^n = " +
                            to_decimal(ordering_.total()));
  }
  return unrank(k);
}

}  // namespace typesize
