#include <gtest/gtest.h>

#include <memory>
#include <set>

#include "fixtures.hpp"
#include "typesize/codec.hpp"
#include "typesize/errors.hpp"
#include "typesize/point_types.hpp"
#include "typesize/quantized_types.hpp"
#include "typesize/random.hpp"

using namespace typesize;

namespace {

std::shared_ptr<const TypeIndex> quantized(const FamilySpec& spec, std::uint32_t n, double s) {
  return std::make_shared<const TypeIndex>(build_type_index(spec, make_grid(spec.dim(), n, s)));
}

void expect_bijection(const TypeSizeCodec& codec, std::size_t k) {
  std::vector<bool> hit(power(k, codec.n()).get_ui(), false);
  for (const auto& seq : fixtures::all_sequences(k, codec.n())) {
    const BigInt r = codec.rank(seq);
    ASSERT_LT(r, BigInt(hit.size()));
    EXPECT_FALSE(hit[r.get_ui()]);
    hit[r.get_ui()] = true;
    const Codeword w = codec.encode(seq);
    EXPECT_EQ(w.length(), bit_length(BigInt(r + 1)) - 1);
    EXPECT_EQ(codec.decode(w), seq);
    EXPECT_EQ(codec.unrank(r), seq);
  }
}

}  // namespace

TEST(Codeword, Enumeration) {
  EXPECT_EQ(string_of_index(BigInt(0)).to_string(), "");
  EXPECT_EQ(string_of_index(BigInt(1)).to_string(), "0");
  EXPECT_EQ(string_of_index(BigInt(2)).to_string(), "1");
  EXPECT_EQ(string_of_index(BigInt(3)).to_string(), "00");
  EXPECT_EQ(string_of_index(BigInt(6)).to_string(), "11");
  EXPECT_EQ(string_of_index(BigInt(7)).to_string(), "000");
  EXPECT_EQ(index_of_string(Codeword::from_string("101")), 7 + 5);
  for (unsigned long k = 0; k < 1'000'000; k += 7) {
    const Codeword w = string_of_index(BigInt(k));
    ASSERT_EQ(index_of_string(w), k);
    ASSERT_EQ(w.length(), static_cast<std::size_t>(std::floor(std::log2(double(k + 1)))));
  }
  EXPECT_THROW(Codeword::from_string("01x"), CorruptInputError);
}

TEST(Codec, BernoulliSingletonsComeFirst) {
  const auto spec = fixtures::bernoulli();
  const TypeSizeCodec codec(quantized(spec, 4, 0.5));
  const std::set<BigInt> first{codec.rank(Sequence{1, 1, 1, 1}), codec.rank(Sequence{2, 2, 2, 2})};
  EXPECT_EQ(first, (std::set<BigInt>{BigInt(0), BigInt(1)}));
  EXPECT_EQ(codec.encode(codec.unrank(BigInt(0))).to_string(), "");
  // Last rank: the largest class, size 6.
  const Sequence last = codec.unrank(BigInt(15));
  EXPECT_EQ(counts_of(last, 2), (Counts{2, 2}));
}

TEST(Codec, NOneIsAPermutation) {
  const auto spec = fixtures::ternary();
  const TypeSizeCodec codec(quantized(spec, 1, 1.0));
  std::set<BigInt> ranks;
  for (Symbol x = 1; x <= 3; ++x) ranks.insert(codec.rank(Sequence{x}));
  EXPECT_EQ(ranks, (std::set<BigInt>{BigInt(0), BigInt(1), BigInt(2)}));
}

TEST(Codec, ExhaustiveBijectionQuantized) {
  for (std::uint32_t n = 1; n <= 10; ++n) expect_bijection(TypeSizeCodec(quantized(fixtures::bernoulli(), n, 1.0)), 2);
  for (std::uint32_t n = 1; n <= 6; ++n) expect_bijection(TypeSizeCodec(quantized(fixtures::ternary(), n, 1.0)), 3);
}

TEST(Codec, ExhaustiveBijectionPoint) {
  const auto spec = fixtures::sqrt2_family();
  const LatticeMap lmap = derive_lattice(spec, fixtures::sqrt2_map());
  for (std::uint32_t n = 1; n <= 7; ++n) {
    expect_bijection(TypeSizeCodec(std::make_shared<const TypeIndex>(point_type_index(spec, lmap, n))), 3);
  }
}

TEST(Codec, LengthsAreMonotoneInClassSize) {
  const auto spec = fixtures::ternary();
  for (std::uint32_t n : {4u, 8u}) {
    const TypeSizeCodec codec(quantized(spec, n, 1.0));
    const auto& index = codec.index();
    // Longest word per size and shortest word per size.
    std::map<BigInt, std::pair<std::size_t, std::size_t>> span;
    for (const auto& seq : fixtures::all_sequences(3, n)) {
      const BigInt size = index.type_class(index.class_of_counts(counts_of(seq, 3))).size;
      const std::size_t len = codec.encode(seq).length();
      auto [it, fresh] = span.emplace(size, std::make_pair(len, len));
      it->second.first = std::min(it->second.first, len);
      it->second.second = std::max(it->second.second, len);
    }
    std::size_t previous_max = 0;
    for (const auto& [size, lens] : span) {
      EXPECT_GE(lens.first, previous_max) << "size " << size.get_str();
      previous_max = lens.second;
    }
  }
}

TEST(Codec, OrderingIsDeterministic) {
  const auto index = quantized(fixtures::ternary(), 8, 0.7);
  const ClassOrdering a(*index);
  const ClassOrdering b(*index);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.offsets().front(), 0);
  EXPECT_EQ(a.total(), power(3, 8));
  for (std::size_t pos = 1; pos < a.size(); ++pos) {
    EXPECT_LE(index->type_class(a.class_at(pos - 1)).size, index->type_class(a.class_at(pos)).size);
    EXPECT_EQ(a.offsets()[pos + 1] - a.offsets()[pos], index->type_class(a.class_at(pos)).size);
    EXPECT_EQ(a.position_of(a.class_at(pos)), pos);
  }
}

TEST(Codec, RandomRoundTrips) {
  const TypeSizeCodec codec(quantized(fixtures::ternary(), 8, 1.0));
  SplitMix64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const BigInt k(static_cast<unsigned long>(rng.next() % 6561));
    EXPECT_EQ(codec.rank(codec.unrank(k)), k);
  }
  // Larger n exercises multi-limb ranks.
  const TypeSizeCodec big(quantized(fixtures::ternary(), 200, 1.0));
  for (int i = 0; i < 50; ++i) {
    Sequence seq(200);
    for (auto& x : seq) x = static_cast<Symbol>(rng.next() % 3 + 1);
    EXPECT_EQ(big.decode(big.encode(seq)), seq);
  }
}

TEST(Codec, Errors) {
  const TypeSizeCodec codec(quantized(fixtures::bernoulli(), 4, 1.0));
  EXPECT_THROW(codec.rank(Sequence{1, 2}), DomainError);
  EXPECT_THROW(codec.rank(Sequence{1, 2, 3, 1}), DomainError);
  EXPECT_THROW(codec.unrank(BigInt(16)), DomainError);
  EXPECT_THROW(codec.unrank(BigInt(-1)), DomainError);
  // "0001" has index 2^4 - 1 + 1 = 16.
  EXPECT_THROW(codec.decode(Codeword::from_string("0001")), CorruptInputError);
  EXPECT_NO_THROW(codec.decode(Codeword::from_string("0000")));
  EXPECT_THROW(codec.decode(Codeword::from_string("00000")), CorruptInputError);
}
