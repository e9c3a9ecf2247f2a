#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "typesize/container.hpp"
#include "typesize/errors.hpp"
#include "typesize/family_io.hpp"

using namespace typesize;
using fixtures::vec;

namespace {

Container sample() {
  Container c;
  for (std::size_t i = 0; i < c.spec_hash.size(); ++i) c.spec_hash[i] = static_cast<std::uint8_t>(i);
  c.mode = PartitionMode::quantized;
  c.s = 1.0;
  c.anchor = vec({0.0});
  c.n = 4;
  c.word = Codeword::from_string("101");
  return c;
}

}  // namespace

TEST(Container, ByteLayout) {
  const std::string bytes = write_container(sample());
  ASSERT_EQ(bytes.size(), 4u + 32 + 1 + 8 + 8 + 4 + 8 + 1);
  EXPECT_EQ(bytes.substr(0, 4), "TSZ1");
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[36]), 1);
  // 1.0 = 0x3FF0000000000000
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[37]), 0x3F);
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[38]), 0xF0);
  EXPECT_EQ(bytes.substr(53, 4), std::string("\0\0\0\4", 4));
  EXPECT_EQ(bytes.substr(57, 8), std::string("\0\0\0\0\0\0\0\3", 8));
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[65]), 0xA0);

  const Container back = read_container(bytes, 1);
  EXPECT_EQ(back.spec_hash, sample().spec_hash);
  EXPECT_EQ(back.word, sample().word);
  EXPECT_EQ(back.n, 4u);
  EXPECT_EQ(back.s, 1.0);
  EXPECT_FALSE(back.x0.has_value());
}

TEST(Container, MarkovCarriesX0AndEmptyWord) {
  Container c = sample();
  c.mode = PartitionMode::markov;
  c.x0 = 2;
  c.word = Codeword{};
  const std::string bytes = write_container(c);
  EXPECT_EQ(bytes.size(), 4u + 32 + 1 + 8 + 8 + 4 + 4 + 8);
  const Container back = read_container(bytes, 1);
  EXPECT_EQ(back.x0, 2u);
  EXPECT_EQ(back.word.length(), 0u);
}

TEST(Container, CorruptionIsDetected) {
  const std::string good = write_container(sample());
  std::string magic = good;
  magic[0] = 'X';
  EXPECT_THROW(read_container(magic, 1), CorruptInputError);
  std::string mode = good;
  mode[36] = 9;
  EXPECT_THROW(read_container(mode, 1), CorruptInputError);
  EXPECT_THROW(read_container(good.substr(0, good.size() - 1), 1), CorruptInputError);
  EXPECT_THROW(read_container(good + "x", 1), CorruptInputError);
  std::string padding = good;
  padding.back() = static_cast<char>(0xA1);
  EXPECT_THROW(read_container(padding, 1), CorruptInputError);
  EXPECT_THROW(read_container("", 1), CorruptInputError);

  SpecHash other{};
  EXPECT_THROW(require_spec_hash(sample(), other), CorruptInputError);
  EXPECT_NO_THROW(require_spec_hash(sample(), sample().spec_hash));
}

TEST(FamilyIo, Rationals) {
  EXPECT_EQ(parse_rational("3/4"), Rational(3, 4));
  EXPECT_EQ(parse_rational("-1.25"), Rational(-5, 4));
  EXPECT_EQ(parse_rational("3e-2"), Rational(3, 100));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_EQ(parse_rational("2/4"), Rational(1, 2));
  EXPECT_THROW(parse_rational("1/0"), SchemaError);
  EXPECT_THROW(parse_rational("abc"), SchemaError);
  EXPECT_THROW(parse_rational(""), SchemaError);
}

TEST(FamilyIo, Sha256) {
  EXPECT_EQ(to_hex(sha256("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(FamilyIo, ParsesIidDocument) {
  const auto doc = parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 8, "tau": [[0], [1]]})");
  EXPECT_EQ(doc.kind, FamilyKind::iid);
  ASSERT_TRUE(doc.family.has_value());
  EXPECT_EQ(*doc.family, fixtures::bernoulli());
  ASSERT_TRUE(doc.exact.has_value());
  EXPECT_EQ(doc.dim(), 1u);
  // Same content, different whitespace: same hash.
  const auto again = parse_family_document("{\"tau\":[[0],[1]],\"rho_max\":8,\"d\":1,\"alphabet_size\":2}");
  EXPECT_EQ(doc.hash, again.hash);
  const auto other = parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 4, "tau": [[0], [1]]})");
  EXPECT_NE(doc.hash, other.hash);
}

TEST(FamilyIo, InexactTableHasNoExactMap) {
  const auto doc = parse_family_document(R"({"alphabet_size": 3, "d": 1, "rho_max": 8, "tau": [[0], [1], [1.4142135623730951]]})");
  EXPECT_FALSE(doc.exact.has_value());
  const auto with_basis = parse_family_document(R"({
    "alphabet_size": 3, "d": 1, "rho_max": 8,
    "tau": [[0], [1], [1.4142135623730951]],
    "exact": {"basis": [[{"name": "1", "hint": 1}, {"name": "sqrt2", "hint": 1.4142135623730951}]],
              "coeffs": [[["0", "0"]], [["1", "0"]], [["0", "1"]]]}})");
  ASSERT_TRUE(with_basis.exact.has_value());
  EXPECT_EQ(derive_lattice(*with_basis.family, *with_basis.exact).d_prime, 2u);
}

TEST(FamilyIo, ParsesMarkovDocument) {
  const auto doc = parse_family_document(
      R"({"alphabet_size": 2, "d": 1, "rho_max": 4, "tau2": [[0], [1], [1], [0]], "x0": 1})");
  EXPECT_EQ(doc.kind, FamilyKind::markov);
  ASSERT_TRUE(doc.markov.has_value());
  EXPECT_EQ(*doc.markov, fixtures::flip_family());
}

TEST(FamilyIo, SchemaAndSpecErrors) {
  EXPECT_THROW(parse_family_document("not json"), SchemaError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 8})"), SchemaError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 8, "tau": [[0, 1], [1]]})"), SchemaError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 3, "d": 1, "rho_max": 8, "tau": [[0], [1]]})"), SchemaError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 8, "tau": [[0], [1]], "extra": 1})"), SchemaError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 8, "tau": [[0], ["1/x"]]})"), SchemaError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 8, "tau": [[1], [1]]})"), SpecError);
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": -1, "tau": [[0], [1]]})"), SpecError);
  // Unequal row normalizers.
  EXPECT_THROW(parse_family_document(R"({"alphabet_size": 2, "d": 1, "rho_max": 4, "tau2": [[0], [1], [0], [0]], "x0": 1})"), SpecError);
  EXPECT_THROW(load_family_document("/nonexistent/family.json"), IoError);
}
