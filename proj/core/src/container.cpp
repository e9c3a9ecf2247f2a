#include "typesize/container.hpp"

#include <bit>
#include <cstring>

#include "typesize/errors.hpp"

namespace typesize {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'Z', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | u8();
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void need(std::size_t count) const {
    if (remaining() < count) throw CorruptInputError("container is truncated");
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string write_container(const Container& c) {
  std::string out(kMagic, sizeof kMagic);
  out.append(reinterpret_cast<const char*>(c.spec_hash.data()), c.spec_hash.size());
  out.push_back(static_cast<char>(c.mode));
  put_f64(out, c.s);
  for (Eigen::Index i = 0; i < c.anchor.size(); ++i) put_f64(out, c.anchor[i]);
  if (c.mode == PartitionMode::markov) {
    if (!c.x0) throw DomainError("markov container needs x0");
    put_u32(out, *c.x0);
  }
  put_u32(out, c.n);
  put_u64(out, c.word.length());
  std::uint8_t byte = 0;
  int filled = 0;
  for (bool b : c.word.bits) {
    byte = static_cast<std::uint8_t>((byte << 1) | (b ? 1 : 0));
    if (++filled == 8) {
      out.push_back(static_cast<char>(byte));
      byte = 0;
      filled = 0;
    }
  }
  if (filled > 0) out.push_back(static_cast<char>(byte << (8 - filled)));
  return out;
}

Container read_container(const std::string& bytes, std::size_t dim) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CorruptInputError("not a TSZ1 container (bad magic)");
  }
  Reader in(bytes);
  for (std::size_t i = 0; i < sizeof kMagic; ++i) in.u8();
  Container c;
  for (auto& b : c.spec_hash) b = in.u8();
  const std::uint8_t mode = in.u8();
  if (mode < 1 || mode > 3) throw CorruptInputError("unknown container mode " + std::to_string(mode));
  c.mode = static_cast<PartitionMode>(mode);
  c.s = in.f64();
  c.anchor.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) c.anchor[static_cast<Eigen::Index>(i)] = in.f64();
  if (c.mode == PartitionMode::markov) c.x0 = in.u32();
  c.n = in.u32();
  const std::uint64_t length = in.u64();
  const std::uint64_t byte_count = length / 8 + (length % 8 != 0 ? 1 : 0);
  if (in.remaining() != byte_count) {
    throw CorruptInputError("container payload holds " + std::to_string(in.remaining()) +
                            " bytes, header announces " + std::to_string(byte_count));
  }
  c.word.bits.resize(length);
  std::uint8_t byte = 0;
  for (std::uint64_t i = 0; i < length; ++i) {
    if (i % 8 == 0) byte = in.u8();
    c.word.bits[i] = ((byte >> (7 - i % 8)) & 1) != 0;
  }
  if (length % 8 != 0 && (byte & ((1u << (8 - length % 8)) - 1)) != 0) {
    throw CorruptInputError("container padding bits are not zero");
  }
  return c;
}

void require_spec_hash(const Container& c, const SpecHash& expected) {
  if (c.spec_hash != expected) {
    throw CorruptInputError("container was written for a different family spec (hash mismatch)");
  }
}

}  // namespace typesize
