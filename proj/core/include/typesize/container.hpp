#pragma once

// Container layout, all integers big-endian:
//
//   "TSZ1" | spec hash (32 bytes) | mode (u8) | s (f64) | anchor (d x f64)
//   | [x0 (u32), markov only] | n (u32) | bit length (u64) | bits, MSB first,
//   zero-padded to a byte
//
// Point mode writes s = 0 and a zero anchor.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "typesize/codec.hpp"
#include "typesize/type_index.hpp"

namespace typesize {

using SpecHash = std::array<std::uint8_t, 32>;

struct Container {
  SpecHash spec_hash{};
  PartitionMode mode = PartitionMode::quantized;
  double s = 0.0;
  Eigen::VectorXd anchor;
  std::optional<std::uint32_t> x0;  // markov only
  std::uint32_t n = 0;
  Codeword word;
};

std::string write_container(const Container& c);

/// `dim` is the anchor length, known from the family. Throws
/// CorruptInputError on a bad magic, unknown mode, truncation, trailing
/// bytes or nonzero padding.
Container read_container(const std::string& bytes, std::size_t dim);

/// Throws CorruptInputError when the container was written for another family.
void require_spec_hash(const Container& c, const SpecHash& expected);

}  // namespace typesize
