#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace typesize {

using BigInt = mpz_class;

/// log2(v) for v > 0; -infinity for v == 0. Exact for powers of two.
double log2(const BigInt& v);

std::string to_decimal(const BigInt& v);

BigInt power(std::uint64_t base, std::uint64_t exponent);

/// Number of bits needed to write v (0 for v == 0).
std::uint64_t bit_length(const BigInt& v);

}  // namespace typesize
