#include "typesize/bigint.hpp"

#include <cmath>
#include <limits>

namespace typesize {

double log2(const BigInt& v) {
  if (sgn(v) <= 0) return -std::numeric_limits<double>::infinity();
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, v.get_mpz_t());
  return static_cast<double>(exponent) + std::log2(mantissa);
}

std::string to_decimal(const BigInt& v) { return v.get_str(10); }

BigInt power(std::uint64_t base, std::uint64_t exponent) {
  BigInt out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exponent);
  return out;
}

std::uint64_t bit_length(const BigInt& v) {
  if (sgn(v) == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

}  // namespace typesize
