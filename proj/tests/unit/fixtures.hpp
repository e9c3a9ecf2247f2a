#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "typesize/expofam.hpp"
#include "typesize/markov.hpp"
#include "typesize/point_types.hpp"

namespace fixtures {

using namespace typesize;

inline FamilySpec bernoulli(double rho = 8.0) {
  Eigen::MatrixXd tau(2, 1);
  tau << 0, 1;
  return FamilySpec(tau, rho);
}

inline FamilySpec ternary(double rho = 8.0) {
  Eigen::MatrixXd tau(3, 2);
  tau << 0, 0, 1, 0, 0, 1;
  return FamilySpec(tau, rho);
}

// d = 1, d' = 2.
inline FamilySpec sqrt2_family(double rho = 8.0) {
  Eigen::MatrixXd tau(3, 1);
  tau << 0, 1, std::sqrt(2.0);
  return FamilySpec(tau, rho);
}

inline ExactStatMap sqrt2_map() {
  ExactStatMap map;
  map.basis = {{BasisElement{"1", 1.0}, BasisElement{"sqrt2", std::sqrt(2.0)}}};
  map.coeffs = {{{Rational(0), Rational(0)}}, {{Rational(1), Rational(0)}}, {{Rational(0), Rational(1)}}};
  return map;
}

inline ExactStatMap bernoulli_map() { return rational_stat_map({{Rational(0)}, {Rational(1)}}); }

inline ExactStatMap ternary_map() {
  return rational_stat_map({{Rational(0), Rational(0)}, {Rational(1), Rational(0)}, {Rational(0), Rational(1)}});
}

// tau(a, b) = 1{a != b}.
inline MarkovFamilySpec flip_family(double rho = 4.0, Symbol x0 = 1) {
  Eigen::MatrixXd tau2(4, 1);
  tau2 << 0, 1, 1, 0;
  return MarkovFamilySpec(2, tau2, rho, x0);
}

// Three symbols, statistic of the cyclic increment b - a mod 3.
inline MarkovFamilySpec cyclic3_family(double rho = 4.0, Symbol x0 = 1) {
  Eigen::MatrixXd tau2(9, 2);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int step = ((b - a) % 3 + 3) % 3;
      tau2(a * 3 + b, 0) = step == 1 ? 1.0 : 0.0;
      tau2(a * 3 + b, 1) = step == 2 ? 1.0 : 0.0;
    }
  }
  return MarkovFamilySpec(3, tau2, rho, x0);
}

// Every sequence of length n over {1..k}, lexicographic.
inline std::vector<Sequence> all_sequences(std::size_t k, std::uint32_t n) {
  std::vector<Sequence> out;
  Sequence seq(n, 1);
  while (true) {
    out.push_back(seq);
    std::uint32_t pos = n;
    while (pos > 0 && seq[pos - 1] == k) --pos;
    if (pos == 0) break;
    ++seq[pos - 1];
    for (std::uint32_t i = pos; i < n; ++i) seq[i] = 1;
  }
  return out;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace fixtures
