#pragma once

// Point type classes: sequences with exactly equal sufficient statistic.
// Equality is decided on integers through an exact decomposition of tau over
// declared incommensurable constants.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "typesize/bigint.hpp"
#include "typesize/expofam.hpp"
#include "typesize/type_index.hpp"

namespace typesize {

using Rational = mpq_class;

struct BasisElement {
  std::string name;
  double hint = 1.0;  // numeric value; used for reconstruction and sanity checks only
};

/// tau(x)[j] = sum_t coeffs[x][j][t] * basis[j][t], rational coefficients.
/// basis[j][0] is the constant 1 for every coordinate.
struct ExactStatMap {
  std::vector<std::vector<BasisElement>> basis;
  std::vector<std::vector<std::vector<Rational>>> coeffs;

  std::size_t alphabet_size() const { return coeffs.size(); }
  std::size_t dim() const { return basis.size(); }
};

/// Every coordinate over the basis {1}.
ExactStatMap rational_stat_map(const std::vector<std::vector<Rational>>& tau);

struct LatticeMap {
  std::size_t d_prime = 0;
  std::vector<std::vector<std::int64_t>> L;   // one row per symbol, L[0] = 0
  std::vector<std::size_t> row_selection;     // selected (coordinate, basis) rows
  Eigen::MatrixXd reconstruction;             // d x d', tau(x) - tau(1) = R * L(x)
  std::vector<std::string> diagnostics;
};

/// Clears denominators per (coordinate, basis) row, selects a maximal
/// independent row set by exact elimination over Q and returns the reduced
/// integer map. Throws SpecError when the declared basis hints reveal a
/// rational relation between distinct basis constants, or when the hints do
/// not reproduce the family's statistics. A rank below d is reported in
/// `diagnostics`.
LatticeMap derive_lattice(const FamilySpec& spec, const ExactStatMap& map);

struct LatticePoint {
  std::vector<std::int64_t> scaled;  // n * L(x^n)
  std::uint32_t n = 0;

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

LatticePoint point_class_of(const LatticeMap& lmap, std::span<const Symbol> seq);

TypeIndex point_type_index(const FamilySpec& spec, const LatticeMap& lmap, std::uint32_t n,
                           const EnumerationBudget& budget = {});

/// tau(1) + R * ell.
Eigen::VectorXd tau_of_lattice(const FamilySpec& spec, const LatticeMap& lmap,
                               const Eigen::VectorXd& ell);

/// -(<theta, tau(ell)> - psi(theta)) - (d'/2n) log2(2 pi n) + C/n, theta the
/// MLE at tau(ell).
double f0_of(const FamilySpec& spec, const LatticeMap& lmap, std::uint32_t n,
             const Eigen::VectorXd& ell, double c = 0.0);
double f0_of(const FamilySpec& spec, const LatticeMap& lmap, const LatticePoint& point,
             double c = 0.0);

}  // namespace typesize
