#pragma once

// Quantized type classes: sequences whose sufficient statistic falls in the
// same cuboid of side s/n, and the bound functions r(x^n) and f(tau).

#include <span>

#include "typesize/expofam.hpp"
#include "typesize/grid.hpp"
#include "typesize/type_index.hpp"

namespace typesize {

TypeIndex build_type_index(const FamilySpec& spec, const Grid& grid,
                           const EnumerationBudget& budget = {});

/// Exact size of the class containing `seq`.
BigInt type_size_of_sequence(const TypeIndex& index, std::span<const Symbol> seq);

/// max over ||theta|| <= rho of <theta, tau> - psi(theta), negated. Targets
/// outside the statistic hull (cuboid centers near the boundary) use the
/// ball-constrained maximizer.
double neg_log_ml(const FamilySpec& spec, const Eigen::VectorXd& tau);

/// -log2 p_{theta_c}(x^n) - (d/2) log2 n + d log2 s, theta_c the MLE at the
/// cuboid center of x^n.
double r_of(const FamilySpec& spec, const Grid& grid, std::span<const Symbol> seq);
double r_of_counts(const FamilySpec& spec, const Grid& grid, std::span<const std::uint32_t> counts);

/// -<theta, tau> + psi(theta) - (d/2n) log2 n + d log2(s)/n + 3 kappa s/n + C/n
/// with theta the MLE at tau and n, s taken from the grid.
double f_of(const FamilySpec& spec, const Grid& grid, const Eigen::VectorXd& tau, double c = 0.0);

/// max over compositions of | log2|T| - r |.
double max_sandwich_gap(const TypeIndex& index);

}  // namespace typesize
