#include "typesize/quantized_types.hpp"

#include <algorithm>
#include <cmath>

#include "typesize/errors.hpp"

namespace typesize {

TypeIndex build_type_index(const FamilySpec& spec, const Grid& grid,
                           const EnumerationBudget& budget) {
  return TypeIndex::quantized(spec, grid, budget);
}

BigInt type_size_of_sequence(const TypeIndex& index, std::span<const Symbol> seq) {
  const Counts counts = counts_of(seq, index.alphabet_size());
  return index.type_class(index.class_of_counts(counts)).size;
}

double neg_log_ml(const FamilySpec& spec, const Eigen::VectorXd& tau) {
  MleOptions options;
  options.require_in_hull = false;
  const ParamVector theta = mle(spec, tau, options);
  const ModelEval ev = evaluate(spec, theta.values());
  return -theta.values().dot(tau) + ev.psi;
}

double r_of_counts(const FamilySpec& spec, const Grid& grid, std::span<const std::uint32_t> counts) {
  const Eigen::VectorXd tau = suffstat_of_counts(spec, counts);
  const Eigen::VectorXd center = cuboid_center_of(grid, tau);
  MleOptions options;
  options.require_in_hull = false;
  const ParamVector theta_c = mle(spec, center, options);
  const double d = static_cast<double>(spec.dim());
  const double n = static_cast<double>(grid.n);
  return -counts_log_prob(spec, theta_c.values(), counts) - 0.5 * d * std::log2(n) +
         d * std::log2(grid.s);
}

double r_of(const FamilySpec& spec, const Grid& grid, std::span<const Symbol> seq) {
  if (seq.size() != grid.n) throw DomainError("sequence length does not match the grid blocklength");
  return r_of_counts(spec, grid, counts_of(seq, spec.alphabet_size()));
}

double f_of(const FamilySpec& spec, const Grid& grid, const Eigen::VectorXd& tau, double c) {
  const double d = static_cast<double>(spec.dim());
  const double n = static_cast<double>(grid.n);
  return neg_log_ml(spec, tau) - d / (2.0 * n) * std::log2(n) + d * std::log2(grid.s) / n +
         3.0 * spec.kappa() * grid.s / n + c / n;
}

double max_sandwich_gap(const TypeIndex& index) {
  if (!index.grid()) throw DomainError("sandwich gap needs a quantized index");
  double worst = 0.0;
  for (std::size_t i = 0; i < index.class_count(); ++i) {
    const double log_size = log2(index.type_class(i).size);
    for (std::size_t j = 0; j < index.type_class(i).count; ++j) {
      const double r = r_of_counts(index.family(), *index.grid(), index.member(i, j));
      worst = std::max(worst, std::abs(log_size - r));
    }
  }
  return worst;
}

}  // namespace typesize
