#pragma once

// Exact finite-blocklength rate of the Type Size code, overflow
// probabilities, Gaussian tails, third-order fits and the empirical checks
// for asymptotic normality and the ML approximation.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "typesize/bigint.hpp"
#include "typesize/codec.hpp"
#include "typesize/expofam.hpp"
#include "typesize/grid.hpp"
#include "typesize/point_types.hpp"
#include "typesize/type_index.hpp"

namespace typesize {

struct SourceSpec {
  FamilySpec family;
  ParamVector theta_star;
};

/// Masses below this are treated as satisfying "<= epsilon".
inline constexpr double kMassTolerance = 1e-12;

struct RateReport {
  std::uint32_t n = 0;
  double epsilon = 0.0;
  double gamma = 0.0;        // log2 of the largest kept class size, over n
  BigInt M;                  // total size of the kept classes
  double rate = 0.0;         // min k/n with P[l(phi(X^n)) >= k] <= epsilon
  double closed_form_rate = 0.0;  // ceil(log2 M) / n
  PartitionMode mode = PartitionMode::quantized;
};

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Class sizes and masses in codec order together with the tail mass
/// P[rank >= R]. Shared by the i.i.d. and Markov indexes.
struct RankedProfile {
  std::uint32_t n = 0;
  PartitionMode mode = PartitionMode::quantized;
  std::vector<BigInt> sizes;
  std::vector<double> masses;
  BigInt total;
  std::function<double(const BigInt&)> tail;
};

RateReport rate_from_profile(const RankedProfile& profile, double epsilon);

/// P_theta*[ class of each TypeIndex class ], indexed like the TypeIndex.
std::vector<double> class_masses(const SourceSpec& source, const TypeIndex& index);

RankedProfile ranked_profile(const SourceSpec& source, const TypeIndex& index);

/// P[log2 |T_{X^n}| > n gamma].
double overflow_prob(const SourceSpec& source, const TypeIndex& index, double gamma);

/// Throws DomainError unless 0 < epsilon < 1.
RateReport m_eps(const SourceSpec& source, const TypeIndex& index, double epsilon);

double eps_rate(const SourceSpec& source, const TypeIndex& index, double epsilon);

double gaussian_Q(double z);
/// Throws DomainError unless 0 < p < 1.
double gaussian_Qinv(double p);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
};

/// Ordinary least squares of y on x; needs at least two distinct x.
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct IndexConfig {
  PartitionMode mode = PartitionMode::quantized;
  double s = 1.0;
  std::optional<Eigen::VectorXd> anchor;  // origin when unset
  std::optional<LatticeMap> lattice;      // required in point mode
  EnumerationBudget budget;
};

TypeIndex build_index(const FamilySpec& spec, const IndexConfig& config, std::uint32_t n);

struct FitPoint {
  std::uint32_t n = 0;
  double rate = 0.0;
  double closed_form_rate = 0.0;
  double y = 0.0;  // n R - n H - sigma sqrt(n) Qinv(eps)
};

struct ThirdOrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double entropy = 0.0;
  double dispersion = 0.0;  // sigma, bits
  std::vector<FitPoint> points;
  std::vector<double> residuals;
};

/// Builds y(n) from the exact rate at each n and fits y against log2 n.
/// Throws DomainError with fewer than 3 points or a non-increasing n list.
ThirdOrderFit third_order_fit(const SourceSpec& source, const IndexConfig& config,
                              const std::vector<std::uint32_t>& n_list, double epsilon);

/// Fits precomputed (n, rate) points; shared with the Markov harness.
ThirdOrderFit fit_third_order(std::vector<FitPoint> points, double entropy, double sigma,
                              double epsilon);

/// sup over z in [-3, 3] (step 0.01) of |P_hat[Z > z] - Q(z)| with
/// Z = (-log2 p_{theta_hat(X^n)}(X^n) - n H) / (sqrt(n) sigma), X^n drawn
/// i.i.d. from theta*. Throws DomainError when sigma = 0 or samples < 10^4.
double normality_check(const SourceSpec& source, std::uint32_t n, std::uint64_t samples,
                       std::uint64_t seed);

struct MlApproxReport {
  double max_gap = 0.0;
  double min_gap = 0.0;
  double bound = 0.0;  // 2 kappa s
  std::size_t compositions = 0;
  std::size_t violations = 0;
};

/// log2 p_{theta_hat}(x^n) - log2 p_{theta_hat_c}(x^n) over every
/// composition; a violation is a gap below -1e-9 or above 2 kappa s + 1e-9.
MlApproxReport ml_approx_check(const FamilySpec& spec, const Grid& grid,
                               const EnumerationBudget& budget = {});

}  // namespace typesize
