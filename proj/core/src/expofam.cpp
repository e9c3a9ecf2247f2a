#include "typesize/expofam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "typesize/errors.hpp"

namespace typesize {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Relative slack on ||theta|| <= rho_max.
constexpr double kBallSlack = 1e-12;

void require_dim(const FamilySpec& spec, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.dim()) {
    std::ostringstream msg;
    msg << "parameter has dimension " << theta.size() << ", family has d = " << spec.dim();
    throw SpecError(msg.str());
  }
}

// g_lambda(theta) = <theta, target> - psi(theta) - lambda/2 ||theta||^2
double objective(const FamilySpec& spec, const Eigen::VectorXd& target,
                 const Eigen::VectorXd& theta, double lambda) {
  const Eigen::VectorXd exponents = spec.tau() * theta;
  const double top = exponents.maxCoeff();
  const double log_sum = top + std::log2(((exponents.array() - top) * kLn2).exp().sum());
  return theta.dot(target) - log_sum - 0.5 * lambda * theta.squaredNorm();
}

struct NewtonOutcome {
  Eigen::VectorXd theta;
  bool converged = false;
  bool left_ball = false;
};

// Damped Newton ascent on the strictly concave g_lambda. When `radius` is
// finite, the solve stops as soon as a full Newton step would leave the ball.
NewtonOutcome newton_ascent(const FamilySpec& spec, const Eigen::VectorXd& target,
                            double lambda, Eigen::VectorXd theta, double radius,
                            const MleOptions& options, int max_iterations) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  NewtonOutcome out;
  for (int it = 0; it < max_iterations; ++it) {
    const ModelEval ev = evaluate(spec, theta);
    const Eigen::VectorXd grad = target - ev.grad_psi - lambda * theta;
    if (grad.norm() <= options.gradient_tol) {
      out.theta = std::move(theta);
      out.converged = true;
      return out;
    }
    const Eigen::MatrixXd curvature =
        ev.hess_psi + lambda * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd step = curvature.ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) <= 0.0) step = grad;

    if (std::isfinite(radius) && (theta + step).norm() > radius * (1.0 + kBallSlack)) {
      out.theta = std::move(theta);
      out.left_ball = true;
      return out;
    }

    const double f0 = objective(spec, target, theta, lambda);
    const double slope = grad.dot(step);
    double t = 1.0;
    Eigen::VectorXd candidate = theta + step;
    while (objective(spec, target, candidate, lambda) < f0 + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      candidate = theta + t * step;
    }
    if (t < 1.0) {
      // Near the optimum objective differences drop below rounding; fall back
      // to the full step when it shrinks the gradient.
      const Eigen::VectorXd full = theta + step;
      const ModelEval ef = evaluate(spec, full);
      if ((target - ef.grad_psi - lambda * full).norm() < grad.norm()) candidate = full;
    }
    if ((candidate - theta).norm() <= std::numeric_limits<double>::epsilon() * (1.0 + theta.norm())) {
      // No representable progress left; accept the current point.
      out.theta = std::move(theta);
      out.converged = grad.norm() <= 1e3 * options.gradient_tol;
      return out;
    }
    theta = std::move(candidate);
  }
  out.theta = std::move(theta);
  return out;
}

// Maximizer on the sphere ||theta|| = rho via the multiplier lambda of the
// penalized problem: ||theta(lambda)|| decreases in lambda.
Eigen::VectorXd constrained_mle(const FamilySpec& spec, const Eigen::VectorXd& target,
                                const MleOptions& options) {
  const double rho = spec.rho_max();
  const auto d = static_cast<Eigen::Index>(spec.dim());
  constexpr int kInnerIterations = 600;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  double lambda_lo = 1e-30;
  NewtonOutcome lo = newton_ascent(spec, target, lambda_lo, Eigen::VectorXd::Zero(d), kInf,
                                   options, kInnerIterations);
  if (lo.theta.norm() <= rho) {
    // The unpenalized optimum sits inside the ball; polish it there.
    NewtonOutcome polish =
        newton_ascent(spec, target, 0.0, lo.theta, rho, options, options.max_iterations);
    return polish.converged ? polish.theta : lo.theta;
  }

  double lambda_hi = 1.0;
  NewtonOutcome hi = newton_ascent(spec, target, lambda_hi, Eigen::VectorXd::Zero(d), kInf,
                                   options, kInnerIterations);
  while (hi.theta.norm() >= rho) {
    lambda_hi *= 4.0;
    hi = newton_ascent(spec, target, lambda_hi, hi.theta, kInf, options, kInnerIterations);
  }

  Eigen::VectorXd best = hi.theta;
  for (int it = 0; it < 200; ++it) {
    const double lambda_mid = std::sqrt(lambda_lo * lambda_hi);
    NewtonOutcome mid = newton_ascent(spec, target, lambda_mid, best, kInf, options,
                                      kInnerIterations);
    const double norm = mid.theta.norm();
    best = mid.theta;
    if (std::abs(norm - rho) <= 1e-14 * rho) break;
    if (norm > rho) {
      lambda_lo = lambda_mid;
    } else {
      lambda_hi = lambda_mid;
    }
    if (lambda_hi / lambda_lo - 1.0 < 1e-15) break;
  }
  return best * (rho / best.norm());
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  k = std::min(k, n - k);
  long double value = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    value = value * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (value > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(value + 0.5L);
}

// Projected-gradient distance from `target` to the hull, used when the
// simplex enumeration would be too large.
double hull_distance_iterative(const Eigen::MatrixXd& points, const Eigen::VectorXd& target) {
  const auto m = points.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  const Eigen::MatrixXd gram = points * points.transpose();
  const double step = 1.0 / std::max(gram.selfadjointView<Eigen::Lower>().operatorNorm(), 1e-300);
  for (int it = 0; it < 20000; ++it) {
    const Eigen::VectorXd residual = points.transpose() * w - target;
    Eigen::VectorXd y = w - step * (points * residual);
    // Euclidean projection onto the probability simplex.
    std::vector<double> sorted(y.data(), y.data() + m);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      cumulative += sorted[static_cast<std::size_t>(j)];
      const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
      if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) shift = candidate;
    }
    w = (y.array() - shift).max(0.0);
  }
  return (points.transpose() * w - target).norm();
}

}  // namespace

FamilySpec::FamilySpec(Eigen::MatrixXd tau, double rho_max)
    : tau_(std::move(tau)), rho_max_(rho_max) {
  if (tau_.rows() < 2) throw SpecError("alphabet size must be at least 2");
  if (tau_.cols() < 1) throw SpecError("parameter dimension d must be positive");
  if (!tau_.allFinite()) throw SpecError("tau table contains a non-finite entry");
  if (!(rho_max_ > 0.0) || !std::isfinite(rho_max_)) {
    throw SpecError("rho_max must be a positive finite real");
  }
  const Eigen::MatrixXd differences =
      (tau_.bottomRows(tau_.rows() - 1).rowwise() - tau_.row(0)).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(differences);
  lu.setThreshold(1e-10);
  if (lu.rank() != tau_.cols()) {
    std::ostringstream msg;
    msg << "statistics are not minimal: rank of [tau(x) - tau(1)] is " << lu.rank()
        << ", expected d = " << tau_.cols();
    throw SpecError(msg.str());
  }
}

Eigen::VectorXd FamilySpec::tau_of(Symbol x) const {
  if (!alphabet().contains(x)) throw DomainError("symbol out of range: " + std::to_string(x));
  return tau_.row(static_cast<Eigen::Index>(x) - 1).transpose();
}

double FamilySpec::kappa() const {
  return rho_max_ * std::sqrt(static_cast<double>(dim())) / 2.0;
}

ParamVector::ParamVector(const FamilySpec& spec, Eigen::VectorXd theta) : theta_(std::move(theta)) {
  require_dim(spec, theta_);
  if (!theta_.allFinite()) throw DomainError("parameter has a non-finite entry");
  if (theta_.norm() > spec.rho_max() * (1.0 + kBallSlack)) {
    std::ostringstream msg;
    msg << "||theta|| = " << theta_.norm() << " exceeds rho_max = " << spec.rho_max();
    throw DomainError(msg.str());
  }
}

ParamVector ParamVector::zero(const FamilySpec& spec) {
  return ParamVector(spec, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dim())));
}

ModelEval evaluate(const FamilySpec& spec, const Eigen::VectorXd& theta) {
  require_dim(spec, theta);
  ModelEval ev;
  ev.theta = theta;
  const Eigen::VectorXd exponents = spec.tau() * theta;
  const double top = exponents.maxCoeff();
  const Eigen::VectorXd weights = ((exponents.array() - top) * kLn2).exp().matrix();
  const double total = weights.sum();
  ev.psi = top + std::log2(total);
  ev.pmf = weights / total;
  ev.grad_psi = spec.tau().transpose() * ev.pmf;
  const Eigen::MatrixXd centered = spec.tau().rowwise() - ev.grad_psi.transpose();
  ev.cov_tau = centered.transpose() * ev.pmf.asDiagonal() * centered;
  ev.hess_psi = kLn2 * ev.cov_tau;
  return ev;
}

double psi(const FamilySpec& spec, const ParamVector& theta) {
  return evaluate(spec, theta.values()).psi;
}

Eigen::VectorXd pmf(const FamilySpec& spec, const ParamVector& theta) {
  return evaluate(spec, theta.values()).pmf;
}

Eigen::VectorXd suffstat(const FamilySpec& spec, std::span<const Symbol> seq) {
  if (seq.empty()) throw DomainError("sufficient statistic of an empty sequence");
  std::vector<std::uint32_t> counts(spec.alphabet_size(), 0);
  for (Symbol x : seq) {
    if (!spec.alphabet().contains(x)) throw DomainError("symbol out of range: " + std::to_string(x));
    ++counts[x - 1];
  }
  return suffstat_of_counts(spec, counts);
}

Eigen::VectorXd suffstat_of_counts(const FamilySpec& spec, std::span<const std::uint32_t> counts) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dim()));
  std::uint64_t n = 0;
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] == 0) continue;
    sum += static_cast<double>(counts[x]) * spec.tau().row(static_cast<Eigen::Index>(x)).transpose();
    n += counts[x];
  }
  if (n == 0) throw DomainError("sufficient statistic of an empty composition");
  return sum / static_cast<double>(n);
}

double counts_log_prob(const FamilySpec& spec, const Eigen::VectorXd& theta,
                       std::span<const std::uint32_t> counts) {
  const ModelEval ev = evaluate(spec, theta);
  const Eigen::VectorXd exponents = spec.tau() * theta;
  double total = 0.0;
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] == 0) continue;
    total += static_cast<double>(counts[x]) * (exponents[static_cast<Eigen::Index>(x)] - ev.psi);
  }
  return total;
}

double seq_log_prob(const FamilySpec& spec, const ParamVector& theta, std::span<const Symbol> seq) {
  if (seq.empty()) throw DomainError("log-probability of an empty sequence");
  std::vector<std::uint32_t> counts(spec.alphabet_size(), 0);
  for (Symbol x : seq) {
    if (!spec.alphabet().contains(x)) throw DomainError("symbol out of range: " + std::to_string(x));
    ++counts[x - 1];
  }
  return counts_log_prob(spec, theta.values(), counts);
}

double entropy(const FamilySpec& spec, const ParamVector& theta) {
  const ModelEval ev = evaluate(spec, theta.values());
  return -theta.values().dot(ev.grad_psi) + ev.psi;
}

double varentropy(const FamilySpec& spec, const ParamVector& theta) {
  const ModelEval ev = evaluate(spec, theta.values());
  const Eigen::ArrayXd self_info = ev.psi - (spec.tau() * theta.values()).array();
  const double mean = (ev.pmf.array() * self_info).sum();
  return (ev.pmf.array() * (self_info - mean).square()).sum();
}

bool in_convex_hull(const FamilySpec& spec, const Eigen::VectorXd& target, double tol) {
  require_dim(spec, target);
  const Eigen::MatrixXd& pts = spec.tau();
  const auto m = pts.rows();
  const auto d = pts.cols();
  if (d == 1) {
    return target[0] >= pts.col(0).minCoeff() - tol && target[0] <= pts.col(0).maxCoeff() + tol;
  }
  const auto k = static_cast<std::size_t>(d + 1);
  constexpr std::uint64_t kMaxSimplices = 2'000'000;
  if (binomial_capped(static_cast<std::uint64_t>(m), k, kMaxSimplices) > kMaxSimplices) {
    return hull_distance_iterative(pts, target) <= tol;
  }
  // Caratheodory: a point of a full-dimensional hull lies in some simplex
  // spanned by d+1 affinely independent statistics.
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  Eigen::MatrixXd system(d + 1, d + 1);
  Eigen::VectorXd rhs(d + 1);
  rhs << target, 1.0;
  const double scale = 1.0 + pts.cwiseAbs().maxCoeff();
  while (true) {
    for (std::size_t c = 0; c < k; ++c) {
      system.col(static_cast<Eigen::Index>(c)) << pts.row(pick[c]).transpose(), 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    lu.setThreshold(1e-12);
    if (lu.isInvertible()) {
      const Eigen::VectorXd weights = lu.solve(rhs);
      if (weights.minCoeff() >= -tol / scale) return true;
    }
    // next combination
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == static_cast<int>(m - static_cast<Eigen::Index>(k) + static_cast<Eigen::Index>(i) - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return false;
}

ParamVector mle(const FamilySpec& spec, const Eigen::VectorXd& target, const MleOptions& options) {
  require_dim(spec, target);
  if (!target.allFinite()) throw DomainError("MLE target has a non-finite entry");
  if (options.require_in_hull && !in_convex_hull(spec, target)) {
    throw DomainError("MLE target lies outside the convex hull of the sufficient statistics");
  }
  const auto d = static_cast<Eigen::Index>(spec.dim());
  NewtonOutcome first = newton_ascent(spec, target, 0.0, Eigen::VectorXd::Zero(d), spec.rho_max(),
                                      options, options.max_iterations);
  if (first.converged && first.theta.norm() <= spec.rho_max() * (1.0 + kBallSlack)) {
    Eigen::VectorXd theta = std::move(first.theta);
    if (theta.norm() > spec.rho_max()) theta *= spec.rho_max() / theta.norm();
    return ParamVector(spec, std::move(theta));
  }
  return ParamVector(spec, constrained_mle(spec, target, options));
}

}  // namespace typesize
