#pragma once

// Exponential families over a finite alphabet:
//
//   p_theta(x) = 2^{<theta, tau(x)> - psi(theta)},   x in {1, ..., |X|}
//
// All logarithms and every exposed quantity are in bits.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace typesize {

/// 1-based alphabet symbol.
using Symbol = std::uint32_t;
using Sequence = std::vector<Symbol>;

struct Alphabet {
  std::size_t size = 0;

  bool contains(Symbol x) const { return x >= 1 && x <= size; }
};

/// Alphabet, per-symbol sufficient statistics tau(x) in R^d and the
/// parameter-norm bound rho_max. The parameter set is the closed l2 ball of
/// radius rho_max. Immutable after construction.
class FamilySpec {
 public:
  /// `tau` holds one row per symbol (|X| x d). Throws SpecError on a
  /// non-minimal table, a non-finite entry, or rho_max outside (0, inf).
  FamilySpec(Eigen::MatrixXd tau, double rho_max);

  Alphabet alphabet() const { return {static_cast<std::size_t>(tau_.rows())}; }
  std::size_t alphabet_size() const { return static_cast<std::size_t>(tau_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(tau_.cols()); }
  const Eigen::MatrixXd& tau() const { return tau_; }
  Eigen::VectorXd tau_of(Symbol x) const;
  double rho_max() const { return rho_max_; }

  /// kappa = rho_max * sqrt(d) / 2.
  double kappa() const;

  friend bool operator==(const FamilySpec& a, const FamilySpec& b) {
    return a.rho_max_ == b.rho_max_ && a.tau_.rows() == b.tau_.rows() &&
           a.tau_.cols() == b.tau_.cols() && a.tau_ == b.tau_;
  }

 private:
  Eigen::MatrixXd tau_;
  double rho_max_;
};

/// A parameter vector validated against its family: dimension d and
/// ||theta|| <= rho_max (up to a relative 1e-12 slack).
class ParamVector {
 public:
  ParamVector(const FamilySpec& spec, Eigen::VectorXd theta);

  static ParamVector zero(const FamilySpec& spec);

  const Eigen::VectorXd& values() const { return theta_; }
  double operator[](Eigen::Index i) const { return theta_[i]; }
  Eigen::Index size() const { return theta_.size(); }

 private:
  Eigen::VectorXd theta_;
};

struct ModelEval {
  Eigen::VectorXd theta;
  double psi = 0.0;
  Eigen::VectorXd pmf;
  Eigen::VectorXd grad_psi;  // E[tau(X)]
  Eigen::MatrixXd cov_tau;   // Cov[tau(X)]
  Eigen::MatrixXd hess_psi;  // ln2 * Cov[tau(X)] (psi is a base-2 log-sum)
};

ModelEval evaluate(const FamilySpec& spec, const Eigen::VectorXd& theta);

double psi(const FamilySpec& spec, const ParamVector& theta);
Eigen::VectorXd pmf(const FamilySpec& spec, const ParamVector& theta);

/// Throws DomainError on an empty sequence or an out-of-range symbol.
Eigen::VectorXd suffstat(const FamilySpec& spec, std::span<const Symbol> seq);

/// (1/n) * sum_x counts[x] * tau(x), summed in symbol order. `counts` is
/// 0-based by symbol and must not be all zero.
Eigen::VectorXd suffstat_of_counts(const FamilySpec& spec,
                                   std::span<const std::uint32_t> counts);

/// log2 p_theta(x^n) = n * (<theta, suffstat(x^n)> - psi(theta)).
double seq_log_prob(const FamilySpec& spec, const ParamVector& theta,
                    std::span<const Symbol> seq);

/// Same quantity from a composition.
double counts_log_prob(const FamilySpec& spec, const Eigen::VectorXd& theta,
                       std::span<const std::uint32_t> counts);

/// -<theta, grad psi> + psi.
double entropy(const FamilySpec& spec, const ParamVector& theta);

/// Var[-log2 p_theta(X)] by direct summation.
double varentropy(const FamilySpec& spec, const ParamVector& theta);

/// Membership of `target` in conv{tau(x)} with absolute slack `tol`.
bool in_convex_hull(const FamilySpec& spec, const Eigen::VectorXd& target,
                    double tol = 1e-9);

struct MleOptions {
  bool require_in_hull = true;
  double gradient_tol = 1e-10;
  int max_iterations = 200;
};

/// argmax over ||theta|| <= rho_max of <theta, target> - psi(theta).
/// Throws DomainError when `target` lies outside the convex hull of the
/// statistics (unless disabled in `options`).
ParamVector mle(const FamilySpec& spec, const Eigen::VectorXd& target,
                const MleOptions& options = {});

}  // namespace typesize
