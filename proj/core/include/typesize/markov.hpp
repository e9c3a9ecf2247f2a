#pragma once

// First-order Markov exponential families
//
//   P_theta(b | a) = 2^{<theta, tau(a, b)> - psi(theta)}
//
// with a single log-normalizer, which forces every row sum of 2^{<theta, tau>}
// to agree. Type classes group paths from the known initial symbol x0 by the
// cuboid of tau(x^n) = (1/n) sum_i tau(x_{i-1}, x_i).

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "typesize/bigint.hpp"
#include "typesize/codec.hpp"
#include "typesize/expofam.hpp"
#include "typesize/grid.hpp"
#include "typesize/rate_analysis.hpp"

namespace typesize {

class MarkovFamilySpec {
 public:
  /// `tau2` holds |X|^2 rows, row (a-1)*|X| + (b-1) for the pair (a, b).
  /// Throws SpecError on non-minimal statistics, rows whose normalizers
  /// differ on the validation grid (naming the row), or a bad x0.
  MarkovFamilySpec(std::size_t alphabet_size, Eigen::MatrixXd tau2, double rho_max, Symbol x0);

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t dim() const { return static_cast<std::size_t>(tau2_.cols()); }
  const Eigen::MatrixXd& tau2() const { return tau2_; }
  Eigen::VectorXd tau_of(Symbol a, Symbol b) const;
  double rho_max() const { return rho_max_; }
  double kappa() const;
  Symbol x0() const { return x0_; }

  friend bool operator==(const MarkovFamilySpec& a, const MarkovFamilySpec& b) {
    return a.alphabet_size_ == b.alphabet_size_ && a.rho_max_ == b.rho_max_ && a.x0_ == b.x0_ &&
           a.tau2_.rows() == b.tau2_.rows() && a.tau2_.cols() == b.tau2_.cols() && a.tau2_ == b.tau2_;
  }

 private:
  std::size_t alphabet_size_;
  Eigen::MatrixXd tau2_;
  double rho_max_;
  Symbol x0_;
};

/// Throws DomainError when ||theta|| exceeds rho_max or the dimension is wrong.
double markov_psi(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta);

/// Row-stochastic P(a, b) = P(b | a). Throws SpecError naming the first row
/// whose normalizer differs from row 1 by more than 1e-9.
Eigen::MatrixXd transition_matrix(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta);

/// Throws DomainError for a reducible chain.
Eigen::VectorXd stationary_dist(const Eigen::MatrixXd& P);

double entropy_rate(const Eigen::MatrixXd& P);
/// Asymptotic variance of sum_i -log2 P(x_{i-1}, x_i) per symbol, from the
/// Poisson equation with the fundamental matrix (I - P + 1 pi^T)^{-1}.
double varentropy_rate(const Eigen::MatrixXd& P);

double entropy_rate(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta);
double varentropy_rate(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta);

/// tau(x^n) with x_0 = spec.x0().
Eigen::VectorXd pair_suffstat(const MarkovFamilySpec& spec, std::span<const Symbol> seq);

/// sum_i log2 P(x_i | x_{i-1}).
double path_log_prob(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta,
                     std::span<const Symbol> seq);

struct PathBudget {
  std::uint64_t paths = 2'000'000;
};

/// Exhaustive Markov type index over all |X|^n paths from x0, with the codec
/// order (classes by size then key, paths lexicographic within a class)
/// materialized as rank tables.
class MarkovTypeIndex {
 public:
  /// Throws ResourceError (suggesting the Monte Carlo estimator) when
  /// |X|^n exceeds the budget.
  static MarkovTypeIndex exhaustive(const MarkovFamilySpec& spec, const Grid& grid,
                                    const PathBudget& budget = {});

  const MarkovFamilySpec& family() const { return spec_; }
  const Grid& grid() const { return grid_; }
  std::uint32_t n() const { return grid_.n; }
  std::uint64_t path_count() const { return static_cast<std::uint64_t>(member_of_path_.size()); }

  std::size_t class_count() const { return class_sizes_.size(); }
  std::span<const std::int64_t> key(std::size_t cls) const;
  std::uint64_t class_size(std::size_t cls) const { return class_sizes_[cls]; }

  /// Codec order.
  std::size_t class_at(std::size_t pos) const { return order_[pos]; }
  std::uint64_t offset(std::size_t pos) const { return offsets_[pos]; }

  /// Paths are numbered lexicographically: sum_i (x_i - 1) |X|^{n-i}.
  std::uint64_t path_number(std::span<const Symbol> seq) const;
  Sequence path_of_number(std::uint64_t number) const;
  std::size_t class_of_path(std::uint64_t number) const;
  std::uint64_t rank_of_path(std::uint64_t number) const { return rank_of_path_[number]; }
  std::uint64_t path_of_rank(std::uint64_t rank) const { return path_of_rank_[rank]; }

  /// Distinct pair-count matrices (flat |X| x |X|), their class and how many
  /// paths share them.
  std::size_t member_count() const { return member_class_.size(); }
  std::span<const std::uint32_t> member_pairs(std::size_t m) const;
  std::size_t member_class(std::size_t m) const { return member_class_[m]; }
  std::uint64_t member_multiplicity(std::size_t m) const { return member_multiplicity_[m]; }

 private:
  MarkovTypeIndex(MarkovFamilySpec spec, Grid grid) : spec_(std::move(spec)), grid_(std::move(grid)) {}

  MarkovFamilySpec spec_;
  Grid grid_;
  std::vector<std::int64_t> keys_;
  std::vector<std::uint64_t> class_sizes_;
  std::vector<std::size_t> order_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> member_of_path_;
  std::vector<std::uint32_t> member_pairs_;
  std::vector<std::size_t> member_class_;
  std::vector<std::uint64_t> member_multiplicity_;
  std::vector<std::uint64_t> rank_of_path_;
  std::vector<std::uint64_t> path_of_rank_;
};

struct MarkovSizeEstimate {
  std::vector<std::int64_t> key;
  double size = 0.0;
  double standard_error = 0.0;
  std::uint64_t hits = 0;
};

/// Class sizes estimated as |X|^n times the fraction of uniformly drawn
/// paths landing in the class. Sorted by key.
std::vector<MarkovSizeEstimate> markov_size_estimates(const MarkovFamilySpec& spec, const Grid& grid,
                                                      std::uint64_t samples, std::uint64_t seed);

class MarkovCodec {
 public:
  explicit MarkovCodec(std::shared_ptr<const MarkovTypeIndex> index) : index_(std::move(index)) {}

  const MarkovTypeIndex& index() const { return *index_; }
  std::uint32_t n() const { return index_->n(); }

  BigInt rank(std::span<const Symbol> seq) const;
  Sequence unrank(const BigInt& k) const;
  Codeword encode(std::span<const Symbol> seq) const;
  /// Throws CorruptInputError when the word's index is >= |X|^n.
  Sequence decode(const Codeword& word) const;

 private:
  std::shared_ptr<const MarkovTypeIndex> index_;
};

RankedProfile markov_ranked_profile(const MarkovTypeIndex& index, const Eigen::VectorXd& theta);

RateReport markov_eps_rate(const MarkovTypeIndex& index, const Eigen::VectorXd& theta, double epsilon);

/// Diagnostic fit of n R_n - n H - sigma sqrt(n) Qinv(eps) against log2 n.
ThirdOrderFit markov_third_order_fit(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta,
                                     double s, const std::vector<std::uint32_t>& n_list,
                                     double epsilon, const PathBudget& budget = {});

}  // namespace typesize
