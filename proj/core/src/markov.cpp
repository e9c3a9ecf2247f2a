#include "typesize/markov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "typesize/errors.hpp"
#include "typesize/random.hpp"

namespace typesize {

namespace {

constexpr double kRowTolerance = 1e-9;
constexpr std::uint64_t kValidationSeed = 0x7459'7065'5369'7A65ULL;

std::size_t pair_row(std::size_t k, Symbol a, Symbol b) { return (a - 1) * k + (b - 1); }

// log2 of each row sum of 2^{<theta, tau(a, b)>}.
Eigen::VectorXd row_log_sums(const Eigen::MatrixXd& tau2, std::size_t k, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd exponents = tau2 * theta;
  Eigen::VectorXd out(static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    const auto row = exponents.segment(static_cast<Eigen::Index>(a * k), static_cast<Eigen::Index>(k));
    const double top = row.maxCoeff();
    out[static_cast<Eigen::Index>(a)] =
        top + std::log2(((row.array() - top) * std::numbers::ln2).exp().sum());
  }
  return out;
}

std::string format_theta(const Eigen::VectorXd& theta) {
  std::ostringstream out;
  out << "(";
  for (Eigen::Index i = 0; i < theta.size(); ++i) out << (i ? ", " : "") << theta[i];
  out << ")";
  return out.str();
}

void check_rows(const Eigen::VectorXd& sums, const Eigen::VectorXd& theta) {
  for (Eigen::Index a = 1; a < sums.size(); ++a) {
    if (std::abs(sums[a] - sums[0]) > kRowTolerance) {
      std::ostringstream msg;
      msg << "row " << a + 1 << " of tau2 is not normalized by the common psi: its log2 row sum is "
          << sums[a] << ", row 1 has " << sums[0] << " at theta = " << format_theta(theta);
      throw SpecError(msg.str());
    }
  }
}

void require_theta(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.dim()) {
    throw SpecError("parameter dimension does not match the Markov family");
  }
  if (!theta.allFinite() || theta.norm() > spec.rho_max() * (1.0 + 1e-12)) {
    throw DomainError("theta lies outside the parameter ball");
  }
}

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (std::uint32_t x : v) h = SplitMix64::mix64(h ^ x);
    return static_cast<std::size_t>(h);
  }
};

Eigen::VectorXd suffstat_of_pairs(const MarkovFamilySpec& spec, std::span<const std::uint32_t> pairs,
                                  std::uint32_t n) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dim()));
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    if (pairs[r] != 0) sum += static_cast<double>(pairs[r]) * spec.tau2().row(static_cast<Eigen::Index>(r)).transpose();
  }
  return sum / static_cast<double>(n);
}

std::uint64_t checked_path_count(std::size_t k, std::uint32_t n, const PathBudget& budget) {
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (count > budget.paths / k) {
      std::ostringstream msg;
      msg << "|X|^n = " << k << "^" << n << " paths exceed budget-paths = " << budget.paths
          << "; use the Monte Carlo size estimator instead";
      throw ResourceError(msg.str());
    }
    count *= k;
  }
  if (count > budget.paths) throw ResourceError("path count exceeds budget-paths; use the Monte Carlo size estimator");
  return count;
}

}  // namespace

MarkovFamilySpec::MarkovFamilySpec(std::size_t alphabet_size, Eigen::MatrixXd tau2, double rho_max,
                                   Symbol x0)
    : alphabet_size_(alphabet_size), tau2_(std::move(tau2)), rho_max_(rho_max), x0_(x0) {
  if (alphabet_size_ < 2) throw SpecError("alphabet size must be at least 2");
  if (static_cast<std::size_t>(tau2_.rows()) != alphabet_size_ * alphabet_size_) {
    throw SpecError("tau2 must have |X|^2 rows");
  }
  if (tau2_.cols() < 1) throw SpecError("parameter dimension d must be positive");
  if (!tau2_.allFinite()) throw SpecError("tau2 contains a non-finite entry");
  if (!(rho_max_ > 0.0) || !std::isfinite(rho_max_)) throw SpecError("rho_max must be a positive finite real");
  if (x0_ < 1 || x0_ > alphabet_size_) throw SpecError("x0 must be a symbol of the alphabet");

  const Eigen::MatrixXd differences = (tau2_.bottomRows(tau2_.rows() - 1).rowwise() - tau2_.row(0)).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(differences);
  lu.setThreshold(1e-10);
  if (lu.rank() != tau2_.cols()) {
    std::ostringstream msg;
    msg << "pair statistics are not minimal: rank " << lu.rank() << ", expected d = " << tau2_.cols();
    throw SpecError(msg.str());
  }

  // Validation grid: the origin, the axis points at radius rho and fixed
  // pseudo-random points in the ball.
  const auto d = tau2_.cols();
  std::vector<Eigen::VectorXd> grid{Eigen::VectorXd::Zero(d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    for (double sign : {-1.0, 1.0}) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
      t[i] = sign * rho_max_;
      grid.push_back(t);
    }
  }
  SplitMix64 rng(kValidationSeed);
  for (int i = 0; i < 16; ++i) {
    Eigen::VectorXd t(d);
    for (Eigen::Index j = 0; j < d; ++j) t[j] = 2.0 * rng.uniform() - 1.0;
    if (t.norm() > 0.0) t *= rho_max_ * rng.uniform() / t.norm();
    grid.push_back(t);
  }
  for (const auto& t : grid) check_rows(row_log_sums(tau2_, alphabet_size_, t), t);
}

Eigen::VectorXd MarkovFamilySpec::tau_of(Symbol a, Symbol b) const {
  if (a < 1 || a > alphabet_size_ || b < 1 || b > alphabet_size_) throw DomainError("symbol out of range");
  return tau2_.row(static_cast<Eigen::Index>(pair_row(alphabet_size_, a, b))).transpose();
}

double MarkovFamilySpec::kappa() const { return rho_max_ * std::sqrt(static_cast<double>(dim())) / 2.0; }

double markov_psi(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta) {
  require_theta(spec, theta);
  return row_log_sums(spec.tau2(), spec.alphabet_size(), theta)[0];
}

Eigen::MatrixXd transition_matrix(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta) {
  require_theta(spec, theta);
  const std::size_t k = spec.alphabet_size();
  const Eigen::VectorXd sums = row_log_sums(spec.tau2(), k, theta);
  check_rows(sums, theta);
  const Eigen::VectorXd exponents = spec.tau2() * theta;
  Eigen::MatrixXd P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      P(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          std::exp2(exponents[static_cast<Eigen::Index>(a * k + b)] - sums[0]);
    }
    const double total = P.row(static_cast<Eigen::Index>(a)).sum();
    P.row(static_cast<Eigen::Index>(a)) /= total;
  }
  return P;
}

Eigen::VectorXd stationary_dist(const Eigen::MatrixXd& P) {
  const auto k = P.rows();
  if (k < 1 || P.cols() != k) throw DomainError("transition matrix must be square");
  if ((P.array() < 0.0).any() || ((P.rowwise().sum().array() - 1.0).abs() > 1e-9).any()) {
    throw DomainError("transition matrix must be row-stochastic");
  }
  // Irreducible iff every state reaches every other along positive entries.
  for (Eigen::Index start = 0; start < k; ++start) {
    std::vector<bool> seen(static_cast<std::size_t>(k), false);
    std::vector<Eigen::Index> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
      const Eigen::Index a = stack.back();
      stack.pop_back();
      for (Eigen::Index b = 0; b < k; ++b) {
        if (P(a, b) > 0.0 && !seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = true;
          stack.push_back(b);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw DomainError("transition matrix is reducible: state " + std::to_string(start + 1) +
                        " does not reach every state");
    }
  }
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(k, k) - P.transpose();
  system.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs[k - 1] = 1.0;
  Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
  // One refinement step against the residual.
  const Eigen::VectorXd residual = rhs - system * pi;
  pi += system.fullPivLu().solve(residual);
  return pi / pi.sum();
}

double entropy_rate(const Eigen::MatrixXd& P) {
  const Eigen::VectorXd pi = stationary_dist(P);
  double h = 0.0;
  for (Eigen::Index a = 0; a < P.rows(); ++a) {
    for (Eigen::Index b = 0; b < P.cols(); ++b) {
      if (P(a, b) > 0.0) h -= pi[a] * P(a, b) * std::log2(P(a, b));
    }
  }
  return h;
}

double varentropy_rate(const Eigen::MatrixXd& P) {
  const auto k = P.rows();
  const Eigen::VectorXd pi = stationary_dist(P);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (P(a, b) > 0.0) g(a, b) = -std::log2(P(a, b));
    }
  }
  const Eigen::VectorXd g_bar = (P.array() * g.array()).rowwise().sum().matrix();
  const double h = pi.dot(g_bar);
  const Eigen::MatrixXd fundamental =
      (Eigen::MatrixXd::Identity(k, k) - P + Eigen::VectorXd::Ones(k) * pi.transpose()).inverse();
  const Eigen::VectorXd poisson = fundamental * (g_bar - h * Eigen::VectorXd::Ones(k));
  double var = 0.0;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (P(a, b) <= 0.0) continue;
      const double martingale = g(a, b) + poisson[b] - poisson[a] - h;
      var += pi[a] * P(a, b) * martingale * martingale;
    }
  }
  return var;
}

double entropy_rate(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta) {
  return entropy_rate(transition_matrix(spec, theta));
}

double varentropy_rate(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta) {
  return varentropy_rate(transition_matrix(spec, theta));
}

Eigen::VectorXd pair_suffstat(const MarkovFamilySpec& spec, std::span<const Symbol> seq) {
  if (seq.empty()) throw DomainError("pair statistic of an empty path");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dim()));
  Symbol prev = spec.x0();
  for (Symbol x : seq) {
    sum += spec.tau_of(prev, x);
    prev = x;
  }
  return sum / static_cast<double>(seq.size());
}

double path_log_prob(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta,
                     std::span<const Symbol> seq) {
  const Eigen::MatrixXd P = transition_matrix(spec, theta);
  double total = 0.0;
  Symbol prev = spec.x0();
  for (Symbol x : seq) {
    if (x < 1 || x > spec.alphabet_size()) throw DomainError("symbol out of range: " + std::to_string(x));
    total += std::log2(P(prev - 1, x - 1));
    prev = x;
  }
  return total;
}

MarkovTypeIndex MarkovTypeIndex::exhaustive(const MarkovFamilySpec& spec, const Grid& grid,
                                            const PathBudget& budget) {
  if (grid.dim() != spec.dim()) throw DomainError("grid dimension does not match the Markov family");
  const std::size_t k = spec.alphabet_size();
  const std::uint32_t n = grid.n;
  const std::uint64_t total = checked_path_count(k, n, budget);

  MarkovTypeIndex index(spec, grid);
  index.member_of_path_.resize(total);

  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VectorHash> members;
  std::vector<std::uint32_t> pairs(k * k, 0);
  std::vector<Symbol> path(n, 1);
  // Odometer over paths in lexicographic order, keeping pair counts current.
  for (std::uint32_t i = 0; i < n; ++i) ++pairs[pair_row(k, i == 0 ? spec.x0() : Symbol{1}, 1)];
  for (std::uint64_t number = 0; number < total; ++number) {
    auto [it, inserted] = members.try_emplace(pairs, static_cast<std::uint32_t>(members.size()));
    if (inserted) {
      index.member_pairs_.insert(index.member_pairs_.end(), pairs.begin(), pairs.end());
      index.member_multiplicity_.push_back(0);
    }
    index.member_of_path_[number] = it->second;
    ++index.member_multiplicity_[it->second];
    if (number + 1 == total) break;
    // Increment: find the last position that is not the largest symbol.
    std::uint32_t pos = n;
    while (pos > 0 && path[pos - 1] == k) --pos;
    // Positions pos-1 .. n-1 change, so do the pairs ending there.
    const std::uint32_t first = pos - 1;
    for (std::uint32_t i = first; i < n; ++i) {
      const Symbol prev = i == 0 ? spec.x0() : path[i - 1];
      --pairs[pair_row(k, prev, path[i])];
    }
    ++path[first];
    for (std::uint32_t i = first + 1; i < n; ++i) path[i] = 1;
    for (std::uint32_t i = first; i < n; ++i) {
      const Symbol prev = i == 0 ? spec.x0() : path[i - 1];
      ++pairs[pair_row(k, prev, path[i])];
    }
  }

  // Keys per member, classes sorted by key.
  const std::size_t member_total = index.member_multiplicity_.size();
  std::vector<std::vector<std::int64_t>> member_keys(member_total);
  for (std::size_t m = 0; m < member_total; ++m) {
    member_keys[m] = cuboid_index_of(grid, suffstat_of_pairs(spec, index.member_pairs(m), n));
  }
  std::map<std::vector<std::int64_t>, std::size_t> class_ids;
  for (const auto& key : member_keys) class_ids.emplace(key, 0);
  std::size_t next = 0;
  for (auto& [key, id] : class_ids) {
    id = next++;
    index.keys_.insert(index.keys_.end(), key.begin(), key.end());
  }
  index.class_sizes_.assign(class_ids.size(), 0);
  index.member_class_.resize(member_total);
  for (std::size_t m = 0; m < member_total; ++m) {
    const std::size_t cls = class_ids.at(member_keys[m]);
    index.member_class_[m] = cls;
    index.class_sizes_[cls] += index.member_multiplicity_[m];
  }

  index.order_.resize(index.class_sizes_.size());
  std::iota(index.order_.begin(), index.order_.end(), std::size_t{0});
  std::stable_sort(index.order_.begin(), index.order_.end(), [&](std::size_t a, std::size_t b) {
    return index.class_sizes_[a] < index.class_sizes_[b];
  });
  std::vector<std::size_t> position(index.order_.size());
  index.offsets_.assign(index.order_.size() + 1, 0);
  for (std::size_t pos = 0; pos < index.order_.size(); ++pos) {
    position[index.order_[pos]] = pos;
    index.offsets_[pos + 1] = index.offsets_[pos] + index.class_sizes_[index.order_[pos]];
  }

  std::vector<std::uint64_t> cursor(index.offsets_.begin(), index.offsets_.end() - 1);
  index.rank_of_path_.resize(total);
  index.path_of_rank_.resize(total);
  for (std::uint64_t number = 0; number < total; ++number) {
    const std::size_t cls = index.member_class_[index.member_of_path_[number]];
    const std::uint64_t rank = cursor[position[cls]]++;
    index.rank_of_path_[number] = rank;
    index.path_of_rank_[rank] = number;
  }
  return index;
}

std::span<const std::int64_t> MarkovTypeIndex::key(std::size_t cls) const {
  return {keys_.data() + cls * spec_.dim(), spec_.dim()};
}

std::span<const std::uint32_t> MarkovTypeIndex::member_pairs(std::size_t m) const {
  const std::size_t width = spec_.alphabet_size() * spec_.alphabet_size();
  return {member_pairs_.data() + m * width, width};
}

std::uint64_t MarkovTypeIndex::path_number(std::span<const Symbol> seq) const {
  if (seq.size() != n()) {
    throw DomainError("path length " + std::to_string(seq.size()) + " does not match n = " + std::to_string(n()));
  }
  const std::uint64_t k = spec_.alphabet_size();
  std::uint64_t number = 0;
  for (Symbol x : seq) {
    if (x < 1 || x > k) throw DomainError("symbol out of range: " + std::to_string(x));
    number = number * k + (x - 1);
  }
  return number;
}

Sequence MarkovTypeIndex::path_of_number(std::uint64_t number) const {
  const std::uint64_t k = spec_.alphabet_size();
  Sequence seq(n());
  for (std::uint32_t i = n(); i-- > 0;) {
    seq[i] = static_cast<Symbol>(number % k + 1);
    number /= k;
  }
  return seq;
}

std::size_t MarkovTypeIndex::class_of_path(std::uint64_t number) const {
  return member_class_[member_of_path_[number]];
}

std::vector<MarkovSizeEstimate> markov_size_estimates(const MarkovFamilySpec& spec, const Grid& grid,
                                                      std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("Monte Carlo size estimate needs at least one sample");
  if (grid.dim() != spec.dim()) throw DomainError("grid dimension does not match the Markov family");
  const std::size_t k = spec.alphabet_size();
  SplitMix64 rng(seed);
  std::map<std::vector<std::int64_t>, std::uint64_t> hits;
  std::vector<std::uint32_t> pairs(k * k);
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::fill(pairs.begin(), pairs.end(), 0);
    Symbol prev = spec.x0();
    for (std::uint32_t i = 0; i < grid.n; ++i) {
      const auto x = static_cast<Symbol>(rng.next() % k + 1);
      ++pairs[pair_row(k, prev, x)];
      prev = x;
    }
    ++hits[cuboid_index_of(grid, suffstat_of_pairs(spec, pairs, grid.n))];
  }
  const double paths = std::pow(static_cast<double>(k), static_cast<double>(grid.n));
  const double count = static_cast<double>(samples);
  std::vector<MarkovSizeEstimate> out;
  for (const auto& [key, h] : hits) {
    const double fraction = static_cast<double>(h) / count;
    out.push_back(MarkovSizeEstimate{key, paths * fraction,
                                     paths * std::sqrt(fraction * (1.0 - fraction) / count), h});
  }
  return out;
}

BigInt MarkovCodec::rank(std::span<const Symbol> seq) const {
  const std::uint64_t r = index_->rank_of_path(index_->path_number(seq));
  return BigInt(std::to_string(r));
}

Sequence MarkovCodec::unrank(const BigInt& k) const {
  if (k < 0 || k >= BigInt(std::to_string(index_->path_count()))) throw DomainError("rank outside [0, |X|^n)");
  const auto r = static_cast<std::uint64_t>(k.get_ui());
  return index_->path_of_number(index_->path_of_rank(r));
}

Codeword MarkovCodec::encode(std::span<const Symbol> seq) const { return string_of_index(rank(seq)); }

Sequence MarkovCodec::decode(const Codeword& word) const {
  const BigInt k = index_of_string(word);
  if (k >= BigInt(std::to_string(index_->path_count()))) {
    throw CorruptInputError("codeword index " + to_decimal(k) + " is not below |X|^n = " +
                            std::to_string(index_->path_count()));
  }
  return unrank(k);
}

RankedProfile markov_ranked_profile(const MarkovTypeIndex& index, const Eigen::VectorXd& theta) {
  const MarkovFamilySpec& spec = index.family();
  const Eigen::MatrixXd P = transition_matrix(spec, theta);
  const std::size_t k = spec.alphabet_size();
  std::vector<double> log_p(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      log_p[a * k + b] = std::log2(P(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    }
  }
  std::vector<double> member_log_prob(index.member_count());
  std::vector<CompensatedSum> masses(index.class_count());
  for (std::size_t m = 0; m < index.member_count(); ++m) {
    const auto pairs = index.member_pairs(m);
    double lp = 0.0;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      if (pairs[r] != 0) lp += pairs[r] * log_p[r];
    }
    member_log_prob[m] = lp;
    masses[index.member_class(m)].add(static_cast<double>(index.member_multiplicity(m)) * std::exp2(lp));
  }

  // Tail masses by rank: probability of each path in codec order, summed from the end.
  auto suffix = std::make_shared<std::vector<double>>(index.path_count() + 1, 0.0);
  CompensatedSum acc;
  for (std::uint64_t rank = index.path_count(); rank-- > 0;) {
    const std::uint64_t number = index.path_of_rank(rank);
    const Sequence path = index.path_of_number(number);
    double lp = 0.0;
    Symbol prev = spec.x0();
    for (Symbol x : path) {
      lp += log_p[pair_row(k, prev, x)];
      prev = x;
    }
    acc.add(std::exp2(lp));
    (*suffix)[rank] = acc.value();
  }

  RankedProfile profile;
  profile.n = index.n();
  profile.mode = PartitionMode::markov;
  profile.total = BigInt(std::to_string(index.path_count()));
  for (std::size_t pos = 0; pos < index.class_count(); ++pos) {
    const std::size_t cls = index.class_at(pos);
    profile.sizes.push_back(BigInt(std::to_string(index.class_size(cls))));
    profile.masses.push_back(masses[cls].value());
  }
  profile.tail = [suffix](const BigInt& rank) {
    if (rank < 0) return (*suffix)[0];
    if (rank >= BigInt(std::to_string(suffix->size() - 1))) return 0.0;
    return (*suffix)[rank.get_ui()];
  };
  return profile;
}

RateReport markov_eps_rate(const MarkovTypeIndex& index, const Eigen::VectorXd& theta, double epsilon) {
  return rate_from_profile(markov_ranked_profile(index, theta), epsilon);
}

ThirdOrderFit markov_third_order_fit(const MarkovFamilySpec& spec, const Eigen::VectorXd& theta,
                                     double s, const std::vector<std::uint32_t>& n_list,
                                     double epsilon, const PathBudget& budget) {
  if (n_list.size() < 3) throw DomainError("third-order fit needs at least 3 blocklengths");
  if (!std::is_sorted(n_list.begin(), n_list.end(), std::less_equal<>())) {
    throw DomainError("blocklength list must be strictly increasing");
  }
  std::vector<FitPoint> points;
  for (std::uint32_t n : n_list) {
    const MarkovTypeIndex index = MarkovTypeIndex::exhaustive(spec, make_grid(spec.dim(), n, s), budget);
    const RateReport report = markov_eps_rate(index, theta, epsilon);
    points.push_back(FitPoint{n, report.rate, report.closed_form_rate, 0.0});
  }
  const Eigen::MatrixXd P = transition_matrix(spec, theta);
  return fit_third_order(std::move(points), entropy_rate(P), std::sqrt(varentropy_rate(P)), epsilon);
}

}  // namespace typesize
