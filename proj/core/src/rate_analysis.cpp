#include "typesize/rate_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include "typesize/composition.hpp"
#include "typesize/errors.hpp"
#include "typesize/quantized_types.hpp"
#include "typesize/random.hpp"

namespace typesize {

namespace {

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    std::ostringstream msg;
    msg << "epsilon must lie in (0, 1), got " << epsilon;
    throw DomainError(msg.str());
  }
}

// log2 p_theta(x) per symbol.
Eigen::VectorXd symbol_log_probs(const SourceSpec& source) {
  const ModelEval ev = evaluate(source.family, source.theta_star.values());
  return (source.family.tau() * source.theta_star.values()).array() - ev.psi;
}

double member_log_prob(const Eigen::VectorXd& log_p, std::span<const std::uint32_t> counts) {
  double total = 0.0;
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] != 0) total += static_cast<double>(counts[x]) * log_p[static_cast<Eigen::Index>(x)];
  }
  return total;
}

// Mass of ranks >= R for an i.i.d. index under a fixed model.
struct IidTail {
  const TypeIndex* index = nullptr;
  ClassOrdering ordering;
  Eigen::VectorXd log_p;
  std::vector<double> suffix;  // suffix[pos] = mass of classes at positions >= pos

  IidTail(const TypeIndex& idx, Eigen::VectorXd lp, const std::vector<double>& masses)
      : index(&idx), ordering(idx), log_p(std::move(lp)) {
    suffix.assign(ordering.size() + 1, 0.0);
    CompensatedSum acc;
    for (std::size_t pos = ordering.size(); pos-- > 0;) {
      acc.add(masses[ordering.class_at(pos)]);
      suffix[pos] = acc.value();
    }
  }

  double operator()(const BigInt& rank) const {
    if (rank >= ordering.total()) return 0.0;
    if (rank <= 0) return suffix[0];
    const std::size_t pos = ordering.position_of_rank(rank);
    const std::size_t cls = ordering.class_at(pos);
    BigInt rest = rank - ordering.offsets()[pos];
    CompensatedSum partial;
    bool started = false;
    for (std::size_t j = 0; j < index->type_class(cls).count; ++j) {
      const auto member = index->member(cls, j);
      const double lp = member_log_prob(log_p, member);
      if (started) {
        partial.add(std::exp2(index->member_log2_size(cls, j) + lp));
        continue;
      }
      const BigInt size = multinomial(member);
      if (rest >= size) {
        rest -= size;
        continue;
      }
      const BigInt remaining = size - rest;
      partial.add(std::exp2(log2(remaining) + lp));
      started = true;
    }
    partial.add(suffix[pos + 1]);
    return partial.value();
  }
};

std::uint64_t ceil_log2(const BigInt& m) {
  if (m <= 1) return 0;
  return bit_length(BigInt(m - 1));
}

}  // namespace

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

RateReport rate_from_profile(const RankedProfile& profile, double epsilon) {
  require_epsilon(epsilon);
  const std::size_t count = profile.sizes.size();
  RateReport report;
  report.n = profile.n;
  report.epsilon = epsilon;
  report.mode = profile.mode;

  std::vector<double> suffix(count + 1, 0.0);
  CompensatedSum acc;
  for (std::size_t pos = count; pos-- > 0;) {
    acc.add(profile.masses[pos]);
    suffix[pos] = acc.value();
  }
  // Thresholds on log|T| keep whole groups of equal size.
  BigInt kept = 0;
  std::size_t pos = 0;
  while (pos < count) {
    std::size_t end = pos;
    while (end < count && profile.sizes[end] == profile.sizes[pos]) {
      kept += profile.sizes[end];
      ++end;
    }
    pos = end;
    if (suffix[pos] <= epsilon + kMassTolerance) break;
  }
  report.M = kept;
  report.gamma = pos > 0 ? log2(profile.sizes[pos - 1]) / profile.n : 0.0;
  report.closed_form_rate = static_cast<double>(ceil_log2(kept)) / profile.n;

  // Length >= k  <=>  rank >= 2^k - 1.
  for (std::uint64_t k = 0;; ++k) {
    const BigInt threshold = power(2, k) - 1;
    if (threshold >= profile.total || profile.tail(threshold) <= epsilon + kMassTolerance) {
      report.rate = static_cast<double>(k) / profile.n;
      break;
    }
  }
  return report;
}

std::vector<double> class_masses(const SourceSpec& source, const TypeIndex& index) {
  if (!(source.family == index.family())) throw DomainError("index was built for another family");
  const Eigen::VectorXd log_p = symbol_log_probs(source);
  std::vector<double> masses(index.class_count());
  for (std::size_t i = 0; i < index.class_count(); ++i) {
    CompensatedSum mass;
    for (std::size_t j = 0; j < index.type_class(i).count; ++j) {
      mass.add(std::exp2(index.member_log2_size(i, j) + member_log_prob(log_p, index.member(i, j))));
    }
    masses[i] = mass.value();
  }
  return masses;
}

RankedProfile ranked_profile(const SourceSpec& source, const TypeIndex& index) {
  const std::vector<double> masses = class_masses(source, index);
  auto tail = std::make_shared<IidTail>(index, symbol_log_probs(source), masses);
  RankedProfile profile;
  profile.n = index.n();
  profile.mode = index.mode();
  profile.total = tail->ordering.total();
  for (std::size_t pos = 0; pos < tail->ordering.size(); ++pos) {
    const std::size_t cls = tail->ordering.class_at(pos);
    profile.sizes.push_back(index.type_class(cls).size);
    profile.masses.push_back(masses[cls]);
  }
  profile.tail = [tail](const BigInt& rank) { return (*tail)(rank); };
  return profile;
}

double overflow_prob(const SourceSpec& source, const TypeIndex& index, double gamma) {
  const std::vector<double> masses = class_masses(source, index);
  const double limit = static_cast<double>(index.n()) * gamma;
  CompensatedSum total;
  for (std::size_t i = 0; i < index.class_count(); ++i) {
    if (log2(index.type_class(i).size) > limit) total.add(masses[i]);
  }
  return std::clamp(total.value(), 0.0, 1.0);
}

RateReport m_eps(const SourceSpec& source, const TypeIndex& index, double epsilon) {
  require_epsilon(epsilon);
  return rate_from_profile(ranked_profile(source, index), epsilon);
}

double eps_rate(const SourceSpec& source, const TypeIndex& index, double epsilon) {
  return m_eps(source, index, epsilon).rate;
}

double gaussian_Q(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double gaussian_Qinv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "Qinv needs p in (0, 1), got " << p;
    throw DomainError(msg.str());
  }
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_Q(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double z = 0.5 * (lo + hi);
  const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 1e-300) {
    const double polished = z + (gaussian_Q(z) - p) / density;
    if (std::abs(gaussian_Q(polished) - p) < std::abs(gaussian_Q(z) - p)) z = polished;
  }
  return z;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least squares needs matching inputs of size >= 2");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("least squares needs at least two distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - fit.intercept - fit.slope * x[i]);
  return fit;
}

TypeIndex build_index(const FamilySpec& spec, const IndexConfig& config, std::uint32_t n) {
  switch (config.mode) {
    case PartitionMode::quantized: {
      const Grid grid = config.anchor ? make_grid(n, config.s, *config.anchor)
                                      : make_grid(spec.dim(), n, config.s);
      return TypeIndex::quantized(spec, grid, config.budget);
    }
    case PartitionMode::point:
      if (!config.lattice) throw DomainError("point mode needs a lattice map");
      return point_type_index(spec, *config.lattice, n, config.budget);
    case PartitionMode::markov:
      break;
  }
  throw DomainError("markov indexes are built by the markov module");
}

ThirdOrderFit fit_third_order(std::vector<FitPoint> points, double entropy, double sigma,
                              double epsilon) {
  if (points.size() < 3) throw DomainError("third-order fit needs at least 3 blocklengths");
  const double q = gaussian_Qinv(epsilon);
  std::vector<double> x, y;
  for (auto& p : points) {
    const double n = static_cast<double>(p.n);
    p.y = n * p.rate - n * entropy - sigma * std::sqrt(n) * q;
    x.push_back(std::log2(n));
    y.push_back(p.y);
  }
  const LinearFit fit = least_squares(x, y);
  ThirdOrderFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.entropy = entropy;
  out.dispersion = sigma;
  out.points = std::move(points);
  out.residuals = fit.residuals;
  return out;
}

ThirdOrderFit third_order_fit(const SourceSpec& source, const IndexConfig& config,
                              const std::vector<std::uint32_t>& n_list, double epsilon) {
  require_epsilon(epsilon);
  if (n_list.size() < 3) throw DomainError("third-order fit needs at least 3 blocklengths");
  if (!std::is_sorted(n_list.begin(), n_list.end(), std::less_equal<>())) {
    throw DomainError("blocklength list must be strictly increasing");
  }
  // Blocklengths are independent; results are merged in list order.
  std::vector<std::future<FitPoint>> pending;
  for (std::uint32_t n : n_list) {
    pending.push_back(std::async(std::launch::async, [&source, &config, n, epsilon] {
      const TypeIndex index = build_index(source.family, config, n);
      const RateReport report = m_eps(source, index, epsilon);
      return FitPoint{n, report.rate, report.closed_form_rate, 0.0};
    }));
  }
  std::vector<FitPoint> points;
  for (auto& f : pending) points.push_back(f.get());
  return fit_third_order(std::move(points), entropy(source.family, source.theta_star),
                         std::sqrt(varentropy(source.family, source.theta_star)), epsilon);
}

double normality_check(const SourceSpec& source, std::uint32_t n, std::uint64_t samples,
                       std::uint64_t seed) {
  if (samples < 10'000) throw DomainError("normality check needs at least 10^4 samples");
  if (n < 1) throw DomainError("blocklength must be at least 1");
  const double h = entropy(source.family, source.theta_star);
  const double var = varentropy(source.family, source.theta_star);
  if (!(var > 1e-24)) throw DomainError("varentropy is zero; the normalized information is degenerate");
  const double scale = std::sqrt(static_cast<double>(n) * var);

  const Eigen::VectorXd p = pmf(source.family, source.theta_star);
  std::vector<double> cumulative(static_cast<std::size_t>(p.size()));
  double running = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    running += p[x];
    cumulative[static_cast<std::size_t>(x)] = running;
  }

  SplitMix64 rng(seed);
  std::map<Counts, double> cache;
  std::vector<double> z(samples);
  Counts counts(source.family.alphabet_size());
  for (std::uint64_t i = 0; i < samples; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint32_t t = 0; t < n; ++t) ++counts[rng.categorical(cumulative)];
    auto it = cache.find(counts);
    if (it == cache.end()) {
      const double info = static_cast<double>(n) * neg_log_ml(source.family, suffstat_of_counts(source.family, counts));
      it = cache.emplace(counts, info).first;
    }
    z[i] = (it->second - static_cast<double>(n) * h) / scale;
  }
  std::sort(z.begin(), z.end());
  double sup = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double point = -3.0 + 0.01 * i;
    const auto above = z.end() - std::upper_bound(z.begin(), z.end(), point);
    const double tail = static_cast<double>(above) / static_cast<double>(samples);
    sup = std::max(sup, std::abs(tail - gaussian_Q(point)));
  }
  return sup;
}

MlApproxReport ml_approx_check(const FamilySpec& spec, const Grid& grid,
                               const EnumerationBudget& budget) {
  check_composition_budget(spec.alphabet_size(), grid.n, budget);
  MleOptions options;
  options.require_in_hull = false;
  MlApproxReport report;
  report.bound = 2.0 * spec.kappa() * grid.s;
  report.max_gap = -std::numeric_limits<double>::infinity();
  report.min_gap = std::numeric_limits<double>::infinity();
  for_each_composition(spec.alphabet_size(), grid.n, [&](std::span<const std::uint32_t> counts) {
    const Eigen::VectorXd tau = suffstat_of_counts(spec, counts);
    const ParamVector theta = mle(spec, tau, options);
    const ParamVector theta_c = mle(spec, cuboid_center_of(grid, tau), options);
    const double gap = counts_log_prob(spec, theta.values(), counts) -
                       counts_log_prob(spec, theta_c.values(), counts);
    report.max_gap = std::max(report.max_gap, gap);
    report.min_gap = std::min(report.min_gap, gap);
    ++report.compositions;
    if (gap < -1e-9 || gap > report.bound + 1e-9) ++report.violations;
  });
  return report;
}

}  // namespace typesize
