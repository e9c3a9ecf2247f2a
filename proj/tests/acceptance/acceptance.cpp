// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "typesize/codec.hpp"
#include "typesize/composition.hpp"
#include "typesize/expofam.hpp"
#include "typesize/markov.hpp"
#include "typesize/point_types.hpp"
#include "typesize/quantized_types.hpp"
#include "typesize/random.hpp"
#include "typesize/rate_analysis.hpp"

using namespace typesize;

namespace {

using Clock = std::chrono::steady_clock;

FamilySpec make_family(std::initializer_list<std::initializer_list<double>> rows, double rho) {
  Eigen::MatrixXd tau(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) tau(i, j++) = v;
    ++i;
  }
  return FamilySpec(tau, rho);
}

FamilySpec bernoulli() { return make_family({{0}, {1}}, 8.0); }
FamilySpec ternary() { return make_family({{0, 0}, {1, 0}, {0, 1}}, 8.0); }
FamilySpec sqrt2_family() { return make_family({{0}, {1}, {std::sqrt(2.0)}}, 8.0); }

ExactStatMap sqrt2_map() {
  ExactStatMap map;
  map.basis = {{BasisElement{"1", 1.0}, BasisElement{"sqrt2", std::sqrt(2.0)}}};
  map.coeffs = {{{Rational(0), Rational(0)}}, {{Rational(1), Rational(0)}}, {{Rational(0), Rational(1)}}};
  return map;
}

ExactStatMap rational_map(const FamilySpec& spec) {
  std::vector<std::vector<Rational>> rows;
  for (Eigen::Index x = 0; x < spec.tau().rows(); ++x) {
    std::vector<Rational> row;
    for (Eigen::Index j = 0; j < spec.tau().cols(); ++j) row.emplace_back(spec.tau()(x, j));
    rows.push_back(row);
  }
  return rational_stat_map(rows);
}

MarkovFamilySpec flip_family() {
  Eigen::MatrixXd tau2(4, 1);
  tau2 << 0, 1, 1, 0;
  return MarkovFamilySpec(2, tau2, 4.0, 1);
}

MarkovFamilySpec cyclic3_family() {
  Eigen::MatrixXd tau2(9, 2);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int step = ((b - a) % 3 + 3) % 3;
      tau2(a * 3 + b, 0) = step == 1 ? 1.0 : 0.0;
      tau2(a * 3 + b, 1) = step == 2 ? 1.0 : 0.0;
    }
  }
  return MarkovFamilySpec(3, tau2, 4.0, 1);
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Calls f on every sequence of length n over {1..k}, lexicographically.
void for_each_sequence(std::size_t k, std::uint32_t n, const std::function<void(const Sequence&)>& f) {
  Sequence seq(n, 1);
  while (true) {
    f(seq);
    std::uint32_t pos = n;
    while (pos > 0 && seq[pos - 1] == k) --pos;
    if (pos == 0) return;
    ++seq[pos - 1];
    for (std::uint32_t i = pos; i < n; ++i) seq[i] = 1;
  }
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("AC%d %s  %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Round trips and rank uniqueness over all of X^n.
template <class Codec>
std::uint64_t bijection_failures(const Codec& codec, std::size_t k, std::uint32_t n) {
  std::vector<char> seen(power(k, n).get_ui(), 0);
  std::uint64_t bad = 0;
  for_each_sequence(k, n, [&](const Sequence& seq) {
    const BigInt r = codec.rank(seq);
    if (r < 0 || r >= BigInt(static_cast<unsigned long>(seen.size())) || seen[r.get_ui()]) {
      ++bad;
      return;
    }
    seen[r.get_ui()] = 1;
    const Codeword w = codec.encode(seq);
    if (w.length() + 1 != bit_length(BigInt(r + 1)) || codec.decode(w) != seq) ++bad;
  });
  return bad;
}

Outcome ac1() {
  std::uint64_t checked = 0, bad = 0;
  auto iid = [&](const FamilySpec& spec, std::uint32_t max_n, bool point, const ExactStatMap* map) {
    for (std::uint32_t n = 1; n <= max_n; ++n) {
      auto index = std::make_shared<const TypeIndex>(point ? point_type_index(spec, derive_lattice(spec, *map), n)
                                                           : build_type_index(spec, make_grid(spec.dim(), n, 1.0)));
      bad += bijection_failures(TypeSizeCodec(index), spec.alphabet_size(), n);
      checked += power(spec.alphabet_size(), n).get_ui();
    }
  };
  const auto b = bernoulli(), t = ternary(), r = sqrt2_family();
  const auto bm = rational_map(b), tm = rational_map(t), rm = sqrt2_map();
  iid(b, 12, false, nullptr);
  iid(t, 8, false, nullptr);
  iid(r, 8, false, nullptr);
  iid(b, 12, true, &bm);
  iid(t, 8, true, &tm);
  iid(r, 8, true, &rm);
  const auto flip = flip_family();
  for (std::uint32_t n = 1; n <= 12; ++n) {
    const MarkovCodec codec(std::make_shared<const MarkovTypeIndex>(
        MarkovTypeIndex::exhaustive(flip, make_grid(1, n, 1.0))));
    bad += bijection_failures(codec, 2, n);
    checked += 1ull << n;
  }
  return {bad == 0, format("%llu sequences round-tripped, %llu failures", (unsigned long long)checked,
                           (unsigned long long)bad)};
}

Outcome ac2() {
  struct Case {
    FamilySpec spec;
    Eigen::VectorXd theta;
    bool point;
    std::uint32_t max_n;
  };
  const std::vector<Case> cases = {
      {bernoulli(), vec({std::log2(3.0 / 7.0)}), false, 10},
      {ternary(), vec({0.4, -0.9}), false, 10},
      {sqrt2_family(), vec({1.0}), true, 10},
  };
  std::uint64_t compared = 0, mismatches = 0, closed_form_off = 0;
  int closed_form_max = 0;
  for (const auto& c : cases) {
    const SourceSpec src{c.spec, ParamVector(c.spec, c.theta)};
    const auto lmap = c.point ? std::optional<LatticeMap>(derive_lattice(c.spec, sqrt2_map())) : std::nullopt;
    for (std::uint32_t n = 1; n <= c.max_n; ++n) {
      auto index = std::make_shared<const TypeIndex>(c.point ? point_type_index(c.spec, *lmap, n)
                                                             : build_type_index(c.spec, make_grid(c.spec.dim(), n, 1.0)));
      const TypeSizeCodec codec(index);
      std::map<std::size_t, CompensatedSum> by_length;
      for_each_sequence(c.spec.alphabet_size(), n, [&](const Sequence& seq) {
        by_length[codec.encode(seq).length()].add(std::exp2(seq_log_prob(c.spec, src.theta_star, seq)));
      });
      for (int e = 1; e <= 99; ++e) {
        const double eps = e / 100.0;
        std::uint32_t k = 0;
        while (true) {
          double tail = 0.0;
          for (const auto& [len, mass] : by_length) {
            if (len >= k) tail += mass.value();
          }
          if (tail <= eps + kMassTolerance) break;
          ++k;
        }
        const RateReport r = m_eps(src, *index, eps);
        ++compared;
        if (std::lround(r.rate * n) != static_cast<long>(k)) ++mismatches;
        const int gap = static_cast<int>(std::lround(r.closed_form_rate * n)) - static_cast<int>(k);
        if (gap != 0) ++closed_form_off;
        closed_form_max = std::max(closed_form_max, std::abs(gap));
      }
    }
  }
  return {mismatches == 0,
          format("%llu (family, n, eps) cases, %llu mismatches; closed form ceil(log2 M) off in %llu cases, max %d bit",
                 (unsigned long long)compared, (unsigned long long)mismatches, (unsigned long long)closed_form_off,
                 closed_form_max)};
}

const std::vector<std::uint32_t> kSlopeGrid = {16, 32, 64, 128, 256, 512, 1024};

Outcome ac3() {
  const auto spec = bernoulli();
  const SourceSpec src{spec, ParamVector(spec, vec({std::log2(0.3 / 0.7)}))};
  const ThirdOrderFit fit = third_order_fit(src, IndexConfig{}, kSlopeGrid, 0.1);
  return {std::abs(fit.slope + 0.5) <= 0.2, format("slope %.4f, target -0.5 +- 0.2", fit.slope)};
}

Outcome ac4() {
  const auto spec = sqrt2_family();
  const SourceSpec src{spec, ParamVector(spec, vec({1.0}))};
  IndexConfig point;
  point.mode = PartitionMode::point;
  point.lattice = derive_lattice(spec, sqrt2_map());
  const ThirdOrderFit p = third_order_fit(src, point, kSlopeGrid, 0.1);
  const ThirdOrderFit q = third_order_fit(src, IndexConfig{}, kSlopeGrid, 0.1);
  const bool ok = std::abs(p.slope) <= 0.2 && std::abs(q.slope + 0.5) <= 0.2 && p.slope - q.slope >= 0.3;
  return {ok, format("point slope %.4f (0 +- 0.2), quantized slope %.4f (-0.5 +- 0.2), gap %.4f (>= 0.3)", p.slope,
                     q.slope, p.slope - q.slope)};
}

Outcome ac5() {
  std::size_t compositions = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const auto& spec : {bernoulli(), ternary()}) {
    for (double s : {0.5, 1.0, 2.0}) {
      for (std::uint32_t n : {8u, 16u, 32u, 64u}) {
        const MlApproxReport r = ml_approx_check(spec, make_grid(spec.dim(), n, s));
        compositions += r.compositions;
        violations += r.violations;
        worst_ratio = std::max(worst_ratio, r.max_gap / r.bound);
      }
    }
  }
  return {violations == 0, format("%zu compositions, %zu violations, largest gap / (2 kappa s) = %.4f", compositions,
                                  violations, worst_ratio)};
}

// max over compositions of |log2|T| - r| and the violation count against `limit`.
std::pair<double, std::size_t> sandwich(const FamilySpec& spec, double s, std::uint32_t n, double limit) {
  const Grid grid = make_grid(spec.dim(), n, s);
  const TypeIndex index = build_type_index(spec, grid);
  double worst = 0.0;
  std::size_t bad = 0;
  for (std::size_t c = 0; c < index.class_count(); ++c) {
    const double log_size = log2(index.type_class(c).size);
    for (std::size_t j = 0; j < index.type_class(c).count; ++j) {
      const double dev = std::abs(log_size - r_of_counts(spec, grid, index.member(c, j)));
      worst = std::max(worst, dev);
      if (dev > limit + 1e-9) ++bad;
    }
  }
  return {worst, bad};
}

Outcome ac6() {
  std::size_t bad = 0;
  std::string detail;
  for (const auto& [name, spec] : {std::pair{"bernoulli", bernoulli()}, std::pair{"ternary", ternary()}}) {
    for (double s : {0.5, 1.0, 2.0}) {
      const double bound = 2 * spec.kappa() * s;
      const double c_star = std::max(0.0, sandwich(spec, s, 8, INFINITY).first - bound);
      double worst = 0.0;
      for (std::uint32_t n : {16u, 32u, 64u}) {
        const auto [w, v] = sandwich(spec, s, n, bound + c_star);
        worst = std::max(worst, w);
        bad += v;
      }
      detail += format("%s s=%g: C*=%.3f max %.3f <= %.3f; ", name, s, c_star, worst, bound + c_star);
    }
  }
  return {bad == 0, format("%zu violations; ", bad) + detail};
}

Outcome ac7() {
  const auto spec = bernoulli();
  const SourceSpec src{spec, ParamVector(spec, vec({std::log2(0.3 / 0.7)}))};
  constexpr std::uint64_t kSamples = 100'000, kSeed = 20240611;
  const double a = normality_check(src, 64, kSamples, kSeed) * 8.0;
  const bool reproducible = normality_check(src, 64, kSamples, kSeed) * 8.0 == a;
  bool ok = reproducible;
  std::string detail = format("A(64) = %.4f; ", a);
  for (std::uint32_t n : {256u, 1024u}) {
    const double scaled = normality_check(src, n, kSamples, kSeed) * std::sqrt(static_cast<double>(n));
    ok = ok && scaled <= 1.5 * a;
    detail += format("n=%u: %.4f (limit %.4f); ", n, scaled, 1.5 * a);
  }
  detail += reproducible ? "seed reproduces bit-for-bit" : "seed NOT reproducible";
  return {ok, detail};
}

Outcome ac8() {
  SplitMix64 rng(8);
  double fd_err = 0.0, stat_err = 0.0, ent_err = 0.0;
  bool partitions = true;
  const std::vector<FamilySpec> families = {make_family({{0}, {1}}, 3.0), make_family({{0, 0}, {1, 0}, {0, 1}}, 5.0),
                                            make_family({{0}, {1}, {std::sqrt(2.0)}}, 4.0),
                                            make_family({{0, 1}, {1, 0.5}, {-1, 2}, {0.3, -0.7}}, 2.0)};
  for (const auto& spec : families) {
    const auto d = static_cast<Eigen::Index>(spec.dim());
    for (int i = 0; i < 200; ++i) {
      Eigen::VectorXd t(d);
      for (auto& v : t) v = 2 * rng.uniform() - 1;
      t *= (spec.rho_max() - 0.1) * rng.uniform() / t.norm();
      const ModelEval ev = evaluate(spec, t);
      const double h = 1e-5;
      for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::VectorXd up = t, down = t;
        up[j] += h;
        down[j] -= h;
        const ModelEval eu = evaluate(spec, up), ed = evaluate(spec, down);
        fd_err = std::max(fd_err, std::abs((eu.psi - ed.psi) / (2 * h) - ev.grad_psi[j]));
        fd_err = std::max(fd_err, ((eu.grad_psi - ed.grad_psi) / (2 * h) - ev.hess_psi.col(j)).cwiseAbs().maxCoeff());
      }
      const double direct = -(ev.pmf.array() * ev.pmf.array().log2()).sum();
      ent_err = std::max(ent_err, std::abs(entropy(spec, ParamVector(spec, t)) - direct));
      partitions = partitions && std::abs(ev.pmf.sum() - 1.0) <= 1e-12;

      Eigen::VectorXd w(static_cast<Eigen::Index>(spec.alphabet_size()));
      for (auto& v : w) v = 0.05 + rng.uniform();
      w /= w.sum();
      const Eigen::VectorXd target = spec.tau().transpose() * w;
      const ModelEval at = evaluate(spec, mle(spec, target).values());
      // Only targets whose optimum lies strictly inside the ball are stationary points.
      if (at.theta.norm() < spec.rho_max() * (1 - 1e-9)) {
        stat_err = std::max(stat_err, (at.grad_psi - target).cwiseAbs().maxCoeff());
      }
    }
    for (std::uint32_t n : {1u, 5u, 17u}) {
      const TypeIndex index = build_type_index(spec, make_grid(spec.dim(), n, 0.7));
      partitions = partitions && index.total_size() == power(spec.alphabet_size(), n);
      BigInt sum = 0;
      for_each_composition(spec.alphabet_size(), n, [&](std::span<const std::uint32_t> c) { sum += multinomial(c); });
      partitions = partitions && sum == power(spec.alphabet_size(), n);
    }
  }
  const bool ok = fd_err <= 1e-6 && stat_err <= 1e-9 && ent_err <= 1e-12 && partitions;
  return {ok, format("finite differences %.2e (<= 1e-6), MLE stationarity %.2e (<= 1e-9), entropy %.2e (<= 1e-12), "
                     "partition identities %s",
                     fd_err, stat_err, ent_err, partitions ? "exact" : "BROKEN")};
}

// Exact mean and variance of -log2 P(path) over every path from x0.
std::pair<double, double> path_moments(const Eigen::MatrixXd& P, Symbol x0, std::uint32_t n) {
  CompensatedSum mean, second;
  for_each_sequence(static_cast<std::size_t>(P.rows()), n, [&](const Sequence& seq) {
    double lp = 0.0;
    Symbol prev = x0;
    for (Symbol x : seq) {
      lp += std::log2(P(prev - 1, x - 1));
      prev = x;
    }
    const double p = std::exp2(lp);
    mean.add(-p * lp);
    second.add(p * lp * lp);
  });
  return {mean.value(), second.value() - mean.value() * mean.value()};
}

Outcome ac9() {
  bool ok = true;
  std::string detail;
  struct Case {
    const char* name;
    MarkovFamilySpec spec;
    Eigen::VectorXd theta;
    std::uint32_t n_lo, n_hi;
  };
  const std::vector<Case> cases = {{"flip", flip_family(), vec({1.0}), 12, 14},
                                   {"cyclic3", cyclic3_family(), vec({1.0, -0.5}), 10, 12}};
  for (const auto& c : cases) {
    const Eigen::MatrixXd P = transition_matrix(c.spec, c.theta);
    const double h = entropy_rate(P), v = varentropy_rate(P);
    const auto [m12, v12] = path_moments(P, c.spec.x0(), 12);
    const auto [m_lo, v_lo] = path_moments(P, c.spec.x0(), c.n_lo);
    const auto [m_hi, v_hi] = path_moments(P, c.spec.x0(), c.n_hi);
    // Var/n = sigma^2 + a/n: two blocklengths eliminate a.
    const double extrapolated = (v_hi - v_lo) / (c.n_hi - c.n_lo);
    const double h_err = std::abs(m12 / 12 - h);
    const double v_rel = std::abs(extrapolated / v - 1);
    ok = ok && h_err <= 0.02 && v_rel <= 0.02;
    detail += format("%s: |H - E/12| = %.4f, varentropy rel. error %.4f; ", c.name, h_err, v_rel);

    const MarkovTypeIndex index = MarkovTypeIndex::exhaustive(c.spec, make_grid(c.spec.dim(), 12, 1.0));
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < index.class_count(); ++k) total += index.class_size(k);
    const auto paths = static_cast<std::uint64_t>(std::pow(c.spec.alphabet_size(), 12));
    const MarkovCodec codec(std::make_shared<const MarkovTypeIndex>(index));
    const std::uint64_t bad = bijection_failures(codec, c.spec.alphabet_size(), 12);
    ok = ok && total == paths && bad == 0;
    detail += format("partition %s, %llu round-trip failures; ", total == paths ? "exact" : "BROKEN",
                     (unsigned long long)bad);
  }
  return {ok, detail};
}

void markov_slope_diagnostic() {
  const auto flip = flip_family();
  const ThirdOrderFit f = markov_third_order_fit(flip, vec({1.0}), 1.0, {8, 10, 12, 14, 16, 18, 20}, 0.1);
  const auto cyc = cyclic3_family();
  const ThirdOrderFit g = markov_third_order_fit(cyc, vec({1.0, -0.5}), 1.0, {6, 7, 8, 9, 10, 11, 12, 13}, 0.1);
  std::printf("diagnostic  Markov third-order slopes (not gated): flip d=1 %.3f (expect -0.5), cyclic3 d=2 %.3f "
              "(expect 0)\n",
              f.slope, g.slope);
}

}  // namespace

int main() {
  report(1, "codec bijectivity", ac1);
  report(2, "epsilon-rate oracle equivalence", ac2);
  report(3, "quantized third-order slope", ac3);
  report(4, "point vs quantized separation", ac4);
  report(5, "ML approximation bound", ac5);
  report(6, "uniform sandwich", ac6);
  report(7, "normality of information", ac7);
  report(8, "exponential-family numerics", ac8);
  report(9, "Markov rates, partition and round trip", ac9);
  try {
    markov_slope_diagnostic();
  } catch (const std::exception& e) {
    std::printf("diagnostic  Markov slopes failed: %s\n", e.what());
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
