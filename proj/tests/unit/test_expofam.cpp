#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "typesize/errors.hpp"
#include "typesize/expofam.hpp"
#include "typesize/random.hpp"

using namespace typesize;
using fixtures::vec;

namespace {

Eigen::VectorXd random_theta(SplitMix64& rng, std::size_t d, double rho) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(d));
  for (auto& v : t) v = 2.0 * rng.uniform() - 1.0;
  return t * (rho * rng.uniform() / t.norm());
}

}  // namespace

TEST(ExpoFam, PsiAtZeroIsLogAlphabet) {
  const auto spec = fixtures::ternary();
  EXPECT_NEAR(psi(spec, ParamVector::zero(spec)), std::log2(3.0), 1e-15);
  const auto bern = fixtures::bernoulli();
  const auto p = pmf(bern, ParamVector::zero(bern));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(ExpoFam, BernoulliAtOne) {
  const auto spec = fixtures::bernoulli();
  const ParamVector one(spec, vec({1.0}));
  EXPECT_NEAR(psi(spec, one), 1.584962500721156, 1e-14);
  const Sequence x{2, 2};
  EXPECT_NEAR(seq_log_prob(spec, one, x), -1.1699250014423122, 1e-14);
  EXPECT_NEAR(entropy(spec, one), 0.9182958340544896, 1e-14);
  EXPECT_NEAR(varentropy(spec, one), 0.2222222222222222, 1e-14);
}

TEST(ExpoFam, UniformSequenceProbability) {
  const auto spec = fixtures::bernoulli();
  const Sequence x{1, 2, 1, 2};
  EXPECT_DOUBLE_EQ(seq_log_prob(spec, ParamVector::zero(spec), x), -4.0);
  EXPECT_DOUBLE_EQ(suffstat(spec, x)[0], 0.5);
}

TEST(ExpoFam, SuffstatIsRowAverage) {
  const auto spec = fixtures::ternary();
  const Sequence x{1, 2, 3};
  const auto t = suffstat(spec, x);
  EXPECT_NEAR(t[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t[1], 1.0 / 3.0, 1e-15);
  const Sequence ones{1, 1, 1, 1};
  EXPECT_EQ(suffstat(spec, ones), spec.tau_of(1));
}

TEST(ExpoFam, Errors) {
  const auto spec = fixtures::bernoulli();
  EXPECT_THROW(suffstat(spec, Sequence{}), DomainError);
  EXPECT_THROW(seq_log_prob(spec, ParamVector::zero(spec), Sequence{}), DomainError);
  EXPECT_THROW(suffstat(spec, Sequence{1, 3}), DomainError);
  EXPECT_THROW(ParamVector(spec, vec({1.0, 2.0})), SpecError);
  EXPECT_THROW(ParamVector(spec, vec({9.0})), DomainError);
  Eigen::MatrixXd dependent(3, 2);
  dependent << 0, 0, 1, 1, 2, 2;
  EXPECT_THROW(FamilySpec(dependent, 1.0), SpecError);
  Eigen::MatrixXd ok(2, 1);
  ok << 0, 1;
  EXPECT_THROW(FamilySpec(ok, 0.0), SpecError);
  EXPECT_THROW(FamilySpec(ok, INFINITY), SpecError);
}

TEST(ExpoFam, NormalizationAndIdentities) {
  SplitMix64 rng(11);
  for (const auto& spec : {fixtures::bernoulli(3.0), fixtures::ternary(5.0), fixtures::sqrt2_family(4.0)}) {
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd t = random_theta(rng, spec.dim(), spec.rho_max());
      const ModelEval ev = evaluate(spec, t);
      EXPECT_NEAR(ev.pmf.sum(), 1.0, 1e-12);
      EXPECT_TRUE(ev.grad_psi.isApprox(spec.tau().transpose() * ev.pmf, 1e-10));
      // Base-2 psi: Hessian = ln2 * Cov.
      EXPECT_LE((ev.hess_psi - std::log(2.0) * ev.cov_tau).cwiseAbs().maxCoeff(), 1e-8);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ev.hess_psi);
      EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);

      const ParamVector theta(spec, t);
      const double direct = -(ev.pmf.array() * ev.pmf.array().log2()).sum();
      EXPECT_NEAR(entropy(spec, theta), direct, 1e-12);
      const Eigen::ArrayXd info = -ev.pmf.array().log2();
      const double second = (ev.pmf.array() * info.square()).sum();
      EXPECT_NEAR(varentropy(spec, theta), second - direct * direct, 1e-12);
    }
  }
}

TEST(ExpoFam, GradientAndHessianFiniteDifferences) {
  SplitMix64 rng(12);
  const double h = 1e-5;
  for (const auto& spec : {fixtures::bernoulli(3.0), fixtures::ternary(5.0)}) {
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd t = random_theta(rng, spec.dim(), spec.rho_max() - 0.1);
      const ModelEval ev = evaluate(spec, t);
      for (Eigen::Index j = 0; j < t.size(); ++j) {
        Eigen::VectorXd up = t, down = t;
        up[j] += h;
        down[j] -= h;
        const ModelEval eu = evaluate(spec, up);
        const ModelEval ed = evaluate(spec, down);
        EXPECT_NEAR((eu.psi - ed.psi) / (2 * h), ev.grad_psi[j], 1e-6);
        const Eigen::VectorXd col = (eu.grad_psi - ed.grad_psi) / (2 * h);
        for (Eigen::Index r = 0; r < t.size(); ++r) EXPECT_NEAR(col[r], ev.hess_psi(r, j), 1e-6);
      }
    }
  }
}

TEST(ExpoFam, MleExamples) {
  const auto spec = fixtures::bernoulli(50.0);
  EXPECT_NEAR(mle(spec, vec({0.5}))[0], 0.0, 1e-10);
  EXPECT_NEAR(mle(spec, vec({2.0 / 3.0}))[0], 1.0, 1e-9);
  const auto clamped = fixtures::bernoulli(1.0);
  EXPECT_NEAR(mle(clamped, vec({0.999}))[0], 1.0, 1e-12);
  EXPECT_THROW(mle(spec, vec({1.5})), DomainError);
  const auto tern = fixtures::ternary(3.0);
  EXPECT_THROW(mle(tern, vec({0.8, 0.8})), DomainError);
  // Hull vertex: the ball constraint makes the answer finite.
  const ParamVector vertex = mle(tern, vec({0.0, 0.0}));
  EXPECT_NEAR(vertex.values().norm(), 3.0, 1e-9);
}

TEST(ExpoFam, MleStationarityAndOptimality) {
  SplitMix64 rng(13);
  for (const auto& spec : {fixtures::ternary(20.0), fixtures::sqrt2_family(20.0)}) {
    for (int i = 0; i < 100; ++i) {
      // Interior target: a strictly positive mixture of the statistics.
      Eigen::VectorXd w(static_cast<Eigen::Index>(spec.alphabet_size()));
      for (auto& v : w) v = 0.05 + rng.uniform();
      w /= w.sum();
      const Eigen::VectorXd target = spec.tau().transpose() * w;
      const ParamVector theta = mle(spec, target);
      const ModelEval ev = evaluate(spec, theta.values());
      EXPECT_LE((ev.grad_psi - target).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
  const auto spec = fixtures::ternary(4.0);
  for (int i = 0; i < 20; ++i) {
    Sequence x(12);
    for (auto& s : x) s = static_cast<Symbol>(rng.next() % 3 + 1);
    const ParamVector best = mle(spec, suffstat(spec, x));
    const double top = seq_log_prob(spec, best, x);
    for (int j = 0; j < 100; ++j) {
      const ParamVector other(spec, random_theta(rng, 2, 4.0));
      EXPECT_GE(top, seq_log_prob(spec, other, x) - 1e-12);
    }
  }
}

TEST(ExpoFam, ConvexHull) {
  const auto spec = fixtures::ternary();
  EXPECT_TRUE(in_convex_hull(spec, vec({0.2, 0.3})));
  EXPECT_TRUE(in_convex_hull(spec, vec({0.5, 0.5})));
  EXPECT_FALSE(in_convex_hull(spec, vec({0.6, 0.6})));
  EXPECT_FALSE(in_convex_hull(spec, vec({-0.01, 0.3})));
}
