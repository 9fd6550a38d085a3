#include "rgbps/global_solver.hpp"
#include "rgbps/eval.hpp"
#include "rgbps/local_inference.hpp"

#include "../support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rgbps;

namespace {

struct Fixture {
  BasisMatrix basis;
  PatchGrid patches;
  LocalDistributions dists;
};

// Random distributions over a w x h image of 8x8 patches.
Fixture random_fixture(std::uint64_t seed, int w = 12, int h = 11, int K = 3, double invalid_rate = 0.2) {
  Fixture f;
  f.patches = PatchGrid(Mask(std::size_t(w * h), 1), w, h, 8);
  const std::vector<AlbedoCandidate> albedos(static_cast<std::size_t>(K));
  f.dists = LocalDistributions(f.patches.size(), albedos, f.basis.coeffs());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int m = 0; m < f.patches.size(); ++m) {
    for (int k = 0; k < K; ++k) {
      if (u(rng) < invalid_rate) {
        f.dists.set_invalid(m, k);
      } else {
        f.dists.set(m, k, support::random_coeffs(rng, f.basis.geometry()), 0.5 * u(rng));
      }
    }
  }
  return f;
}

// Direct evaluation of the consensus objective from its definition.
double objective_oracle(const Fixture& f, const SolverState& s, double lambda, double gamma) {
  double total = 0.0;
  for (int m = 0; m < f.patches.size(); ++m) {
    Eigen::VectorXd n(f.basis.rows());
    for (int i = 0; i < 64; ++i) n.segment<2>(2 * i) = s.gradients.col(f.patches.pixel(m, i));
    const Eigen::VectorXd a = s.coeffs.col(m);
    double fidelity = gamma;
    for (int k = 0; k < f.dists.candidate_count(); ++k) {
      if (!f.dists.valid(m, k)) continue;
      const Eigen::VectorXd diff = f.basis.matrix() * (a - Eigen::VectorXd(f.dists.coeffs(m, k)));
      fidelity = std::min(fidelity, f.dists.score(m, k) + diff.squaredNorm());
    }
    total += lambda * (n - f.basis.matrix() * a).squaredNorm() + fidelity;
  }
  return total;
}

SolverState random_state(const ConsensusProblem& p, std::mt19937_64& rng) {
  SolverState s = p.initialize();
  std::normal_distribution<double> g(0.0, 0.3);
  for (Eigen::Index i = 0; i < s.gradients.size(); ++i) s.gradients.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < s.coeffs.size(); ++i) s.coeffs.data()[i] += 0.05 * g(rng);
  return s;
}

}  // namespace

TEST(SolverConfig, DefaultsValidate) {
  const SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.lambda_at(0), std::ldexp(1.0, -64));
  EXPECT_EQ(c.lambda_at(144), 256.0);
  EXPECT_LT(c.lambda_at(143), 256.0);
  EXPECT_EQ(c.lambda_at(500), 256.0);
}

TEST(SolverConfig, RejectsBadSchedules) {
  SolverConfig c;
  c.iterations = 100;  // 2^-64 * sqrt(2)^99 < 256
  EXPECT_THROW(c.validate(), InputError);
  c = SolverConfig{};
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = SolverConfig{};
  c.lambda_init = 512.0;
  EXPECT_THROW(c.validate(), InputError);
  c = SolverConfig{};
  c.lambda_factor = 0.5;
  EXPECT_THROW(c.validate(), InputError);
  c = SolverConfig{};
  c.lambda_init = c.lambda_final;
  c.lambda_factor = 1.0;
  c.iterations = 3;
  EXPECT_NO_THROW(c.validate());
}

TEST(ConsensusProblem, InitializePicksLowestScore) {
  Fixture f = random_fixture(1);
  f.dists.set(0, 0, Eigen::VectorXd::Constant(20, 0.01), 0.2);
  f.dists.set(0, 1, Eigen::VectorXd::Constant(20, 0.02), 0.1);
  f.dists.set(0, 2, Eigen::VectorXd::Constant(20, 0.03), 0.1);  // tie: lower k wins
  for (int k = 0; k < 3; ++k) f.dists.set_invalid(1, k);
  const ConsensusProblem p(f.dists, f.patches, f.basis);
  const SolverState s = p.initialize();
  EXPECT_EQ(s.selection[0], 2);
  EXPECT_EQ(s.coeffs.col(0), Eigen::VectorXd::Constant(20, 0.02));
  EXPECT_EQ(s.selection[1], 0);
  EXPECT_EQ(s.coeffs.col(1), Eigen::VectorXd::Zero(20));
}

TEST(ConsensusProblem, NStepAveragesCoveringPatches) {
  const Fixture f = random_fixture(2);
  const ConsensusProblem p(f.dists, f.patches, f.basis);
  std::mt19937_64 rng(3);
  SolverState s = random_state(p, rng);
  p.n_step(s);
  const int w = f.patches.width();
  Eigen::Matrix2Xd sum = Eigen::Matrix2Xd::Zero(2, s.gradients.cols());
  std::vector<int> count(std::size_t(s.gradients.cols()), 0);
  for (int m = 0; m < f.patches.size(); ++m) {
    const Eigen::VectorXd g = f.basis.matrix() * s.coeffs.col(m);
    for (int i = 0; i < 64; ++i) {
      const auto px = f.patches.pixel(m, i);
      sum.col(px) += g.segment<2>(2 * i);
      ++count[std::size_t(px)];
    }
  }
  for (Eigen::Index px = 0; px < s.gradients.cols(); ++px) {
    ASSERT_GT(count[std::size_t(px)], 0);
    EXPECT_LT((s.gradients.col(px) - sum.col(px) / count[std::size_t(px)]).norm(), 1e-12) << px % w << "," << px / w;
  }
  // A corner pixel is covered by exactly one patch.
  EXPECT_LT((s.gradients.col(0) - (f.basis.matrix() * s.coeffs.col(0)).head<2>()).norm(), 1e-14);
}

TEST(ConsensusProblem, ObjectiveMatchesDefinition) {
  const Fixture f = random_fixture(4);
  const ConsensusProblem p(f.dists, f.patches, f.basis);
  std::mt19937_64 rng(5);
  for (double lambda : {1e-6, 0.3, 50.0}) {
    for (double gamma : {0.05, 4.0}) {
      const SolverState s = random_state(p, rng);
      const double expected = objective_oracle(f, s, lambda, gamma);
      EXPECT_NEAR(p.objective(s, lambda, gamma), expected, 1e-9 * expected);
    }
  }
}

TEST(ConsensusProblem, StepsNeverIncreaseObjective) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const Fixture f = random_fixture(seed);
    const ConsensusProblem p(f.dists, f.patches, f.basis);
    std::mt19937_64 rng(seed);
    SolverState s = random_state(p, rng);
    for (double lambda : {1e-3, 0.1, 1.0, 10.0, 256.0}) {
      const double gamma = 0.4;
      const double before = p.objective(s, lambda, gamma);
      p.n_step(s);
      const double mid = p.objective(s, lambda, gamma);
      p.a_step(s, lambda, gamma, SelectionRule::FullObjective);
      const double after = p.objective(s, lambda, gamma);
      EXPECT_LE(mid, before * (1 + 1e-12) + 1e-12);
      EXPECT_LE(after, mid * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST(ConsensusProblem, AStepIsBlockMinimizer) {
  const Fixture f = random_fixture(20);
  const ConsensusProblem p(f.dists, f.patches, f.basis);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  const double lambda = 0.7, gamma = 0.3;
  SolverState s = random_state(p, rng);
  p.a_step(s, lambda, gamma, SelectionRule::FullObjective);
  const double best = p.objective(s, lambda, gamma);
  for (int t = 0; t < 30; ++t) {
    SolverState other = s;
    const int m = int(rng() % std::uint64_t(f.patches.size()));
    Eigen::VectorXd delta(20);
    for (auto& x : delta) x = g(rng) * std::pow(10.0, -1.0 - t % 4);
    other.coeffs.col(m) += delta;
    EXPECT_GE(p.objective(other, lambda, gamma), best - 1e-12);
  }
}

TEST(ConsensusProblem, AStepClosedFormAndLimit) {
  const Fixture f = random_fixture(30, 8, 8, 2, 0.0);
  ASSERT_EQ(f.patches.size(), 1);
  const ConsensusProblem p(f.dists, f.patches, f.basis);
  std::mt19937_64 rng(31);
  SolverState s = random_state(p, rng);
  Eigen::VectorXd n(128);
  for (int i = 0; i < 64; ++i) n.segment<2>(2 * i) = s.gradients.col(f.patches.pixel(0, i));
  const Eigen::VectorXd a0 = project(n, f.basis);

  // Huge gamma forces a candidate branch: a = (a_k + lambda a0) / (1 + lambda).
  p.a_step(s, 2.0, 1e9, SelectionRule::FullObjective);
  ASSERT_GT(s.selection[0], 0);
  const Eigen::VectorXd ak = f.dists.coeffs(0, s.selection[0] - 1);
  EXPECT_LT((s.coeffs.col(0) - (ak + 2.0 * a0) / 3.0).cwiseAbs().maxCoeff(), 1e-12);

  // Tiny gamma forces the outlier branch: a = a0.
  p.a_step(s, 2.0, 1e-12, SelectionRule::FullObjective);
  EXPECT_EQ(s.selection[0], 0);
  EXPECT_LT((s.coeffs.col(0) - a0).cwiseAbs().maxCoeff(), 1e-12);

  // lambda -> infinity: every branch collapses onto a0.
  p.a_step(s, 1e12, 1e9, SelectionRule::FullObjective);
  EXPECT_LT((s.coeffs.col(0) - a0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ConsensusProblem, ShortcutRuleOmitsLambdaTerm) {
  Fixture f = random_fixture(40, 8, 8, 1, 0.0);
  f.dists.set(0, 0, Eigen::VectorXd::Zero(20), 0.1);
  const ConsensusProblem p(f.dists, f.patches, f.basis);
  SolverState s = p.initialize();
  Eigen::VectorXd target = Eigen::VectorXd::Zero(20);
  target(1) = 0.1;  // |G a0|^2 = 64 * 0.01 = 0.64
  s.coeffs.col(0) = target;
  p.n_step(s);
  // Shortcut compares 0.1 + (l/(1+l))^2 * 0.64; full compares 0.1 + l/(1+l) * 0.64.
  const double lambda = 1.0, gamma = 0.3;
  SolverState a = s, b = s;
  p.a_step(a, lambda, gamma, SelectionRule::Shortcut);
  p.a_step(b, lambda, gamma, SelectionRule::FullObjective);
  EXPECT_EQ(a.selection[0], 1);  // 0.1 + 0.16 < 0.3
  EXPECT_EQ(b.selection[0], 0);  // 0.1 + 0.32 > 0.3
}

TEST(Solve, CandidatePermutationInvariant) {
  const Fixture f = random_fixture(50, 14, 12, 4);
  std::vector<int> perm = {2, 0, 3, 1};
  LocalDistributions shuffled(f.patches.size(), f.dists.albedos(), f.basis.coeffs());
  for (int m = 0; m < f.patches.size(); ++m) {
    for (int k = 0; k < 4; ++k) {
      const int src = perm[std::size_t(k)];
      if (f.dists.valid(m, src)) {
        shuffled.set(m, k, f.dists.coeffs(m, src), f.dists.score(m, src));
      } else {
        shuffled.set_invalid(m, k);
      }
    }
  }
  SolverConfig cfg;
  cfg.gamma = 0.3;
  const auto a = solve(f.dists, f.patches, f.basis, cfg);
  const auto b = solve(shuffled, f.patches, f.basis, cfg);
  EXPECT_LT((a.gradients.data() - b.gradients.data()).cwiseAbs().maxCoeff(), 1e-9);
  for (std::size_t m = 0; m < a.selection.size(); ++m) {
    const int mapped = b.selection[m] == 0 ? 0 : perm[std::size_t(b.selection[m] - 1)] + 1;
    EXPECT_EQ(a.selection[m], mapped);
  }
}

TEST(Solve, AllOutliersTerminates) {
  const Fixture f = random_fixture(60);
  SolverConfig cfg;
  cfg.gamma = 1e-9;
  cfg.trace_objective = true;
  const auto r = solve(f.dists, f.patches, f.basis, cfg);
  EXPECT_EQ(r.iterations_run, cfg.iterations);
  for (int s : r.selection) EXPECT_EQ(s, 0);
  EXPECT_EQ(r.trace.back().outliers, f.patches.size());
  EXPECT_TRUE(std::isfinite(r.objective));
}

TEST(Solve, TracedObjectiveIsMonotoneWithinIterations) {
  const Fixture f = random_fixture(70, 16, 16, 3);
  SolverConfig cfg;
  cfg.gamma = 0.5;
  cfg.trace_objective = true;
  const auto r = solve(f.dists, f.patches, f.basis, cfg);
  ASSERT_EQ(int(r.trace.size()), cfg.iterations);
  for (const auto& log : r.trace) {
    EXPECT_LE(log.objective_after_n, log.objective_start * (1 + 1e-12) + 1e-12) << log.iteration;
    EXPECT_LE(log.objective_after_a, log.objective_after_n * (1 + 1e-12) + 1e-12) << log.iteration;
  }
}

TEST(Solve, EarlyStoppingAtFinalLambda) {
  const Fixture f = random_fixture(80);
  SolverConfig cfg;
  cfg.relative_tolerance = 1e-3;
  cfg.iterations = 400;
  const auto r = solve(f.dists, f.patches, f.basis, cfg);
  EXPECT_GT(r.iterations_run, 144);
  EXPECT_LT(r.iterations_run, 400);
}

TEST(Solve, RecoversGlobalPolynomialSurface) {
  // One cubic depth over the whole image, observed through the true candidate
  // plus distractors; the consensus field must reproduce the true normals.
  const BasisMatrix basis;
  const int w = 24, h = 20;
  const PatchGrid patches(Mask(std::size_t(w * h), 1), w, h, 8);
  auto depth_grad = [](double x, double y) {
    return Eigen::Vector2d(0.1 + 0.004 * y + 0.0006 * x * x, -0.05 + 0.004 * x - 0.0003 * y * y);
  };
  NormalField truth(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) truth[y * w + x] = normal_from_gradient(depth_grad(x, y));
  }
  std::mt19937_64 rng(90);
  LocalDistributions dists(patches.size(), std::vector<AlbedoCandidate>(3), basis.coeffs());
  for (int m = 0; m < patches.size(); ++m) {
    Eigen::VectorXd n(128);
    for (int i = 0; i < 64; ++i) {
      const auto px = patches.pixel(m, i);
      n.segment<2>(2 * i) = depth_grad(double(px % w), double(px / w));
    }
    dists.set(m, 0, support::random_coeffs(rng, basis.geometry()), 0.02);
    dists.set(m, 1, project(n, basis), 0.01);
    dists.set(m, 2, support::random_coeffs(rng, basis.geometry()), 0.03);
  }
  const auto r = solve(dists, patches, basis);
  const auto err = angular_error(r.normals, truth);
  EXPECT_LT(err.errors.data().maxCoeff(), 0.5);
  for (int s : r.selection) EXPECT_EQ(s, 2);
}

TEST(OutlierFraction, CountsCoveringPatches) {
  const PatchGrid patches(Mask(std::size_t(9 * 8), 1), 9, 8, 8);
  ASSERT_EQ(patches.size(), 2);
  const auto f = outlier_fraction(patches, {0, 3});
  EXPECT_EQ(f[0](0), 1.0);        // only patch 0
  EXPECT_EQ(f[8](0), 0.0);        // only patch 1
  EXPECT_EQ(f[4](0), 0.5);        // both
  EXPECT_THROW(outlier_fraction(patches, {0}), InputError);
}

TEST(ConsensusProblem, RejectsMismatchedInputs) {
  const Fixture f = random_fixture(100);
  const PatchGrid other(Mask(std::size_t(100), 1), 10, 10, 8);
  EXPECT_THROW(ConsensusProblem(f.dists, other, f.basis), InputError);
  const BasisMatrix small(PatchGeometry{8, 2});
  EXPECT_THROW(ConsensusProblem(f.dists, f.patches, small), InputError);
}
