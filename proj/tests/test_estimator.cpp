#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "scenarios.hpp"
#include "selfcal/errors.hpp"
#include "selfcal/estimator.hpp"

using namespace selfcal;
using namespace selfcal::testing;

namespace {

const double kLogTwoPiE = std::log(2.0 * std::numbers::pi * std::numbers::e);

Pose quarter_turn_truth() {
  return Pose::from_axis_angle(Vector3::UnitZ(), std::numbers::pi / 2, Vector3(1, 0, 0));
}

std::vector<MotionPair> full_rank_pairs() {
  std::mt19937_64 rng(2024);
  return consistent_pairs(quarter_turn_truth(), 20, rng);
}

}  // namespace

TEST(Solve, RecoversQuarterTurnFromIdentity) {
  const auto est = solve(full_rank_pairs(), Pose::identity());
  EXPECT_LT(translation_error(est.theta, quarter_turn_truth()), 1e-8);
  EXPECT_LT(rotation_error(est.theta, quarter_turn_truth()), 1e-8);
  EXPECT_EQ(est.numerical_rank, 6);
  EXPECT_TRUE(est.converged);
}

TEST(Solve, PlanarMotionKeepsPlaneNormalAtInit) {
  std::mt19937_64 rng(8);
  const Pose truth = planar_theta();
  const auto pairs = consistent_pairs(truth, 30, rng, true);
  const Pose init(Eigen::Quaterniond(Eigen::AngleAxisd(0.2, Vector3::UnitZ())),
                  Vector3(0.1, 0.1, 0.3));
  const auto est = solve(pairs, init);
  EXPECT_LT(est.numerical_rank, 6);
  EXPECT_EQ(est.theta.translation().z(), 0.3);
  EXPECT_NEAR(est.theta.translation().x(), truth.translation().x(), 1e-8);
  EXPECT_NEAR(est.theta.translation().y(), truth.translation().y(), 1e-8);
  EXPECT_NEAR(est.obs_scores[2], 0.0, 1e-12);
}

TEST(Solve, UntruncatedMatchesNormalEquationsEveryIteration) {
  std::mt19937_64 rng(31);
  const auto pairs = consistent_pairs(reference_theta(), 15, rng, false, 0.01);
  const Pose init = perturbed(reference_theta(), 0.2, 0.2);
  SolveOptions tsvd;
  tsvd.tsvd_threshold = 0.0;
  SolveOptions normal = tsvd;
  normal.use_tsvd = false;
  const auto a = solve(pairs, init, tsvd);
  const auto b = solve(pairs, init, normal);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  ASSERT_FALSE(a.trace.empty());
  // Near the noisy optimum J^T r is a cancellation of large terms, so both
  // steps carry rounding of order eps times the first step; that floor is
  // added to the relative tolerance.
  const double floor = 1e-14 * b.trace.front().step.norm();
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    const Vector6& sa = a.trace[i].step;
    const Vector6& sb = b.trace[i].step;
    EXPECT_LE((sa - sb).norm(), 1e-10 * sb.norm() + floor) << i;
  }
  EXPECT_LE((a.trace.front().step - b.trace.front().step).norm(),
            1e-10 * b.trace.front().step.norm());
}

TEST(Solve, GaussNewtonCostNeverIncreases) {
  std::mt19937_64 rng(12);
  const auto pairs = consistent_pairs(reference_theta(), 25, rng);
  const auto est = solve(pairs, perturbed(reference_theta(), 0.3, 0.4));
  for (const auto& rec : est.trace) EXPECT_LE(rec.cost_after, rec.cost_before);
}

TEST(Solve, UpdateStaysInRetainedSubspace) {
  std::mt19937_64 rng(13);
  const auto pairs = consistent_pairs(planar_theta(), 20, rng, true, 0.01);
  const Pose theta = perturbed(planar_theta(), 0.05, 0.05);
  const LinearSystem sys = linearize(pairs, theta);
  const ScaledSvd svd = decompose(sys.jacobian, 0.1);
  ASSERT_LT(svd.rank, 6);
  const Vector6 step = tsvd_step(svd, sys.residual);
  const Eigen::MatrixXd w = svd.scale.asDiagonal() * svd.v.leftCols(svd.rank);
  const Eigen::JacobiSVD<Eigen::MatrixXd> comp(w, Eigen::ComputeFullU);
  const Eigen::MatrixXd null = comp.matrixU().rightCols(6 - svd.rank);
  EXPECT_LT((null.transpose() * step).norm(), 1e-14 * std::max(1.0, step.norm()));
}

TEST(Solve, ObservabilityInvariantToTranslationUnits) {
  std::mt19937_64 rng(14);
  const Pose truth = reference_theta();
  const auto pairs = consistent_pairs(truth, 12, rng, false, 0.01);
  const auto at = [&](double k) {
    std::vector<MotionPair> scaled = pairs;
    Matrix6 unit = Matrix6::Identity();
    unit.topLeftCorner<3, 3>() *= k;
    for (auto& p : scaled) {
      p.motion_a = Pose(p.motion_a.rotation(), k * p.motion_a.translation());
      p.motion_b = Pose(p.motion_b.rotation(), k * p.motion_b.translation());
      p.cov_pair = unit * p.cov_pair * unit;
    }
    const Pose theta(truth.rotation(), k * truth.translation());
    return decompose(linearize(scaled, theta).jacobian, 0.1);
  };
  const ScaledSvd base = at(1.0);
  for (double k : {0.001, 10.0, 1000.0}) {
    const ScaledSvd s = at(k);
    EXPECT_EQ(s.rank, base.rank);
    EXPECT_LT((s.observability() - base.observability()).cwiseAbs().maxCoeff(), 1e-6) << k;
  }
}

TEST(Solve, EstimateInvariants) {
  std::mt19937_64 rng(15);
  for (bool planar : {false, true}) {
    const auto pairs = consistent_pairs(planar ? planar_theta() : reference_theta(), 20, rng,
                                        planar, 0.01);
    const auto est = solve(pairs, Pose::identity());
    EXPECT_NEAR(est.obs_scores.sum(), est.numerical_rank, 1e-9);
    EXPECT_GE(est.obs_scores.minCoeff(), -1e-15);
    EXPECT_LE(est.obs_scores.maxCoeff(), 1.0 + 1e-12);
    if (est.numerical_rank == 6) EXPECT_NEAR(est.entropy, entropy_of(est.cov), 1e-9);
  }
}

TEST(Solve, ErrorsAndNonConvergence) {
  EXPECT_THROW((void)solve({}, Pose::identity()), std::invalid_argument);
  auto pairs = full_rank_pairs();
  pairs[3].cov_pair = Matrix6::Zero();
  EXPECT_THROW((void)solve(pairs, Pose::identity()), NumericalError);

  SolveOptions one;
  one.max_iterations = 1;
  const auto est = solve(full_rank_pairs(), Pose::identity(), one);
  EXPECT_FALSE(est.converged);
}

TEST(SolveOptions, Validation) {
  SolveOptions o;
  EXPECT_NO_THROW(o.validate());
  o.tsvd_threshold = 1.0;
  EXPECT_THROW(o.validate(), ConfigError);
  o.tsvd_threshold = 0.1;
  o.max_iterations = 0;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Entropy, IdentityClosedForm) {
  EXPECT_NEAR(entropy_of(Matrix6::Identity()), 3.0 * kLogTwoPiE, 1e-9);
  EXPECT_NEAR(entropy_of(Matrix6::Identity()), 8.513632, 1e-6);
}

TEST(Entropy, ScaledIdentity) {
  for (double c : {1e-6, 0.5, 3.0, 1e4}) {
    EXPECT_NEAR(entropy_of(c * Matrix6::Identity()),
                entropy_of(Matrix6::Identity()) + 3.0 * std::log(c), 1e-9);
  }
}

TEST(Entropy, DiagonalDeterminantIdentity) {
  Vector6 d;
  d << 1e-4, 2e-3, 0.5, 7.0, 3e-5, 1.0;
  double expected = 3.0 * kLogTwoPiE;
  for (int i = 0; i < 6; ++i) expected += 0.5 * std::log(d[i]);
  EXPECT_NEAR(entropy_of(d.asDiagonal()), expected, 1e-9);
}

TEST(Entropy, RejectsNonPositiveDefinite) {
  Matrix6 c = Matrix6::Identity();
  c(4, 4) = -1.0;
  EXPECT_THROW((void)entropy_of(c), NumericalError);
}

TEST(Entropy, GoldenValueOfQuarterTurnSolve) {
  const auto est = solve(full_rank_pairs(), Pose::identity());
  EXPECT_TRUE(std::isfinite(est.entropy));
  EXPECT_NEAR(est.entropy, -28.783685737225206, 1e-9);
}

TEST(Fim, ZeroInformationPairs) {
  std::vector<MotionPair> pairs(5);
  EXPECT_LT(fim(pairs, reference_theta()).norm(), 1e-15);
}

TEST(Fim, SymmetricAndPlanarRankDeficient) {
  std::mt19937_64 rng(16);
  const auto full = consistent_pairs(reference_theta(), 10, rng, false, 0.01);
  const Matrix6 f = fim(full, reference_theta());
  EXPECT_LT((f - f.transpose()).norm(), 1e-12);

  const auto planar = consistent_pairs(planar_theta(), 10, rng, true);
  EXPECT_LT(decompose(linearize(planar, planar_theta()).jacobian, 0.1).rank, 6);
  const Matrix6 fp = fim(planar, planar_theta());
  EXPECT_LT(fp.col(2).norm(), 1e-12 * fp.norm());
}
