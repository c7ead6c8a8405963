#include "selfcal/estimator.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "selfcal/errors.hpp"

namespace selfcal {
namespace {

constexpr int kMaxHalvings = 30;
const double kLogTwoPiE = std::log(2.0 * std::numbers::pi * std::numbers::e);

}  // namespace

void SolveOptions::validate() const {
  if (!(tsvd_threshold >= 0.0 && tsvd_threshold < 1.0)) {
    throw ConfigError(fmt::format("tsvd threshold {} outside [0, 1)", tsvd_threshold));
  }
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(step_tolerance > 0.0)) throw ConfigError("step_tolerance must be positive");
}

Vector6 ScaledSvd::observability() const {
  Vector6 scores = Vector6::Zero();
  for (int i = 0; i < rank; ++i) scores += v.col(i).cwiseAbs2();
  return scores;
}

ScaledSvd decompose(const StackedJacobian& whitened_jacobian, double threshold) {
  ScaledSvd out;
  const Eigen::Matrix<double, 1, 6> norms = whitened_jacobian.colwise().norm();
  const double max_norm = norms.maxCoeff();
  for (int j = 0; j < 6; ++j) {
    const double n = norms(j);
    out.scale(j) = (n > 0.0 && n > kZeroColumnTolerance * max_norm) ? 1.0 / n : 0.0;
  }
  const Eigen::MatrixXd scaled = whitened_jacobian * out.scale.asDiagonal();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.singular_values = svd.singularValues();
  out.u = svd.matrixU();
  out.v = svd.matrixV();

  const auto& s = out.singular_values;
  if (s.size() > 0 && s(0) > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) >= threshold * s(0) && s(i) > kRankFloor * s(0)) {
        ++out.rank;
      } else {
        break;
      }
    }
  }
  return out;
}

Vector6 tsvd_step(const ScaledSvd& svd, const Eigen::VectorXd& whitened_residual) {
  Vector6 y = Vector6::Zero();
  for (int i = 0; i < svd.rank; ++i) {
    y += (svd.u.col(i).dot(whitened_residual) / svd.singular_values(i)) * svd.v.col(i);
  }
  return -svd.scale.cwiseProduct(y);
}

Vector6 normal_equation_step(const LinearSystem& sys) {
  const Matrix6 h = sys.jacobian.transpose() * sys.jacobian;
  const Vector6 g = sys.jacobian.transpose() * sys.residual;
  const Eigen::LLT<Matrix6> llt(h);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("normal equations are singular");
  }
  return -llt.solve(g);
}

Matrix6 retained_covariance(const ScaledSvd& svd) {
  const int r = svd.rank;
  Matrix6 cov = Matrix6::Zero();
  if (r > 0) {
    const Eigen::MatrixXd w = svd.scale.asDiagonal() * svd.v.leftCols(r);
    const Eigen::VectorXd inv_s2 = svd.singular_values.head(r).cwiseAbs2().cwiseInverse();
    cov = w * inv_s2.asDiagonal() * w.transpose();
  }
  if (r < 6) {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(6, 6);
    if (r > 0) {
      const Eigen::MatrixXd w = svd.scale.asDiagonal() * svd.v.leftCols(r);
      const Eigen::JacobiSVD<Eigen::MatrixXd> complement(w, Eigen::ComputeFullU);
      basis = complement.matrixU().rightCols(6 - r);
    }
    cov += kUnobservableVariance * basis * basis.transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

double retained_entropy(const ScaledSvd& svd) {
  const int r = svd.rank;
  if (r == 0) return std::numeric_limits<double>::infinity();
  // pdet(W D W^T) = det(D) det(W^T W) for W with full column rank.
  const Eigen::MatrixXd w = svd.scale.asDiagonal() * svd.v.leftCols(r);
  const Eigen::LLT<Eigen::MatrixXd> gram(w.transpose() * w);
  if (gram.info() != Eigen::Success) {
    throw NumericalError("retained subspace is degenerate");
  }
  double log_det = 0.0;
  for (int i = 0; i < r; ++i) {
    log_det += 2.0 * std::log(gram.matrixL()(i, i));
    log_det -= 2.0 * std::log(svd.singular_values(i));
  }
  return 0.5 * (r * kLogTwoPiE + log_det);
}

double entropy_of(const Matrix6& cov) {
  const Eigen::LLT<Matrix6> llt(cov);
  if (llt.info() != Eigen::Success || !cov.allFinite()) {
    throw NumericalError("entropy_of: covariance is not positive-definite");
  }
  double log_det = 0.0;
  for (int i = 0; i < 6; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return 0.5 * (6.0 * kLogTwoPiE + log_det);
}

Matrix6 fim(std::span<const MotionPair> pairs, const Pose& theta) {
  if (pairs.empty()) throw std::invalid_argument("fim: no pairs");
  const LinearSystem sys = linearize(pairs, theta);
  const Matrix6 f = sys.jacobian.transpose() * sys.jacobian;
  return 0.5 * (f + f.transpose());
}

CalibrationEstimate solve(std::span<const MotionPair> pairs, const Pose& init,
                          const SolveOptions& opts) {
  opts.validate();
  if (pairs.empty()) throw std::invalid_argument("solve: no motion pairs");

  CalibrationEstimate est;
  est.theta = init;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const LinearSystem sys = linearize(pairs, est.theta);
    const ScaledSvd svd = decompose(sys.jacobian, opts.tsvd_threshold);
    const Vector6 step =
        opts.use_tsvd ? tsvd_step(svd, sys.residual) : normal_equation_step(sys);

    IterationRecord rec;
    rec.cost_before = sys.cost();
    rec.step = step;
    rec.rank = svd.rank;

    // Backtrack until the whitened cost does not increase; a Gauss-Newton
    // step is a descent direction, so failure means we sit at the floor.
    bool accepted = false;
    double scale = 1.0;
    Pose candidate;
    for (int h = 0; h <= kMaxHalvings; ++h, scale *= 0.5) {
      candidate = est.theta * Pose::exp(scale * step);
      rec.cost_after = whitened_cost(pairs, candidate);
      if (rec.cost_after <= rec.cost_before) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      est.converged = true;
      break;
    }
    rec.step_scale = scale;
    est.theta = candidate;
    est.trace.push_back(rec);
    if ((scale * step).norm() < opts.step_tolerance) {
      est.converged = true;
      break;
    }
  }

  const LinearSystem final_sys = linearize(pairs, est.theta);
  const ScaledSvd svd = decompose(final_sys.jacobian, opts.tsvd_threshold);
  est.numerical_rank = svd.rank;
  est.obs_scores = svd.observability();
  est.cov = retained_covariance(svd);
  est.entropy = retained_entropy(svd);
  return est;
}

}  // namespace selfcal
