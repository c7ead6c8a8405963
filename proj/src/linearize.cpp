#include <exception>
#include <vector>

#include <Eigen/Cholesky>

#include "selfcal/errors.hpp"
#include "selfcal/linearize.hpp"

namespace selfcal {
namespace {

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

LinearSystem linearize(std::span<const MotionPair> pairs, const Pose& theta) {
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  LinearSystem sys(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());

#pragma omp parallel for schedule(static) if (pairs.size() >= kParallelMinPairs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const WhitenedBlock block = whitened_block(theta, pairs[static_cast<std::size_t>(i)]);
      sys.jacobian.middleRows<6>(6 * i) = block.jacobian;
      sys.residual.segment<6>(6 * i) = block.residual;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return sys;
}

double whitened_cost(std::span<const MotionPair> pairs, const Pose& theta) {
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<double> per_pair(pairs.size(), 0.0);
  std::vector<std::exception_ptr> errors(pairs.size());

#pragma omp parallel for schedule(static) if (pairs.size() >= kParallelMinPairs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const MotionPair& pair = pairs[static_cast<std::size_t>(i)];
      const Eigen::LLT<Matrix6> llt(pair.cov_pair);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("pair covariance is not positive-definite");
      }
      per_pair[static_cast<std::size_t>(i)] =
          llt.matrixL().solve(residual(theta, pair)).squaredNorm();
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  rethrow_first(errors);

  // Summed in pair order so the total matches the serial kernel bit for bit.
  double cost = 0.0;
  for (double c : per_pair) cost += c;
  return cost;
}

}  // namespace selfcal
