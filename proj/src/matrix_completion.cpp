#include "osp/matrix_completion.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace osp {

CompletionParams default_params(Index n, double sampled_fraction) {
  if (n < 1) {
    throw std::invalid_argument("default_params: matrix size must be positive");
  }
  if (!(sampled_fraction > 0.0 && sampled_fraction <= 1.0)) {
    throw std::invalid_argument("default_params: sampled_fraction must be in (0, 1]");
  }
  CompletionParams params;
  params.threshold = 5.0 * static_cast<double>(n);
  params.step = 1.2 / sampled_fraction;
  return params;
}

CompletionParams default_params(const PartialMatrix& p) {
  return default_params(p.size(), p.sampled_fraction);
}

namespace {

// sign(lambda) * max(|lambda| - threshold, 0) applied to the spectrum.
Eigen::MatrixXd shrink_spectrum(const Eigen::MatrixXd& y, double threshold) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("complete_lowrank: eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const Index n = lambda.size();
  std::vector<Index> active;
  Eigen::VectorXd shrunk(n);
  for (Index i = 0; i < n; ++i) {
    const double mag = std::abs(lambda(i)) - threshold;
    if (mag > 0.0) {
      shrunk(static_cast<Index>(active.size())) = lambda(i) > 0.0 ? mag : -mag;
      active.push_back(i);
    }
  }
  if (active.empty()) return Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd basis(n, static_cast<Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) {
    basis.col(static_cast<Index>(c)) = es.eigenvectors().col(active[c]);
  }
  const auto coeffs = shrunk.head(static_cast<Index>(active.size()));
  Eigen::MatrixXd m = basis * coeffs.asDiagonal() * basis.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace

CompletionResult complete_lowrank(const PartialMatrix& p, const CompletionParams& params) {
  if (!(params.threshold > 0.0) || !(params.step > 0.0) || params.max_iters < 1 ||
      !(params.tol > 0.0)) {
    throw std::invalid_argument("complete_lowrank: bad parameters");
  }
  const Index n = p.size();
  if (n < 1) {
    throw std::invalid_argument("complete_lowrank: empty matrix");
  }
  if (!p.mask.any()) {
    throw std::invalid_argument("complete_lowrank: no observed entries");
  }

  // Observed values with everything else hard-zeroed, so stray content in
  // the unobserved slots cannot leak in.
  Eigen::MatrixXd observed = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (p.mask(i, j)) observed(i, j) = p.values(i, j);
    }
  }
  const double denom = observed.norm();

  CompletionResult result;
  if (denom == 0.0) {
    // only zeros observed; the zero matrix fits them exactly
    result.completed = Eigen::MatrixXd::Zero(n, n);
    result.converged = true;
    return result;
  }

  Eigen::MatrixXd dual = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd gap(n, n);
  Eigen::MatrixXd best = Eigen::MatrixXd::Zero(n, n);
  double best_residual = std::numeric_limits<double>::infinity();

  for (int it = 0; it < params.max_iters; ++it) {
    const Eigen::MatrixXd m = shrink_spectrum(dual, params.threshold);
    gap.setZero();
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) {
        if (p.mask(i, j)) gap(i, j) = observed(i, j) - m(i, j);
      }
    }
    const double residual = gap.norm() / denom;
    result.residual_history.push_back(residual);
    if (residual < best_residual) {
      best_residual = residual;
      best = m;
    }
    if (residual <= params.tol) {
      result.converged = true;
      break;
    }
    // runaway step sizes blow the iterate up; keep the best and bail
    if (!std::isfinite(residual) || residual > 100.0 * result.residual_history.front()) {
      break;
    }
    dual += params.step * gap;
  }

  result.completed = std::move(best);
  result.iterations = static_cast<int>(result.residual_history.size());
  result.residual = best_residual;
  return result;
}

}  // namespace osp
