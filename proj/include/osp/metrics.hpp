#pragma once

#include "osp/types.hpp"

#include <cmath>
#include <stdexcept>

namespace osp {

struct EvalResult {
  double mean_error = 0.0;
  double ahde = 0.0;
  Index pair_count = 0;
};

// Clamps a raw reconstruction onto the valid hop range: the diagonal
// becomes zero and off-diagonal values below one are pulled up to one.
// Exact zeros stay zero so constant-zero predictions survive unchanged.
template <typename Derived>
Matrix<typename Derived::Scalar> postprocess(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("postprocess: matrix must be square");
  }
  Matrix<Scalar> out = m;
  const Index n = out.rows();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i == j) {
        out(i, j) = Scalar(0);
      } else if (out(i, j) != Scalar(0) && out(i, j) < Scalar(1)) {
        out(i, j) = Scalar(1);
      }
    }
  }
  return out;
}

// Both error metrics over one symmetric evaluation mask. Each unordered
// pair is counted once; mean_error normalizes the absolute errors by the
// summed true hop counts, ahde by the pair count.
template <typename DerivedP, typename DerivedT>
EvalResult evaluate(const Eigen::MatrixBase<DerivedP>& predicted,
                    const Eigen::MatrixBase<DerivedT>& truth,
                    const MaskMatrix& eval_mask) {
  const Index n = eval_mask.rows();
  if (eval_mask.cols() != n || predicted.rows() != n || predicted.cols() != n ||
      truth.rows() != n || truth.cols() != n) {
    throw std::invalid_argument("evaluate: shape mismatch");
  }
  double abs_sum = 0.0;
  double truth_sum = 0.0;
  Index count = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      if (eval_mask(i, j) != eval_mask(j, i)) {
        throw std::invalid_argument("evaluate: mask must be symmetric");
      }
      if (!eval_mask(i, j)) continue;
      abs_sum += std::abs(static_cast<double>(predicted(i, j)) - static_cast<double>(truth(i, j)));
      truth_sum += static_cast<double>(truth(i, j));
      ++count;
    }
  }
  if (count == 0) {
    throw std::invalid_argument("evaluate: empty evaluation set");
  }
  if (truth_sum <= 0.0) {
    throw std::invalid_argument("evaluate: true hop counts sum to zero");
  }
  EvalResult r;
  r.mean_error = abs_sum / truth_sum;
  r.ahde = abs_sum / static_cast<double>(count);
  r.pair_count = count;
  return r;
}

template <typename DerivedP, typename DerivedT>
double mean_error(const Eigen::MatrixBase<DerivedP>& predicted,
                  const Eigen::MatrixBase<DerivedT>& truth, const MaskMatrix& eval_mask) {
  return evaluate(predicted, truth, eval_mask).mean_error;
}

template <typename DerivedP, typename DerivedT>
double ahde(const Eigen::MatrixBase<DerivedP>& predicted,
            const Eigen::MatrixBase<DerivedT>& truth, const MaskMatrix& eval_mask) {
  return evaluate(predicted, truth, eval_mask).ahde;
}

// Constant baseline predictors.
inline Eigen::MatrixXd trivial_zero(Index n) { return Eigen::MatrixXd::Zero(n, n); }

inline Eigen::MatrixXd trivial_one(Index n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n, n);
  m.diagonal().setZero();
  return m;
}

}  // namespace osp
