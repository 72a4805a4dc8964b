#pragma once

#include "osp/sampling.hpp"
#include "osp/types.hpp"

#include <vector>

namespace osp {

struct CompletionParams {
  double threshold = 0.0;  // singular value shrinkage cutoff
  double step = 0.0;       // dual gradient step size
  int max_iters = 500;
  double tol = 1e-4;       // relative residual on the observed entries
};

// Standard choices: threshold 5n and step 1.2 / fraction.
CompletionParams default_params(Index n, double sampled_fraction);
CompletionParams default_params(const PartialMatrix& p);

struct CompletionResult {
  Eigen::MatrixXd completed;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;                 // best relative residual reached
  std::vector<double> residual_history;  // one entry per iteration
};

// Singular value thresholding for symmetric matrices. Shrinks the
// eigenvalues of the dual iterate and keeps the best iterate seen, so a
// non-converged run still returns something usable (converged stays
// false).
CompletionResult complete_lowrank(const PartialMatrix& p, const CompletionParams& params);

}  // namespace osp
