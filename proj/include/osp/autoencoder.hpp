#pragma once

#include "osp/rng.hpp"
#include "osp/sampling.hpp"
#include "osp/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace osp {

// z for positive z, alpha * z otherwise. Lazy element-wise expression.
template <typename Derived>
auto leaky_relu(const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([alpha](Scalar v) { return v > Scalar(0) ? v : alpha * v; });
}

// Derivative of leaky_relu; the kink at zero takes the alpha branch.
template <typename Derived>
auto leaky_relu_grad(const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([alpha](Scalar v) { return v > Scalar(0) ? Scalar(1) : alpha; });
}

// One hidden layer, leaky relu on both layers, tied dimensions: the
// reconstruction lives in the input space.
template <typename Scalar>
struct Autoencoder {
  Matrix<Scalar> encoder_w;  // hidden x input
  Vector<Scalar> encoder_b;
  Matrix<Scalar> decoder_w;  // input x hidden
  Vector<Scalar> decoder_b;
  Scalar alpha = Scalar(0.01);

  Index input_dim() const { return encoder_w.cols(); }
  Index hidden_dim() const { return encoder_w.rows(); }
};

// Glorot uniform weights in [-sqrt(6/(in+out)), sqrt(6/(in+out))], zero
// biases.
template <typename Scalar>
Autoencoder<Scalar> init_model(Index input_dim, Index hidden_dim, Scalar alpha,
                               std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1) {
    throw std::invalid_argument("init_model: dimensions must be positive");
  }
  if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
    throw std::invalid_argument("init_model: alpha must be in (0, 1)");
  }
  Autoencoder<Scalar> model;
  model.alpha = alpha;
  std::mt19937_64 gen(seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
  auto fill = [&](Matrix<Scalar>& w, Index rows, Index cols) {
    w.resize(rows, cols);
    for (Index i = 0; i < w.size(); ++i) {
      w.data()[i] = static_cast<Scalar>((2.0 * rng::canonical(gen) - 1.0) * limit);
    }
  };
  fill(model.encoder_w, hidden_dim, input_dim);
  fill(model.decoder_w, input_dim, hidden_dim);
  model.encoder_b = Vector<Scalar>::Zero(hidden_dim);
  model.decoder_b = Vector<Scalar>::Zero(input_dim);
  return model;
}

template <typename Scalar>
struct ForwardResult {
  Vector<Scalar> hidden;
  Vector<Scalar> reconstruction;
};

template <typename Scalar, typename Derived>
ForwardResult<Scalar> forward(const Autoencoder<Scalar>& model,
                              const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != model.input_dim() || x.cols() != 1) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  ForwardResult<Scalar> r;
  r.hidden = leaky_relu((model.encoder_w * x + model.encoder_b).eval(), model.alpha);
  r.reconstruction =
      leaky_relu((model.decoder_w * r.hidden + model.decoder_b).eval(), model.alpha);
  return r;
}

// Mean squared error over the masked coordinates only.
template <typename DerivedP, typename DerivedT, typename DerivedM>
typename DerivedP::Scalar masked_mse(const Eigen::MatrixBase<DerivedP>& prediction,
                                     const Eigen::MatrixBase<DerivedT>& target,
                                     const Eigen::MatrixBase<DerivedM>& mask) {
  using Scalar = typename DerivedP::Scalar;
  const Index n = prediction.size();
  if (target.size() != n || mask.size() != n) {
    throw std::invalid_argument("masked_mse: size mismatch");
  }
  Scalar sum = Scalar(0);
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    if (!mask(i)) continue;
    const Scalar d = prediction(i) - target(i);
    sum += d * d;
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("masked_mse: empty mask");
  }
  return sum / Scalar(count);
}

template <typename Scalar>
struct Gradients {
  Matrix<Scalar> encoder_w;
  Vector<Scalar> encoder_b;
  Matrix<Scalar> decoder_w;
  Vector<Scalar> decoder_b;
};

namespace detail {

// Scratch space reused across SGD steps.
template <typename Scalar>
struct StepWorkspace {
  Vector<Scalar> z1, hidden, z2, reconstruction, delta_out, delta_hidden;
};

// Runs one example forward, fills the error signals dL/dz2 and dL/dz1 and
// returns the masked mse. Weight gradients follow as outer products with
// the stored activations.
template <typename Scalar, typename DX, typename DT, typename DM>
Scalar forward_backward(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<DX>& x,
                        const Eigen::MatrixBase<DT>& target,
                        const Eigen::MatrixBase<DM>& mask, StepWorkspace<Scalar>& ws) {
  const Scalar alpha = model.alpha;
  ws.z1.noalias() = model.encoder_w * x;
  ws.z1 += model.encoder_b;
  ws.hidden = leaky_relu(ws.z1, alpha);
  ws.z2.noalias() = model.decoder_w * ws.hidden;
  ws.z2 += model.decoder_b;
  ws.reconstruction = leaky_relu(ws.z2, alpha);

  const Index n = ws.z2.size();
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    if (mask(i)) ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("forward_backward: example has an empty loss mask");
  }
  ws.delta_out.resize(n);
  const Scalar scale = Scalar(2) / Scalar(count);
  Scalar loss = Scalar(0);
  for (Index i = 0; i < n; ++i) {
    if (mask(i)) {
      const Scalar e = ws.reconstruction(i) - target(i);
      loss += e * e;
      ws.delta_out(i) = scale * e * (ws.z2(i) > Scalar(0) ? Scalar(1) : alpha);
    } else {
      ws.delta_out(i) = Scalar(0);
    }
  }
  ws.delta_hidden.noalias() = model.decoder_w.transpose() * ws.delta_out;
  for (Index j = 0; j < ws.delta_hidden.size(); ++j) {
    if (ws.z1(j) <= Scalar(0)) ws.delta_hidden(j) *= alpha;
  }
  return loss / Scalar(count);
}

}  // namespace detail

// Exact gradients of the masked mse for one example.
template <typename Scalar, typename DX, typename DT, typename DM>
Gradients<Scalar> gradient(const Autoencoder<Scalar>& model, const Eigen::MatrixBase<DX>& x,
                           const Eigen::MatrixBase<DT>& target,
                           const Eigen::MatrixBase<DM>& mask) {
  detail::StepWorkspace<Scalar> ws;
  detail::forward_backward(model, x, target, mask, ws);
  Gradients<Scalar> g;
  g.decoder_w.noalias() = ws.delta_out * ws.hidden.transpose();
  g.decoder_b = ws.delta_out;
  g.encoder_w.noalias() = ws.delta_hidden * x.transpose();
  g.encoder_b = ws.delta_hidden;
  return g;
}

// Row-per-example training set. loss_masks limits the error to the
// coordinates that actually carry information.
template <typename Scalar>
struct TrainingCorpus {
  RowMatrix<Scalar> inputs;
  RowMatrix<Scalar> targets;
  RowMaskMatrix loss_masks;

  Index row_count() const { return inputs.rows(); }
  Index dim() const { return inputs.cols(); }
};

template <typename Scalar>
void validate_corpus(const TrainingCorpus<Scalar>& corpus) {
  if (corpus.row_count() < 1) {
    throw std::invalid_argument("corpus: needs at least one example");
  }
  if (corpus.targets.rows() != corpus.row_count() || corpus.targets.cols() != corpus.dim() ||
      corpus.loss_masks.rows() != corpus.row_count() ||
      corpus.loss_masks.cols() != corpus.dim()) {
    throw std::invalid_argument("corpus: shape mismatch");
  }
  for (Index r = 0; r < corpus.row_count(); ++r) {
    if (!corpus.loss_masks.row(r).any()) {
      throw std::invalid_argument("corpus: row " + std::to_string(r) +
                                  " has an empty loss mask");
    }
  }
}

struct TrainConfig {
  double learning_rate = 0.001;
  Index batch_size = 1;
  Index max_epochs = 50;
  Index patience = 10;  // consecutive non-improving epochs; 0 disables early stopping
  Index hidden_dim = 20;
  double alpha = 0.01;
  std::uint64_t seed = 0;
};

struct TrainDivergence : std::runtime_error {
  Index epoch;

  explicit TrainDivergence(Index e)
      : std::runtime_error("training diverged with non-finite loss at epoch " +
                           std::to_string(e)),
        epoch(e) {}
};

template <typename Scalar>
struct TrainResult {
  Autoencoder<Scalar> model;
  std::vector<double> train_loss;       // mean per-example loss per epoch
  std::vector<double> validation_loss;  // empty without a validation corpus
  Index best_epoch = -1;                // epoch of the returned model; -1 without validation
};

// Mean per-example masked mse of the whole corpus.
template <typename Scalar>
double corpus_loss(const Autoencoder<Scalar>& model, const TrainingCorpus<Scalar>& corpus) {
  validate_corpus(corpus);
  if (corpus.dim() != model.input_dim()) {
    throw std::invalid_argument("corpus_loss: dimension mismatch");
  }
  detail::StepWorkspace<Scalar> ws;
  double sum = 0.0;
  for (Index r = 0; r < corpus.row_count(); ++r) {
    const auto x = corpus.inputs.row(r).transpose();
    ws.z1.noalias() = model.encoder_w * x;
    ws.z1 += model.encoder_b;
    ws.hidden = leaky_relu(ws.z1, model.alpha);
    ws.z2.noalias() = model.decoder_w * ws.hidden;
    ws.z2 += model.decoder_b;
    ws.reconstruction = leaky_relu(ws.z2, model.alpha);
    sum += static_cast<double>(masked_mse(ws.reconstruction, corpus.targets.row(r).transpose(),
                                          corpus.loss_masks.row(r).transpose()));
  }
  return sum / static_cast<double>(corpus.row_count());
}

// Plain SGD over shuffled examples. With a validation corpus the model
// snapshot with the lowest validation loss is returned and training stops
// after `patience` epochs without improvement; otherwise the final model
// is returned.
template <typename Scalar>
TrainResult<Scalar> train(Autoencoder<Scalar> model, const TrainingCorpus<Scalar>& corpus,
                          const TrainConfig& cfg,
                          const TrainingCorpus<Scalar>* validation = nullptr) {
  validate_corpus(corpus);
  if (validation) validate_corpus(*validation);
  if (corpus.dim() != model.input_dim()) {
    throw std::invalid_argument("train: corpus dimension mismatch");
  }
  if (validation && validation->dim() != model.input_dim()) {
    throw std::invalid_argument("train: validation dimension mismatch");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning_rate must be positive");
  }
  if (cfg.batch_size < 1) {
    throw std::invalid_argument("train: batch_size must be at least one");
  }
  if (cfg.max_epochs < 0 || cfg.patience < 0) {
    throw std::invalid_argument("train: epochs and patience must be non-negative");
  }

  TrainResult<Scalar> out;
  const Index rows = corpus.row_count();
  std::vector<Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 gen(cfg.seed);
  detail::StepWorkspace<Scalar> ws;
  const auto lr = static_cast<Scalar>(cfg.learning_rate);

  Autoencoder<Scalar> best;
  double best_val = std::numeric_limits<double>::infinity();
  Index bad_epochs = 0;
  Gradients<Scalar> acc;

  for (Index epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng::shuffle(order, gen);
    double loss_sum = 0.0;
    if (cfg.batch_size == 1) {
      for (Index r : order) {
        const auto x = corpus.inputs.row(r).transpose();
        loss_sum += static_cast<double>(detail::forward_backward(
            model, x, corpus.targets.row(r).transpose(),
            corpus.loss_masks.row(r).transpose(), ws));
        model.decoder_w.noalias() -= lr * (ws.delta_out * ws.hidden.transpose());
        model.decoder_b -= lr * ws.delta_out;
        model.encoder_w.noalias() -= lr * (ws.delta_hidden * x.transpose());
        model.encoder_b -= lr * ws.delta_hidden;
      }
    } else {
      for (Index start = 0; start < rows; start += cfg.batch_size) {
        const Index stop = std::min(rows, start + cfg.batch_size);
        acc.encoder_w = Matrix<Scalar>::Zero(model.hidden_dim(), model.input_dim());
        acc.encoder_b = Vector<Scalar>::Zero(model.hidden_dim());
        acc.decoder_w = Matrix<Scalar>::Zero(model.input_dim(), model.hidden_dim());
        acc.decoder_b = Vector<Scalar>::Zero(model.input_dim());
        for (Index t = start; t < stop; ++t) {
          const Index r = order[static_cast<std::size_t>(t)];
          const auto x = corpus.inputs.row(r).transpose();
          loss_sum += static_cast<double>(detail::forward_backward(
              model, x, corpus.targets.row(r).transpose(),
              corpus.loss_masks.row(r).transpose(), ws));
          acc.decoder_w.noalias() += ws.delta_out * ws.hidden.transpose();
          acc.decoder_b += ws.delta_out;
          acc.encoder_w.noalias() += ws.delta_hidden * x.transpose();
          acc.encoder_b += ws.delta_hidden;
        }
        const auto step = lr / Scalar(stop - start);
        model.decoder_w -= step * acc.decoder_w;
        model.decoder_b -= step * acc.decoder_b;
        model.encoder_w -= step * acc.encoder_w;
        model.encoder_b -= step * acc.encoder_b;
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(rows);
    if (!std::isfinite(epoch_loss)) throw TrainDivergence(epoch);
    out.train_loss.push_back(epoch_loss);
    if (validation) {
      const double val = corpus_loss(model, *validation);
      out.validation_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        best = model;
        out.best_epoch = epoch;
        bad_epochs = 0;
      } else if (cfg.patience > 0 && ++bad_epochs >= cfg.patience) {
        break;
      }
    }
  }
  out.model = (validation && out.best_epoch >= 0) ? std::move(best) : std::move(model);
  return out;
}

// Feeds every masked row of the partial matrix through the model and
// averages the two directed predictions per pair. Unobserved inputs are
// zeroed regardless of what the value matrix holds.
template <typename Scalar>
Matrix<Scalar> predict_matrix(const Autoencoder<Scalar>& model, const PartialMatrix& p) {
  const Index n = p.size();
  if (n != model.input_dim()) {
    throw std::invalid_argument("predict_matrix: matrix size does not match the model");
  }
  Matrix<Scalar> pred(n, n);
  Vector<Scalar> x(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      x(j) = p.mask(i, j) ? static_cast<Scalar>(p.values(i, j)) : Scalar(0);
    }
    pred.row(i) = forward(model, x).reconstruction.transpose();
  }
  return ((pred + pred.transpose()) / Scalar(2)).eval();
}

// Fine-tuning corpus: each row of the partial matrix is both input and
// target, with the loss restricted to its observed entries. The diagonal
// is observed, so no row mask is empty.
inline TrainingCorpus<double> make_observed_corpus(const PartialMatrix& p) {
  const Index n = p.size();
  TrainingCorpus<double> corpus;
  corpus.inputs.resize(n, n);
  corpus.targets.resize(n, n);
  corpus.loss_masks.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double v = p.mask(i, j) ? p.values(i, j) : 0.0;
      corpus.inputs(i, j) = v;
      corpus.targets(i, j) = v;
      corpus.loss_masks(i, j) = p.mask(i, j);
    }
  }
  return corpus;
}

}  // namespace osp
