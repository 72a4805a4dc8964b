#pragma once

#include "osp/autoencoder.hpp"
#include "osp/sampling.hpp"
#include "osp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace osp {

// A short strictly increasing list of candidate m values tried together as
// one pre-training configuration.
using Window = std::vector<int>;

// Controls the two-stage window search and the final pre-train/fine-tune
// pass. n_d is the assumed upper bound on the target's average degree and
// caps the m range worth searching; it is not the graph size.
struct OracleConfig {
  int n_d = 100;
  int broad_max = 100;    // hard cap on stage-0 window values
  int stage1_width = 3;   // consecutive m values per refinement window
  int stage1_stride = 2;  // step between refinement window leads
  std::vector<double> p_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int networks_per_combo = 1;
  bool train_fraction_match = true;  // mask corpus inputs at the observed fraction
  double validation_share = 0.2;     // 0 scores windows on all observed pairs
  int top_k = 3;
  std::uint64_t seed = 0;
  TrainConfig train;     // pre-training, both for window scoring and stage 2
  TrainConfig finetune;  // continued training on the observed rows

  // Fine-tuning sees only the sampled pairs, so a long run drifts away
  // from everything the corpus taught about the unobserved ones. A short
  // budget adapts the model without wiping that prior out.
  OracleConfig() { finetune.max_epochs = 20; }
};

// Scores of one evaluated window, ranked within its stage (1 = best).
struct WindowReport {
  Window window;
  int stage = 0;
  double validation_mean_error = 0.0;
  double validation_ahde = 0.0;
  int rank = 0;
};

struct OracleResult {
  std::vector<WindowReport> reports;  // every evaluated window, both stages
  std::vector<Window> selected;       // top_k refinement windows, best first
  std::vector<int> covering;          // m values feeding the final pre-training
};

// Broad windows [1,5,10], [10,15,20], ... while the window maximum stays
// within min(broad_max, n_d rounded up to a multiple of 10). Empty when
// n_d < 10; the caller falls back to a single coarse window.
std::vector<Window> build_stage0_windows(const OracleConfig& cfg);

// Consecutive-integer windows of stage1_width starting at the broad
// window's lead, advancing by stage1_stride until the broad maximum is
// reached.
std::vector<Window> build_stage1_windows(const Window& broad, const OracleConfig& cfg);

// Synthetic training rows: for every m in the window, every p and every
// replicate, one generated graph contributes all n rows of its hop
// distance matrix. Targets are complete rows; inputs keep each entry with
// probability `fraction`. Network seeds depend only on (m, p, replicate),
// so overlapping windows share graphs.
TrainingCorpus<double> generate_corpus(const Window& window, Index n,
                                       const OracleConfig& cfg, double fraction);

// Trains a fresh model on the window's corpus, predicts the target matrix
// from the training part of the observed sample and scores against the
// held-out part. stage and rank are left for the caller.
WindowReport evaluate_window(const Window& window, const PartialMatrix& p,
                             const OracleConfig& cfg);

// Full two-stage search: broad sweep, refinement around the best broad
// window, top_k selection.
OracleResult run_oracle(const PartialMatrix& p, const OracleConfig& cfg);

// m values used for the final pre-training: the window leads when exactly
// three selected windows chain together (each overlaps the next), the
// sorted union of all window values otherwise.
std::vector<int> covering_m_values(const std::vector<Window>& selected);

// Pre-trains on the covering m values and optionally fine-tunes on the
// observed rows, returning the post-processed predicted matrix.
Matrix<double> stage2_predict(const PartialMatrix& p, const std::vector<int>& m_values,
                              const OracleConfig& cfg, bool fine_tune);

// "stage,window,mean_error,ahde,rank" rows; window values joined by '|'.
void write_window_reports_csv(const std::vector<WindowReport>& reports, std::ostream& out);

}  // namespace osp
