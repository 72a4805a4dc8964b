#include "osp/oracle.hpp"

#include "osp/format.hpp"
#include "osp/graph.hpp"
#include "osp/metrics.hpp"
#include "osp/rng.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace osp {

namespace {

// Seed streams derived from cfg.seed. The split, init and shuffle streams
// are shared by every window so that window scores differ only through the
// corpus itself; network streams start at 8 and are keyed by
// (m, p index, replicate), which lets overlapping windows reuse graphs.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kTrainStream = 3;
constexpr std::uint64_t kFinetuneStream = 4;

std::uint64_t network_stream(int m, std::size_t p_index, int replicate) {
  const std::uint64_t key = (static_cast<std::uint64_t>(m) << 24) |
                            (static_cast<std::uint64_t>(p_index) << 8) |
                            static_cast<std::uint64_t>(replicate);
  return 8 + 2 * key;
}

void validate_window(const Window& w, const char* what) {
  if (w.empty()) {
    throw std::invalid_argument(std::string(what) + ": window is empty");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 1) {
      throw std::invalid_argument(std::string(what) + ": m values must be at least 1");
    }
    if (i > 0 && w[i] <= w[i - 1]) {
      throw std::invalid_argument(std::string(what) +
                                  ": m values must be strictly increasing");
    }
  }
}

std::string window_label(const Window& w) {
  std::string s = "[";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) s += ' ';
    s += std::to_string(w[i]);
  }
  s += ']';
  return s;
}

bool windows_overlap(const Window& a, const Window& b) {
  for (int v : a) {
    if (std::find(b.begin(), b.end(), v) != b.end()) return true;
  }
  return false;
}

// Trains a fresh model on the corpus, converting a divergence into an
// error that names the failing configuration.
Autoencoder<double> train_fresh(const TrainingCorpus<double>& corpus, Index n,
                                const OracleConfig& cfg, const std::string& label) {
  Autoencoder<double> model =
      init_model<double>(n, cfg.train.hidden_dim, cfg.train.alpha,
                         rng::derive(cfg.seed, kInitStream));
  TrainConfig tcfg = cfg.train;
  tcfg.seed = rng::derive(cfg.seed, kTrainStream);
  try {
    return train(std::move(model), corpus, tcfg).model;
  } catch (const TrainDivergence& e) {
    throw std::runtime_error(label + ": " + e.what());
  }
}

}  // namespace

std::vector<Window> build_stage0_windows(const OracleConfig& cfg) {
  if (cfg.n_d < 2) {
    throw std::invalid_argument("build_stage0_windows: n_d must be at least 2");
  }
  if (cfg.broad_max < 1) {
    throw std::invalid_argument("build_stage0_windows: broad_max must be positive");
  }
  std::vector<Window> out;
  if (cfg.n_d < 10) return out;
  const int cap = std::min(cfg.broad_max, 10 * ((cfg.n_d + 9) / 10));
  for (int k = 0;; ++k) {
    Window w = {k == 0 ? 1 : 10 * k, 10 * k + 5, 10 * (k + 1)};
    if (w.back() > cap) break;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Window> build_stage1_windows(const Window& broad, const OracleConfig& cfg) {
  validate_window(broad, "build_stage1_windows");
  if (cfg.stage1_width < 2) {
    throw std::invalid_argument("build_stage1_windows: width must be at least 2");
  }
  if (cfg.stage1_stride < 1) {
    throw std::invalid_argument("build_stage1_windows: stride must be positive");
  }
  const int lo = broad.front();
  const int hi = broad.back();
  const int count =
      std::max(1, (hi - lo + cfg.stage1_stride - 1) / cfg.stage1_stride);
  std::vector<Window> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Window w(static_cast<std::size_t>(cfg.stage1_width));
    for (int i = 0; i < cfg.stage1_width; ++i) {
      w[static_cast<std::size_t>(i)] = lo + k * cfg.stage1_stride + i;
    }
    out.push_back(std::move(w));
  }
  return out;
}

TrainingCorpus<double> generate_corpus(const Window& window, Index n,
                                       const OracleConfig& cfg, double fraction) {
  validate_window(window, "generate_corpus");
  if (n < 2) {
    throw std::invalid_argument("generate_corpus: matrix size must be at least 2");
  }
  if (window.back() >= n) {
    throw std::invalid_argument("generate_corpus: m value " +
                                std::to_string(window.back()) +
                                " must be below the node count " + std::to_string(n));
  }
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("generate_corpus: fraction must be in (0, 1]");
  }
  if (cfg.p_values.empty()) {
    throw std::invalid_argument("generate_corpus: p_values is empty");
  }
  for (double p : cfg.p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("generate_corpus: p values must be in [0, 1]");
    }
  }
  if (cfg.networks_per_combo < 1) {
    throw std::invalid_argument("generate_corpus: networks_per_combo must be positive");
  }

  const Index networks = static_cast<Index>(window.size()) *
                         static_cast<Index>(cfg.p_values.size()) * cfg.networks_per_combo;
  TrainingCorpus<double> corpus;
  corpus.inputs.resize(networks * n, n);
  corpus.targets.resize(networks * n, n);
  corpus.loss_masks.resize(networks * n, n);
  corpus.loss_masks.setConstant(true);

  Index row = 0;
  for (int m : window) {
    for (std::size_t pi = 0; pi < cfg.p_values.size(); ++pi) {
      for (int rep = 0; rep < cfg.networks_per_combo; ++rep) {
        const std::uint64_t stream = network_stream(m, pi, rep);
        GeneratorParams params{n, m, cfg.p_values[pi], rng::derive(cfg.seed, stream)};
        const HopDistanceMatrix h = hop_distance_matrix(powerlaw_cluster_graph(params));
        std::mt19937_64 mask_gen(rng::derive(cfg.seed, stream + 1));
        for (Index i = 0; i < n; ++i, ++row) {
          for (Index j = 0; j < n; ++j) {
            const double v = static_cast<double>(h.entries(i, j));
            corpus.targets(row, j) = v;
            corpus.inputs(row, j) = rng::canonical(mask_gen) < fraction ? v : 0.0;
          }
        }
      }
    }
  }
  return corpus;
}

WindowReport evaluate_window(const Window& window, const PartialMatrix& p,
                             const OracleConfig& cfg) {
  validate_window(window, "evaluate_window");
  if (!(cfg.validation_share >= 0.0 && cfg.validation_share < 1.0)) {
    throw std::invalid_argument("evaluate_window: validation_share must be in [0, 1)");
  }

  PartialMatrix train_part;
  train_part.values = p.values;
  train_part.sampled_fraction = p.sampled_fraction;
  MaskMatrix eval_mask;
  if (cfg.validation_share > 0.0) {
    const SplitMask split =
        split_observed(p, cfg.validation_share, rng::derive(cfg.seed, kSplitStream));
    train_part.mask = split.train_mask;
    eval_mask = split.validation_mask;
  } else {
    // Without a held-out share the window is scored on everything
    // observed and the training input keeps all of it.
    train_part.mask = p.mask;
    eval_mask = p.mask;
    eval_mask.diagonal().setConstant(false);
  }

  const double fraction = cfg.train_fraction_match ? p.sampled_fraction : 1.0;
  const TrainingCorpus<double> corpus = generate_corpus(window, p.size(), cfg, fraction);
  const Autoencoder<double> model =
      train_fresh(corpus, p.size(), cfg, "window " + window_label(window));

  const Matrix<double> pred = postprocess(predict_matrix(model, train_part));
  const EvalResult r = evaluate(pred, p.values, eval_mask);

  WindowReport report;
  report.window = window;
  report.validation_mean_error = r.mean_error;
  report.validation_ahde = r.ahde;
  return report;
}

OracleResult run_oracle(const PartialMatrix& p, const OracleConfig& cfg) {
  if (cfg.n_d < 2) {
    throw std::invalid_argument("run_oracle: n_d must be at least 2");
  }
  if (cfg.top_k < 1) {
    throw std::invalid_argument("run_oracle: top_k must be positive");
  }

  OracleResult out;

  // Orders report indices by score, ties to the smaller lead m.
  const auto rank_order = [](const std::vector<WindowReport>& reports) {
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const WindowReport& ra = reports[a];
      const WindowReport& rb = reports[b];
      if (ra.validation_mean_error != rb.validation_mean_error) {
        return ra.validation_mean_error < rb.validation_mean_error;
      }
      return ra.window.front() < rb.window.front();
    });
    return order;
  };

  Window best_broad;
  const std::vector<Window> stage0 = build_stage0_windows(cfg);
  if (stage0.empty()) {
    // n_d below the first decade: skip the broad sweep and refine over a
    // single coarse window spanning [1, n_d].
    best_broad = {1};
    const int mid = (1 + cfg.n_d) / 2;
    if (mid > 1 && mid < cfg.n_d) best_broad.push_back(mid);
    if (cfg.n_d > 1) best_broad.push_back(cfg.n_d);
  } else {
    std::vector<WindowReport> broad_reports;
    broad_reports.reserve(stage0.size());
    for (const Window& w : stage0) {
      WindowReport r = evaluate_window(w, p, cfg);
      r.stage = 0;
      broad_reports.push_back(std::move(r));
    }
    const std::vector<std::size_t> order = rank_order(broad_reports);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      broad_reports[order[pos]].rank = static_cast<int>(pos) + 1;
    }
    best_broad = broad_reports[order.front()].window;
    for (WindowReport& r : broad_reports) out.reports.push_back(std::move(r));
  }

  std::vector<WindowReport> narrow_reports;
  for (const Window& w : build_stage1_windows(best_broad, cfg)) {
    WindowReport r = evaluate_window(w, p, cfg);
    r.stage = 1;
    narrow_reports.push_back(std::move(r));
  }
  const std::vector<std::size_t> order = rank_order(narrow_reports);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    narrow_reports[order[pos]].rank = static_cast<int>(pos) + 1;
  }
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k),
                                                 narrow_reports.size());
  for (std::size_t pos = 0; pos < keep; ++pos) {
    out.selected.push_back(narrow_reports[order[pos]].window);
  }
  for (WindowReport& r : narrow_reports) out.reports.push_back(std::move(r));

  out.covering = covering_m_values(out.selected);
  return out;
}

std::vector<int> covering_m_values(const std::vector<Window>& selected) {
  if (selected.empty()) {
    throw std::invalid_argument("covering_m_values: no windows selected");
  }
  for (const Window& w : selected) validate_window(w, "covering_m_values");

  std::vector<Window> sorted = selected;
  std::sort(sorted.begin(), sorted.end());

  if (sorted.size() == 3) {
    const bool chained = windows_overlap(sorted[0], sorted[1]) &&
                         windows_overlap(sorted[1], sorted[2]);
    const bool distinct_leads =
        sorted[0].front() < sorted[1].front() && sorted[1].front() < sorted[2].front();
    if (chained && distinct_leads) {
      return {sorted[0].front(), sorted[1].front(), sorted[2].front()};
    }
  }

  std::set<int> values;
  for (const Window& w : sorted) values.insert(w.begin(), w.end());
  return std::vector<int>(values.begin(), values.end());
}

Matrix<double> stage2_predict(const PartialMatrix& p, const std::vector<int>& m_values,
                              const OracleConfig& cfg, bool fine_tune) {
  validate_window(m_values, "stage2_predict");
  const double fraction = cfg.train_fraction_match ? p.sampled_fraction : 1.0;
  const TrainingCorpus<double> corpus = generate_corpus(m_values, p.size(), cfg, fraction);
  Autoencoder<double> model =
      train_fresh(corpus, p.size(), cfg, "pre-training " + window_label(m_values));

  if (fine_tune) {
    const TrainingCorpus<double> observed = make_observed_corpus(p);
    TrainConfig ft = cfg.finetune;
    ft.seed = rng::derive(cfg.seed, kFinetuneStream);
    try {
      model = train(std::move(model), observed, ft).model;
    } catch (const TrainDivergence& e) {
      throw std::runtime_error("fine-tuning " + window_label(m_values) + ": " + e.what());
    }
  }
  return postprocess(predict_matrix(model, p));
}

void write_window_reports_csv(const std::vector<WindowReport>& reports, std::ostream& out) {
  out << "stage,window,mean_error,ahde,rank\n";
  for (const WindowReport& r : reports) {
    out << r.stage << ',';
    for (std::size_t i = 0; i < r.window.size(); ++i) {
      if (i > 0) out << '|';
      out << r.window[i];
    }
    out << ',' << format_double(r.validation_mean_error) << ','
        << format_double(r.validation_ahde) << ',' << r.rank << '\n';
  }
}

}  // namespace osp
