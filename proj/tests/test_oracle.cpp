#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "osp/graph.hpp"
#include "osp/oracle.hpp"
#include "osp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using osp::Index;
using osp::OracleConfig;
using osp::PartialMatrix;
using osp::Window;

namespace {

// Target network sample for the small end to end cases.
PartialMatrix sampled_target(Index n, int m, double p, double fraction,
                             std::uint64_t graph_seed, std::uint64_t sample_seed) {
  const auto g = osp::powerlaw_cluster_graph({n, m, p, graph_seed});
  return osp::sample_random_pairs(osp::hop_distance_matrix(g), fraction, sample_seed);
}

// Settings small enough that a full search stays in the millisecond range.
OracleConfig quick_config(std::uint64_t seed) {
  OracleConfig cfg;
  cfg.seed = seed;
  cfg.train.max_epochs = 15;
  cfg.train.hidden_dim = 10;
  return cfg;
}

}  // namespace

TEST_CASE("stage 0 windows follow the decade pattern") {
  const OracleConfig cfg;  // n_d = 100, broad_max = 100
  const auto windows = osp::build_stage0_windows(cfg);
  REQUIRE(windows.size() == 10);
  CHECK(windows.front() == Window{1, 5, 10});
  CHECK(windows[1] == Window{10, 15, 20});
  CHECK(windows.back() == Window{90, 95, 100});
}

TEST_CASE("stage 0 windows respect the broad maximum") {
  OracleConfig cfg;
  cfg.broad_max = 20;
  const auto windows = osp::build_stage0_windows(cfg);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0] == Window{1, 5, 10});
  CHECK(windows[1] == Window{10, 15, 20});
}

TEST_CASE("stage 0 windows stop at the n_d decade") {
  OracleConfig cfg;
  cfg.n_d = 53;
  const auto windows = osp::build_stage0_windows(cfg);
  REQUIRE(windows.size() == 6);
  CHECK(windows.back() == Window{50, 55, 60});
}

TEST_CASE("a single digit n_d skips stage 0") {
  OracleConfig cfg;
  cfg.n_d = 9;
  CHECK(osp::build_stage0_windows(cfg).empty());
}

TEST_CASE("stage 0 rejects degenerate settings") {
  OracleConfig cfg;
  cfg.n_d = 1;
  CHECK_THROWS_AS(osp::build_stage0_windows(cfg), std::invalid_argument);
  cfg.n_d = 100;
  cfg.broad_max = 0;
  CHECK_THROWS_AS(osp::build_stage0_windows(cfg), std::invalid_argument);
}

TEST_CASE("stage 1 slides a narrow window across the broad range") {
  const OracleConfig cfg;
  const auto low = osp::build_stage1_windows({1, 5, 10}, cfg);
  REQUIRE(low.size() == 5);
  CHECK(low[0] == Window{1, 2, 3});
  CHECK(low[1] == Window{3, 4, 5});
  CHECK(low[2] == Window{5, 6, 7});
  CHECK(low[3] == Window{7, 8, 9});
  CHECK(low[4] == Window{9, 10, 11});

  const auto high = osp::build_stage1_windows({10, 15, 20}, cfg);
  REQUIRE(high.size() == 5);
  CHECK(high.front() == Window{10, 11, 12});
  CHECK(high.back() == Window{18, 19, 20});
}

TEST_CASE("a minimal broad window refines to itself") {
  const OracleConfig cfg;
  const auto windows = osp::build_stage1_windows({1, 2, 3}, cfg);
  REQUIRE(windows.size() == 1);
  CHECK(windows[0] == Window{1, 2, 3});
}

TEST_CASE("stage 1 rejects malformed input") {
  OracleConfig cfg;
  CHECK_THROWS_AS(osp::build_stage1_windows({}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(osp::build_stage1_windows({3, 2}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(osp::build_stage1_windows({0, 5}, cfg), std::invalid_argument);
  cfg.stage1_width = 1;
  CHECK_THROWS_AS(osp::build_stage1_windows({1, 5, 10}, cfg), std::invalid_argument);
  cfg.stage1_width = 3;
  cfg.stage1_stride = 0;
  CHECK_THROWS_AS(osp::build_stage1_windows({1, 5, 10}, cfg), std::invalid_argument);
}

TEST_CASE("both stages together cover every candidate m up to n_d") {
  for (int n_d : {10, 35, 53, 100}) {
    OracleConfig cfg;
    cfg.n_d = n_d;
    std::vector<bool> seen(static_cast<std::size_t>(n_d) + 1, false);
    for (const Window& broad : osp::build_stage0_windows(cfg)) {
      for (int v : broad) {
        if (v <= n_d) seen[static_cast<std::size_t>(v)] = true;
      }
      for (const Window& w : osp::build_stage1_windows(broad, cfg)) {
        for (int v : w) {
          if (v <= n_d) seen[static_cast<std::size_t>(v)] = true;
        }
      }
    }
    for (int v = 1; v <= n_d; ++v) {
      CAPTURE(n_d);
      CAPTURE(v);
      CHECK(seen[static_cast<std::size_t>(v)]);
    }
  }
}

TEST_CASE("generate_corpus emits one block of rows per network") {
  const OracleConfig cfg = quick_config(7);
  const auto corpus = osp::generate_corpus({2, 3, 4}, 30, cfg, 0.5);
  // 3 m values x 9 p values x 1 replicate, 30 rows each
  CHECK(corpus.row_count() == 3 * 9 * 30);
  CHECK(corpus.dim() == 30);
  CHECK(corpus.loss_masks.all());
  for (Index r = 0; r < corpus.row_count(); ++r) {
    for (Index j = 0; j < 30; ++j) {
      const double in = corpus.inputs(r, j);
      CHECK((in == 0.0 || in == corpus.targets(r, j)));
    }
  }
}

TEST_CASE("a unit fraction keeps the corpus inputs complete") {
  const OracleConfig cfg = quick_config(3);
  const auto corpus = osp::generate_corpus({2, 3}, 25, cfg, 1.0);
  CHECK(corpus.inputs == corpus.targets);
}

TEST_CASE("fractional masking keeps roughly the requested share") {
  const OracleConfig cfg = quick_config(11);
  const auto corpus = osp::generate_corpus({3}, 40, cfg, 0.3);
  Index kept = 0;
  Index nonzero = 0;
  for (Index r = 0; r < corpus.row_count(); ++r) {
    for (Index j = 0; j < 40; ++j) {
      if (corpus.targets(r, j) == 0.0) continue;
      ++nonzero;
      if (corpus.inputs(r, j) != 0.0) ++kept;
    }
  }
  const double share = static_cast<double>(kept) / static_cast<double>(nonzero);
  CHECK(share > 0.25);
  CHECK(share < 0.35);
}

TEST_CASE("overlapping windows reuse the same networks") {
  const OracleConfig cfg = quick_config(19);
  const auto a = osp::generate_corpus({3, 4, 5}, 20, cfg, 1.0);
  const auto b = osp::generate_corpus({5, 6, 7}, 20, cfg, 1.0);
  // m = 5 occupies the last third of the first corpus and the first third
  // of the second one
  const Index block = 9 * 20;
  CHECK(a.targets.bottomRows(block) == b.targets.topRows(block));
}

TEST_CASE("generate_corpus is deterministic") {
  const OracleConfig cfg = quick_config(23);
  const auto a = osp::generate_corpus({2, 3}, 22, cfg, 0.4);
  const auto b = osp::generate_corpus({2, 3}, 22, cfg, 0.4);
  CHECK(a.inputs == b.inputs);
  CHECK(a.targets == b.targets);
}

TEST_CASE("generate_corpus validates its arguments") {
  OracleConfig cfg = quick_config(1);
  CHECK_THROWS_AS(osp::generate_corpus({}, 20, cfg, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(osp::generate_corpus({3, 3}, 20, cfg, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(osp::generate_corpus({0, 2}, 20, cfg, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(osp::generate_corpus({5, 20}, 20, cfg, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(osp::generate_corpus({2, 3}, 20, cfg, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(osp::generate_corpus({2, 3}, 20, cfg, 1.5), std::invalid_argument);
  cfg.p_values.clear();
  CHECK_THROWS_AS(osp::generate_corpus({2, 3}, 20, cfg, 0.5), std::invalid_argument);
  cfg = quick_config(1);
  cfg.networks_per_combo = 0;
  CHECK_THROWS_AS(osp::generate_corpus({2, 3}, 20, cfg, 0.5), std::invalid_argument);
}

TEST_CASE("evaluate_window produces finite deterministic scores") {
  const auto p = sampled_target(40, 3, 0.5, 0.3, 17, 5);
  const OracleConfig cfg = quick_config(2);
  const auto a = osp::evaluate_window({2, 3, 4}, p, cfg);
  const auto b = osp::evaluate_window({2, 3, 4}, p, cfg);
  CHECK(a.window == Window{2, 3, 4});
  CHECK(std::isfinite(a.validation_mean_error));
  CHECK(std::isfinite(a.validation_ahde));
  CHECK(a.validation_mean_error > 0.0);
  CHECK(a.validation_mean_error == b.validation_mean_error);
  CHECK(a.validation_ahde == b.validation_ahde);
}

TEST_CASE("evaluate_window can score against all observed pairs") {
  const auto p = sampled_target(40, 3, 0.5, 0.3, 17, 5);
  OracleConfig cfg = quick_config(2);
  cfg.validation_share = 0.0;
  const auto r = osp::evaluate_window({2, 3, 4}, p, cfg);
  CHECK(std::isfinite(r.validation_mean_error));

  cfg.validation_share = 1.0;
  CHECK_THROWS_AS(osp::evaluate_window({2, 3, 4}, p, cfg), std::invalid_argument);
}

TEST_CASE("a window near the true m scores better than a far one") {
  std::vector<double> near, far;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto p = sampled_target(60, 3, 0.5, 0.3, s * 17, s * 5);
    const OracleConfig cfg = quick_config(s);
    near.push_back(osp::evaluate_window({2, 3, 4}, p, cfg).validation_mean_error);
    far.push_back(osp::evaluate_window({13, 14, 15}, p, cfg).validation_mean_error);
  }
  std::sort(near.begin(), near.end());
  std::sort(far.begin(), far.end());
  CHECK(near[1] < far[1]);
}

TEST_CASE("training divergence is reported with the window") {
  const auto p = sampled_target(20, 2, 0.5, 0.5, 3, 1);
  OracleConfig cfg = quick_config(1);
  cfg.train.learning_rate = 1e6;
  cfg.train.max_epochs = 30;
  CHECK_THROWS_WITH_AS(osp::evaluate_window({1, 2, 3}, p, cfg),
                       doctest::Contains("window [1 2 3]"), std::runtime_error);
}

TEST_CASE("run_oracle refines, ranks and selects windows") {
  const auto p = sampled_target(60, 5, 0.5, 0.3, 101, 7);
  OracleConfig cfg = quick_config(1);
  cfg.n_d = 9;  // skips stage 0, refines over [1, 9]
  const auto res = osp::run_oracle(p, cfg);

  REQUIRE(res.reports.size() == 4);
  for (const auto& r : res.reports) CHECK(r.stage == 1);
  CHECK(res.reports[0].window == Window{1, 2, 3});
  CHECK(res.reports[3].window == Window{7, 8, 9});

  std::vector<int> ranks;
  for (const auto& r : res.reports) ranks.push_back(r.rank);
  std::sort(ranks.begin(), ranks.end());
  CHECK(ranks == std::vector<int>{1, 2, 3, 4});

  REQUIRE(res.selected.size() == 3);
  // the best report is the first selected window
  for (const auto& r : res.reports) {
    if (r.rank == 1) CHECK(r.window == res.selected.front());
  }
  CHECK(res.covering == osp::covering_m_values(res.selected));
}

TEST_CASE("run_oracle fills both stages when n_d allows a broad sweep") {
  const auto p = sampled_target(50, 3, 0.5, 0.4, 23, 9);
  OracleConfig cfg = quick_config(2);
  cfg.n_d = 20;
  cfg.broad_max = 20;
  const auto res = osp::run_oracle(p, cfg);
  int stage0 = 0;
  int stage1 = 0;
  for (const auto& r : res.reports) (r.stage == 0 ? stage0 : stage1)++;
  CHECK(stage0 == 2);  // [1 5 10] and [10 15 20]
  CHECK(stage1 == 5);
  CHECK(res.selected.size() == 3);
}

TEST_CASE("run_oracle honours top_k") {
  const auto p = sampled_target(40, 3, 0.5, 0.3, 31, 3);
  OracleConfig cfg = quick_config(3);
  cfg.n_d = 9;
  cfg.top_k = 1;
  const auto res = osp::run_oracle(p, cfg);
  REQUIRE(res.selected.size() == 1);
  CHECK(res.covering == res.selected.front());
}

TEST_CASE("run_oracle is deterministic") {
  const auto p = sampled_target(40, 3, 0.5, 0.3, 31, 3);
  const OracleConfig cfg = quick_config(5);
  OracleConfig small = cfg;
  small.n_d = 9;
  const auto a = osp::run_oracle(p, small);
  const auto b = osp::run_oracle(p, small);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].window == b.reports[i].window);
    CHECK(a.reports[i].validation_mean_error == b.reports[i].validation_mean_error);
    CHECK(a.reports[i].rank == b.reports[i].rank);
  }
  CHECK(a.selected == b.selected);
  CHECK(a.covering == b.covering);
}

TEST_CASE("unobserved value slots never influence the search") {
  auto p = sampled_target(40, 3, 0.5, 0.3, 31, 3);
  OracleConfig cfg = quick_config(5);
  cfg.n_d = 9;
  const auto clean = osp::run_oracle(p, cfg);

  for (Index i = 0; i < p.size(); ++i) {
    for (Index j = 0; j < p.size(); ++j) {
      if (!p.mask(i, j)) p.values(i, j) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  const auto poisoned = osp::run_oracle(p, cfg);
  REQUIRE(clean.reports.size() == poisoned.reports.size());
  for (std::size_t i = 0; i < clean.reports.size(); ++i) {
    CHECK(clean.reports[i].validation_mean_error ==
          poisoned.reports[i].validation_mean_error);
    CHECK(clean.reports[i].validation_ahde == poisoned.reports[i].validation_ahde);
  }
  CHECK(clean.selected == poisoned.selected);
}

TEST_CASE("the selected windows bracket the true m on most seeds") {
  int hits = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto p = sampled_target(60, 5, 0.5, 0.3, s * 101, s * 7);
    OracleConfig cfg = quick_config(s);
    cfg.n_d = 9;
    const auto res = osp::run_oracle(p, cfg);
    const bool hit = std::any_of(res.selected.begin(), res.selected.end(),
                                 [](const Window& w) {
                                   return std::any_of(w.begin(), w.end(), [](int m) {
                                     return m >= 3 && m <= 7;
                                   });
                                 });
    if (hit) ++hits;
  }
  CHECK(hits >= 4);
}

TEST_CASE("three chained windows cover through their leads") {
  const std::vector<Window> chained = {{5, 6, 7}, {7, 8, 9}, {9, 10, 11}};
  CHECK(osp::covering_m_values(chained) == std::vector<int>{5, 7, 9});

  // selection order does not matter
  const std::vector<Window> shuffled = {{9, 10, 11}, {5, 6, 7}, {7, 8, 9}};
  CHECK(osp::covering_m_values(shuffled) == std::vector<int>{5, 7, 9});
}

TEST_CASE("windows that do not chain fall back to the union") {
  const std::vector<Window> gapped = {{1, 2, 3}, {7, 8, 9}, {9, 10, 11}};
  CHECK(osp::covering_m_values(gapped) == std::vector<int>{1, 2, 3, 7, 8, 9, 10, 11});

  const std::vector<Window> pair = {{3, 4, 5}, {5, 6, 7}};
  CHECK(osp::covering_m_values(pair) == std::vector<int>{3, 4, 5, 6, 7});

  const std::vector<Window> one = {{2, 3, 4}};
  CHECK(osp::covering_m_values(one) == std::vector<int>{2, 3, 4});

  CHECK_THROWS_AS(osp::covering_m_values({}), std::invalid_argument);
}

TEST_CASE("stage2_predict returns a post-processed symmetric prediction") {
  const auto p = sampled_target(40, 3, 0.5, 0.2, 11, 2);
  OracleConfig cfg = quick_config(4);
  cfg.train.max_epochs = 10;
  cfg.finetune.max_epochs = 40;
  const auto pre = osp::stage2_predict(p, {2, 3, 4}, cfg, false);
  const auto tuned = osp::stage2_predict(p, {2, 3, 4}, cfg, true);

  CHECK(pre.diagonal().isZero());
  CHECK(tuned.diagonal().isZero());
  CHECK(pre == pre.transpose().eval());
  for (Index i = 0; i < 40; ++i) {
    for (Index j = 0; j < 40; ++j) {
      if (i == j) continue;
      CHECK((pre(i, j) == 0.0 || pre(i, j) >= 1.0));
    }
  }
  CHECK(pre != tuned);
}

TEST_CASE("fine tuning improves the fit on the observed pairs") {
  const auto p = sampled_target(40, 3, 0.5, 0.2, 11, 2);
  OracleConfig cfg = quick_config(4);
  cfg.train.max_epochs = 10;
  cfg.finetune.max_epochs = 40;
  const auto pre = osp::stage2_predict(p, {2, 3, 4}, cfg, false);
  const auto tuned = osp::stage2_predict(p, {2, 3, 4}, cfg, true);

  double pre_err = 0.0;
  double tuned_err = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    for (Index j = i + 1; j < p.size(); ++j) {
      if (!p.mask(i, j)) continue;
      pre_err += std::abs(pre(i, j) - p.values(i, j));
      tuned_err += std::abs(tuned(i, j) - p.values(i, j));
    }
  }
  CHECK(tuned_err < pre_err);
}

TEST_CASE("stage2_predict is deterministic") {
  const auto p = sampled_target(30, 2, 0.5, 0.3, 13, 6);
  OracleConfig cfg = quick_config(9);
  cfg.train.max_epochs = 10;
  cfg.finetune.max_epochs = 20;
  const auto a = osp::stage2_predict(p, {1, 2, 3}, cfg, true);
  const auto b = osp::stage2_predict(p, {1, 2, 3}, cfg, true);
  CHECK(a == b);
}

TEST_CASE("window reports serialize to the expected csv") {
  std::vector<osp::WindowReport> reports(2);
  reports[0].window = {1, 5, 10};
  reports[0].stage = 0;
  reports[0].validation_mean_error = 0.25;
  reports[0].validation_ahde = 0.5;
  reports[0].rank = 1;
  reports[1].window = {3, 4, 5};
  reports[1].stage = 1;
  reports[1].validation_mean_error = 0.125;
  reports[1].validation_ahde = 0.375;
  reports[1].rank = 2;

  std::ostringstream out;
  osp::write_window_reports_csv(reports, out);
  CHECK(out.str() ==
        "stage,window,mean_error,ahde,rank\n"
        "0,1|5|10,0.25,0.5,1\n"
        "1,3|4|5,0.125,0.375,2\n");
}

TEST_CASE("oracle defaults line up with the two stage search") {
  const OracleConfig cfg;
  CHECK(cfg.n_d == 100);
  CHECK(cfg.top_k == 3);
  CHECK(cfg.p_values.size() == 9);
  CHECK(cfg.validation_share == 0.2);
  CHECK(cfg.train.max_epochs == 50);
  CHECK(cfg.finetune.max_epochs == 20);
  CHECK(cfg.train_fraction_match);
}
