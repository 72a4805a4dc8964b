#include "CLI11.hpp"

#include "osp/experiment.hpp"
#include "osp/format.hpp"
#include "osp/graph.hpp"
#include "osp/metrics.hpp"
#include "osp/oracle.hpp"
#include "osp/sampling.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed writing " + path.string());
  }
}

void print_cells(const osp::ExperimentReport& report) {
  std::printf("%-16s %-10s %-6s %-12s %-12s %s\n", "method", "fraction", "seed",
              "mean_error", "ahde", "pairs");
  for (const auto& cell : report.cells) {
    if (cell.ok) {
      std::printf("%-16s %-10s %-6llu %-12.6f %-12.6f %lld\n",
                  osp::method_name(cell.method).c_str(),
                  osp::format_double(cell.fraction).c_str(),
                  static_cast<unsigned long long>(cell.seed), cell.eval.mean_error,
                  cell.eval.ahde, static_cast<long long>(cell.eval.pair_count));
    } else {
      std::printf("%-16s %-10s %-6llu failed: %s\n",
                  osp::method_name(cell.method).c_str(),
                  osp::format_double(cell.fraction).c_str(),
                  static_cast<unsigned long long>(cell.seed), cell.error.c_str());
    }
  }
}

int cmd_run(const std::string& config_path, const std::string& format) {
  const osp::ExperimentConfig cfg = osp::parse_config_file(config_path);
  const osp::ExperimentReport report = osp::run_experiment(cfg);

  const std::filesystem::path out_dir = osp::resolve_output_dir(cfg);
  std::filesystem::create_directories(out_dir);

  if (format == "csv" || format == "both") {
    std::ostringstream csv;
    osp::write_report_csv(report, csv);
    write_file(out_dir / "report.csv", csv.str());
  }
  if (format == "json" || format == "both") {
    std::ostringstream json;
    osp::write_report_json(report, json);
    write_file(out_dir / "report.json", json.str());
  }
  for (const auto& trace : report.oracle_traces) {
    std::ostringstream windows;
    osp::write_window_reports_csv(trace.windows, windows);
    const std::string name = "windows_f" + osp::format_double(trace.fraction) + "_s" +
                             std::to_string(trace.seed) + ".csv";
    write_file(out_dir / name, windows.str());
  }
  {
    std::ostringstream sv;
    osp::write_singular_values_csv(report.singular_values, sv);
    write_file(out_dir / "singular_values.csv", sv.str());
  }

  print_cells(report);
  std::printf("reports written to %s\n", out_dir.string().c_str());
  if (report.has_failures()) {
    std::fprintf(stderr, "some cells failed; see the report for details\n");
    return 2;
  }
  return 0;
}

int cmd_oracle(const std::string& dataset, double fraction, std::uint64_t seed,
               const osp::OracleConfig& base) {
  const osp::Dataset ds = osp::load_dataset(dataset);
  const osp::PartialMatrix p = osp::sample_random_pairs(ds.hops, fraction, seed);
  osp::OracleConfig cfg = base;
  cfg.seed = seed;
  const osp::OracleResult res = osp::run_oracle(p, cfg);

  std::ostringstream csv;
  osp::write_window_reports_csv(res.reports, csv);
  std::fputs(csv.str().c_str(), stdout);
  std::printf("selected:");
  for (const auto& w : res.selected) {
    std::printf(" [");
    for (std::size_t i = 0; i < w.size(); ++i) std::printf(i ? " %d" : "%d", w[i]);
    std::printf("]");
  }
  std::printf("\ncovering:");
  for (int m : res.covering) std::printf(" %d", m);
  std::printf("\n");
  return 0;
}

int cmd_svd(const std::string& dataset, const std::string& out_path) {
  const osp::Dataset ds = osp::load_dataset(dataset);
  const Eigen::VectorXd sv = osp::singular_value_profile(ds.hops);
  std::ostringstream csv;
  osp::write_singular_values_csv(sv, csv);
  if (out_path.empty()) {
    std::fputs(csv.str().c_str(), stdout);
  } else {
    write_file(out_path, csv.str());
    std::printf("singular values written to %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_complete(const std::string& dataset, double fraction, const std::string& method,
                 std::uint64_t seed) {
  osp::ExperimentConfig cfg;
  cfg.dataset = dataset;
  cfg.fractions = {fraction};
  cfg.methods = {osp::parse_method(method)};
  cfg.seeds = {seed};
  const osp::ExperimentReport report = osp::run_experiment(cfg);
  print_cells(report);
  return report.has_failures() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hop distance prediction from sampled node pairs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string format = "both";
  auto* run = app.add_subcommand("run", "run a configured experiment grid");
  run->add_option("--config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--format", format, "report format: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  std::string dataset;
  double fraction = 0.01;
  std::uint64_t seed = 1;
  osp::OracleConfig oracle_base;
  auto* oracle = app.add_subcommand("oracle", "run the two stage window search");
  oracle->add_option("--dataset", dataset, "edge list path or powerlaw:n,m,p,seed")
      ->required();
  oracle->add_option("--fraction", fraction, "sampled fraction of node pairs")
      ->required()
      ->check(CLI::Range(1e-9, 1.0));
  oracle->add_option("--seed", seed, "sampling and training seed");
  oracle->add_option("--n-d", oracle_base.n_d, "assumed average degree upper bound");
  oracle->add_option("--top-k", oracle_base.top_k, "windows kept after refinement");
  oracle->add_option("--epochs", oracle_base.train.max_epochs,
                     "pre-training epochs per window");
  oracle->add_option("--hidden-dim", oracle_base.train.hidden_dim,
                     "autoencoder hidden width");
  oracle->add_option("--validation-share", oracle_base.validation_share,
                     "held out share of the observed pairs");

  std::string svd_dataset;
  std::string svd_out;
  auto* svd = app.add_subcommand("svd", "dump the hop matrix singular value profile");
  svd->add_option("--dataset", svd_dataset, "edge list path or powerlaw:n,m,p,seed")
      ->required();
  svd->add_option("--out", svd_out, "output csv path (stdout when omitted)");

  std::string c_dataset;
  double c_fraction = 0.01;
  std::string c_method = "mc";
  std::uint64_t c_seed = 1;
  auto* complete = app.add_subcommand("complete", "predict one sampled instance");
  complete->add_option("--dataset", c_dataset, "edge list path or powerlaw:n,m,p,seed")
      ->required();
  complete->add_option("--fraction", c_fraction, "sampled fraction of node pairs")
      ->required()
      ->check(CLI::Range(1e-9, 1.0));
  complete->add_option("--method", c_method,
                       "osp, osp_no_finetune, observed_only, mc, trivial0 or trivial1");
  complete->add_option("--seed", c_seed, "sampling and training seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, format);
    if (oracle->parsed()) return cmd_oracle(dataset, fraction, seed, oracle_base);
    if (svd->parsed()) return cmd_svd(svd_dataset, svd_out);
    if (complete->parsed()) return cmd_complete(c_dataset, c_fraction, c_method, c_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
