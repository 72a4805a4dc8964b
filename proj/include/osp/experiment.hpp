#pragma once

#include "osp/graph.hpp"
#include "osp/metrics.hpp"
#include "osp/oracle.hpp"
#include "osp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace osp {

enum class Method { osp, osp_no_finetune, observed_only, mc, trivial0, trivial1 };

// The fixed spellings used in configs, reports and on the command line.
const std::string& method_name(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  std::string dataset;  // file path or generator spec, mandatory
  std::vector<double> fractions = {0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8};
  std::vector<Method> methods = {Method::osp,          Method::osp_no_finetune,
                                 Method::observed_only, Method::mc,
                                 Method::trivial0,      Method::trivial1};
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = ".";
  OracleConfig oracle;
  TrainConfig train;  // the observed-only baseline's training budget

  // The baseline gets the same budget as the fine-tuning stage so the
  // comparison is about pre-training, not epochs.
  ExperimentConfig() { train.max_epochs = 200; }
};

// Flat "key = value" lines, '#' comments, lists comma separated. Nested
// settings use dotted keys (oracle.n_d, oracle.train.max_epochs, ...).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Output directory after the environment override (OSP_OUTPUT_DIR).
std::string resolve_output_dir(const ExperimentConfig& cfg);

// A loaded target network: generated on the fly or read from an edge list
// and reduced to its largest connected component.
struct Dataset {
  std::string name;
  HopDistanceMatrix hops;
  Index original_node_count = 0;  // before the component reduction
};

// "powerlaw:N,m,p,seed" generates; anything else is an edge list path.
Dataset load_dataset(const std::string& spec);

struct CellResult {
  Method method = Method::trivial0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  EvalResult eval;    // valid when ok
  std::string error;  // set when not ok
};

// Window search outcome for one (fraction, seed), shared by both osp
// variants.
struct OracleTrace {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<WindowReport> windows;
  std::vector<Window> selected;
  std::vector<int> covering;
};

struct ExperimentReport {
  std::string dataset;
  Index node_count = 0;
  std::vector<CellResult> cells;  // seed-major, then fraction, then method
  std::vector<OracleTrace> oracle_traces;
  Eigen::VectorXd singular_values;  // profile of the target's hop matrix

  bool has_failures() const;
};

// Runs the full (seed x fraction x method) grid. A failing cell records
// its error and the sweep continues.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// "method,fraction,seed,mean_error,ahde,pair_count" rows in grid order;
// failed cells carry nan metrics and a zero pair count.
void write_report_csv(const ExperimentReport& report, std::ostream& out);

// Everything in the CSV plus errors, the oracle traces and the singular
// value profile. Byte stable for identical reports.
void write_report_json(const ExperimentReport& report, std::ostream& out);
ExperimentReport read_report_json(std::istream& in);

// "index,sigma,log10_sigma" rows for a singular value profile.
void write_singular_values_csv(const Eigen::VectorXd& values, std::ostream& out);

}  // namespace osp
