#include "osp/experiment.hpp"

#include "osp/autoencoder.hpp"
#include "osp/format.hpp"
#include "osp/matrix_completion.hpp"
#include "osp/rng.hpp"
#include "osp/sampling.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace osp {

namespace {

const std::vector<std::pair<Method, std::string>>& method_table() {
  static const std::vector<std::pair<Method, std::string>> table = {
      {Method::osp, "osp"},
      {Method::osp_no_finetune, "osp_no_finetune"},
      {Method::observed_only, "observed_only"},
      {Method::mc, "mc"},
      {Method::trivial0, "trivial0"},
      {Method::trivial1, "trivial1"},
  };
  return table;
}

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("parse_config: " + why + " for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    bad_key(key, "expected a number, got '" + text + "'");
  }
  if (used != text.size()) bad_key(key, "expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    bad_key(key, "expected an integer, got '" + text + "'");
  }
  if (used != text.size()) bad_key(key, "expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    bad_key(key, "expected a seed, got '" + text + "'");
  }
  if (used != text.size() || text.front() == '-') {
    bad_key(key, "expected a seed, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  bad_key(key, "expected true or false, got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& key, const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) bad_key(key, "empty list element");
    items.push_back(item);
  }
  if (items.empty()) bad_key(key, "empty list");
  return items;
}

// Assigns the shared TrainConfig keys; the prefix names the subsection in
// errors.
bool apply_train_key(TrainConfig& train, const std::string& prefix, const std::string& key,
                     const std::string& full_key, const std::string& value) {
  if (key == prefix + ".learning_rate") {
    train.learning_rate = parse_double(full_key, value);
    if (!(train.learning_rate > 0.0)) bad_key(full_key, "must be positive");
  } else if (key == prefix + ".batch_size") {
    train.batch_size = parse_integer(full_key, value);
    if (train.batch_size < 1) bad_key(full_key, "must be at least 1");
  } else if (key == prefix + ".max_epochs") {
    train.max_epochs = parse_integer(full_key, value);
    if (train.max_epochs < 0) bad_key(full_key, "must be non-negative");
  } else if (key == prefix + ".patience") {
    train.patience = parse_integer(full_key, value);
    if (train.patience < 0) bad_key(full_key, "must be non-negative");
  } else if (key == prefix + ".hidden_dim") {
    train.hidden_dim = parse_integer(full_key, value);
    if (train.hidden_dim < 1) bad_key(full_key, "must be at least 1");
  } else if (key == prefix + ".alpha") {
    train.alpha = parse_double(full_key, value);
    if (!(train.alpha > 0.0 && train.alpha < 1.0)) bad_key(full_key, "must be in (0, 1)");
  } else {
    return false;
  }
  return true;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) {
    throw std::invalid_argument("config: dataset is required");
  }
  if (cfg.fractions.empty()) {
    throw std::invalid_argument("config: at least one fraction is required");
  }
  for (double f : cfg.fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("config: fractions must be in (0, 1]");
    }
  }
  if (cfg.methods.empty()) {
    throw std::invalid_argument("config: at least one method is required");
  }
  if (cfg.seeds.empty()) {
    throw std::invalid_argument("config: at least one seed is required");
  }
}

}  // namespace

const std::string& method_name(Method m) {
  for (const auto& [method, name] : method_table()) {
    if (method == m) return name;
  }
  throw std::invalid_argument("method_name: unknown method");
}

Method parse_method(const std::string& name) {
  for (const auto& [method, spelled] : method_table()) {
    if (spelled == name) return method;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("parse_config: expected 'key = value', got '" +
                                  stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("parse_config: missing key in '" + stripped + "'");
    }

    if (key == "dataset") {
      cfg.dataset = value;
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "fractions") {
      cfg.fractions.clear();
      for (const auto& item : split_list(key, value)) {
        const double f = parse_double(key, item);
        if (!(f > 0.0 && f <= 1.0)) bad_key(key, "must be in (0, 1]");
        cfg.fractions.push_back(f);
      }
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& item : split_list(key, value)) {
        try {
          cfg.methods.push_back(parse_method(item));
        } catch (const std::invalid_argument& e) {
          bad_key(key, e.what());
        }
      }
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& item : split_list(key, value)) {
        cfg.seeds.push_back(parse_seed(key, item));
      }
    } else if (key == "oracle.n_d") {
      cfg.oracle.n_d = static_cast<int>(parse_integer(key, value));
      if (cfg.oracle.n_d < 2) bad_key(key, "must be at least 2");
    } else if (key == "oracle.broad_max") {
      cfg.oracle.broad_max = static_cast<int>(parse_integer(key, value));
      if (cfg.oracle.broad_max < 1) bad_key(key, "must be positive");
    } else if (key == "oracle.stage1_width") {
      cfg.oracle.stage1_width = static_cast<int>(parse_integer(key, value));
      if (cfg.oracle.stage1_width < 2) bad_key(key, "must be at least 2");
    } else if (key == "oracle.stage1_stride") {
      cfg.oracle.stage1_stride = static_cast<int>(parse_integer(key, value));
      if (cfg.oracle.stage1_stride < 1) bad_key(key, "must be positive");
    } else if (key == "oracle.p_values") {
      cfg.oracle.p_values.clear();
      for (const auto& item : split_list(key, value)) {
        const double p = parse_double(key, item);
        if (!(p >= 0.0 && p <= 1.0)) bad_key(key, "must be in [0, 1]");
        cfg.oracle.p_values.push_back(p);
      }
    } else if (key == "oracle.networks_per_combo") {
      cfg.oracle.networks_per_combo = static_cast<int>(parse_integer(key, value));
      if (cfg.oracle.networks_per_combo < 1) bad_key(key, "must be positive");
    } else if (key == "oracle.train_fraction_match") {
      cfg.oracle.train_fraction_match = parse_bool(key, value);
    } else if (key == "oracle.validation_share") {
      cfg.oracle.validation_share = parse_double(key, value);
      if (!(cfg.oracle.validation_share >= 0.0 && cfg.oracle.validation_share < 1.0)) {
        bad_key(key, "must be in [0, 1)");
      }
    } else if (key == "oracle.top_k") {
      cfg.oracle.top_k = static_cast<int>(parse_integer(key, value));
      if (cfg.oracle.top_k < 1) bad_key(key, "must be positive");
    } else if (apply_train_key(cfg.oracle.train, "oracle.train", key, key, value)) {
    } else if (apply_train_key(cfg.oracle.finetune, "oracle.finetune", key, key, value)) {
    } else if (apply_train_key(cfg.train, "train", key, key, value)) {
    } else {
      throw std::invalid_argument("parse_config: unknown key '" + key + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("parse_config_file: cannot open " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  const char* env = std::getenv("OSP_OUTPUT_DIR");
  if (env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

Dataset load_dataset(const std::string& spec) {
  if (spec.empty()) {
    throw std::invalid_argument("load_dataset: empty dataset spec");
  }
  Dataset ds;
  ds.name = spec;
  const std::string prefix = "powerlaw:";
  if (spec.rfind(prefix, 0) == 0) {
    const auto fields = split_list("dataset", spec.substr(prefix.size()));
    if (fields.size() != 4) {
      throw std::invalid_argument(
          "load_dataset: generator spec needs powerlaw:nodes,m,p,seed");
    }
    GeneratorParams params;
    params.n = parse_integer("dataset", fields[0]);
    params.m = static_cast<int>(parse_integer("dataset", fields[1]));
    params.p = parse_double("dataset", fields[2]);
    params.seed = parse_seed("dataset", fields[3]);
    const Graph g = powerlaw_cluster_graph(params);
    ds.original_node_count = g.node_count();
    ds.hops = hop_distance_matrix(g);
    return ds;
  }
  const Graph g = load_edge_list_file(spec);
  ds.original_node_count = g.node_count();
  ds.hops = hop_distance_matrix(largest_connected_component(g));
  return ds;
}

bool ExperimentReport::has_failures() const {
  return std::any_of(cells.begin(), cells.end(),
                     [](const CellResult& c) { return !c.ok; });
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Dataset ds = load_dataset(cfg.dataset);
  const Index n = ds.hops.size();
  const Eigen::MatrixXd truth = ds.hops.entries.cast<double>();

  ExperimentReport report;
  report.dataset = ds.name;
  report.node_count = n;
  report.singular_values = singular_value_profile(ds.hops);

  for (const std::uint64_t seed : cfg.seeds) {
    for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
      const double fraction = cfg.fractions[fi];
      const std::uint64_t sample_seed = rng::derive(seed, 2 * fi);
      const std::uint64_t method_seed = rng::derive(seed, 2 * fi + 1);

      PartialMatrix p;
      std::string sample_error;
      try {
        p = sample_random_pairs(ds.hops, fraction, sample_seed);
      } catch (const std::exception& e) {
        sample_error = e.what();
      }
      MaskMatrix unobserved;
      if (sample_error.empty()) unobserved = unobserved_mask(p);

      // Both osp variants reuse one window search per (seed, fraction).
      bool oracle_done = false;
      OracleResult oracle_result;
      std::string oracle_error;
      const auto ensure_oracle = [&]() {
        if (oracle_done || !oracle_error.empty()) return;
        OracleConfig ocfg = cfg.oracle;
        ocfg.seed = method_seed;
        try {
          oracle_result = run_oracle(p, ocfg);
          oracle_done = true;
          report.oracle_traces.push_back({fraction, seed, oracle_result.reports,
                                          oracle_result.selected, oracle_result.covering});
        } catch (const std::exception& e) {
          oracle_error = e.what();
        }
      };

      for (const Method method : cfg.methods) {
        CellResult cell;
        cell.method = method;
        cell.fraction = fraction;
        cell.seed = seed;
        if (!sample_error.empty()) {
          cell.error = sample_error;
          report.cells.push_back(std::move(cell));
          continue;
        }
        try {
          Matrix<double> pred;
          switch (method) {
            case Method::trivial0:
              pred = trivial_zero(n);
              break;
            case Method::trivial1:
              pred = trivial_one(n);
              break;
            case Method::mc: {
              const CompletionResult res = complete_lowrank(p, default_params(p));
              pred = postprocess(res.completed);
              break;
            }
            case Method::observed_only: {
              Autoencoder<double> model =
                  init_model<double>(n, cfg.train.hidden_dim, cfg.train.alpha,
                                     rng::derive(method_seed, 2));
              TrainConfig tcfg = cfg.train;
              tcfg.seed = rng::derive(method_seed, 3);
              model = train(std::move(model), make_observed_corpus(p), tcfg).model;
              pred = postprocess(predict_matrix(model, p));
              break;
            }
            case Method::osp:
            case Method::osp_no_finetune: {
              ensure_oracle();
              if (!oracle_error.empty()) throw std::runtime_error(oracle_error);
              OracleConfig ocfg = cfg.oracle;
              ocfg.seed = method_seed;
              pred = stage2_predict(p, oracle_result.covering, ocfg,
                                    method == Method::osp);
              break;
            }
          }
          cell.eval = evaluate(pred, truth, unobserved);
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "method,fraction,seed,mean_error,ahde,pair_count\n";
  for (const CellResult& cell : report.cells) {
    out << method_name(cell.method) << ',' << format_double(cell.fraction) << ','
        << cell.seed << ',';
    if (cell.ok) {
      out << format_double(cell.eval.mean_error) << ',' << format_double(cell.eval.ahde)
          << ',' << cell.eval.pair_count << '\n';
    } else {
      out << "nan,nan,0\n";
    }
  }
}

void write_report_json(const ExperimentReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["dataset"] = report.dataset;
  j["node_count"] = report.node_count;

  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (const CellResult& cell : report.cells) {
    nlohmann::ordered_json c;
    c["method"] = method_name(cell.method);
    c["fraction"] = cell.fraction;
    c["seed"] = cell.seed;
    if (cell.ok) {
      c["mean_error"] = cell.eval.mean_error;
      c["ahde"] = cell.eval.ahde;
      c["pair_count"] = cell.eval.pair_count;
    } else {
      c["error"] = cell.error;
    }
    cells.push_back(std::move(c));
  }

  auto& traces = j["oracle"] = nlohmann::ordered_json::array();
  for (const OracleTrace& trace : report.oracle_traces) {
    nlohmann::ordered_json t;
    t["fraction"] = trace.fraction;
    t["seed"] = trace.seed;
    t["selected"] = trace.selected;
    t["covering"] = trace.covering;
    auto& windows = t["windows"] = nlohmann::ordered_json::array();
    for (const WindowReport& w : trace.windows) {
      nlohmann::ordered_json entry;
      entry["stage"] = w.stage;
      entry["window"] = w.window;
      entry["mean_error"] = w.validation_mean_error;
      entry["ahde"] = w.validation_ahde;
      entry["rank"] = w.rank;
      windows.push_back(std::move(entry));
    }
    traces.push_back(std::move(t));
  }

  auto& sv = j["singular_values"] = nlohmann::ordered_json::array();
  for (Index i = 0; i < report.singular_values.size(); ++i) {
    sv.push_back(report.singular_values(i));
  }

  out << j.dump(2) << '\n';
}

ExperimentReport read_report_json(std::istream& in) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("read_report_json: ") + e.what());
  }
  ExperimentReport report;
  try {
    report.dataset = j.at("dataset").get<std::string>();
    report.node_count = j.at("node_count").get<Index>();
    for (const auto& c : j.at("cells")) {
      CellResult cell;
      cell.method = parse_method(c.at("method").get<std::string>());
      cell.fraction = c.at("fraction").get<double>();
      cell.seed = c.at("seed").get<std::uint64_t>();
      if (c.contains("error")) {
        cell.error = c.at("error").get<std::string>();
      } else {
        cell.ok = true;
        cell.eval.mean_error = c.at("mean_error").get<double>();
        cell.eval.ahde = c.at("ahde").get<double>();
        cell.eval.pair_count = c.at("pair_count").get<Index>();
      }
      report.cells.push_back(std::move(cell));
    }
    for (const auto& t : j.at("oracle")) {
      OracleTrace trace;
      trace.fraction = t.at("fraction").get<double>();
      trace.seed = t.at("seed").get<std::uint64_t>();
      trace.selected = t.at("selected").get<std::vector<Window>>();
      trace.covering = t.at("covering").get<std::vector<int>>();
      for (const auto& w : t.at("windows")) {
        WindowReport report_entry;
        report_entry.stage = w.at("stage").get<int>();
        report_entry.window = w.at("window").get<Window>();
        report_entry.validation_mean_error = w.at("mean_error").get<double>();
        report_entry.validation_ahde = w.at("ahde").get<double>();
        report_entry.rank = w.at("rank").get<int>();
        trace.windows.push_back(std::move(report_entry));
      }
      report.oracle_traces.push_back(std::move(trace));
    }
    const auto& sv = j.at("singular_values");
    report.singular_values.resize(static_cast<Index>(sv.size()));
    for (Index i = 0; i < report.singular_values.size(); ++i) {
      report.singular_values(i) = sv[static_cast<std::size_t>(i)].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_report_json: ") + e.what());
  }
  return report;
}

void write_singular_values_csv(const Eigen::VectorXd& values, std::ostream& out) {
  out << "index,sigma,log10_sigma\n";
  for (Index i = 0; i < values.size(); ++i) {
    out << i << ',' << format_double(values(i)) << ','
        << format_double(std::log10(values(i))) << '\n';
  }
}

}  // namespace osp
