#include "osp/model_io.hpp"

#include "json.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

namespace osp {

namespace {

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

std::vector<double> flatten(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

void unflatten(const nlohmann::json& j, const char* key, Index rows, Index cols,
               Eigen::MatrixXd& out) {
  const auto values = j.at(key).get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != rows * cols) {
    throw std::runtime_error(std::string("model checkpoint: bad size for ") + key);
  }
  out.resize(rows, cols);
  std::copy(values.begin(), values.end(), out.data());
}

}  // namespace

void save_model(const Autoencoder<double>& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "osp.autoencoder";
  j["version"] = 1;
  j["input_dim"] = model.input_dim();
  j["hidden_dim"] = model.hidden_dim();
  j["alpha"] = model.alpha;
  // column-major flattening, straight from Eigen storage
  j["encoder_w"] = flatten(model.encoder_w);
  j["encoder_b"] = flatten(model.encoder_b);
  j["decoder_w"] = flatten(model.decoder_w);
  j["decoder_b"] = flatten(model.decoder_b);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(2) << '\n';
}

Autoencoder<double> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("model checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", std::string{}) != "osp.autoencoder") {
    throw std::runtime_error("not an autoencoder checkpoint: " + path);
  }
  if (j.value("version", 0) != 1) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  const auto input_dim = j.at("input_dim").get<Index>();
  const auto hidden_dim = j.at("hidden_dim").get<Index>();
  if (input_dim < 1 || hidden_dim < 1) {
    throw std::runtime_error("model checkpoint " + path + ": bad dimensions");
  }
  Autoencoder<double> model;
  model.alpha = j.at("alpha").get<double>();
  unflatten(j, "encoder_w", hidden_dim, input_dim, model.encoder_w);
  unflatten(j, "decoder_w", input_dim, hidden_dim, model.decoder_w);
  Eigen::MatrixXd b;
  unflatten(j, "encoder_b", hidden_dim, 1, b);
  model.encoder_b = b;
  unflatten(j, "decoder_b", input_dim, 1, b);
  model.decoder_b = b;
  return model;
}

}  // namespace osp
