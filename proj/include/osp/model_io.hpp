#pragma once

#include "osp/autoencoder.hpp"

#include <string>

namespace osp {

// JSON checkpoint with a bit-exact weight round trip.
void save_model(const Autoencoder<double>& model, const std::string& path);
Autoencoder<double> load_model(const std::string& path);

}  // namespace osp
