#pragma once

#include <string>

#include "hmf/datamodel.hpp"
#include "hmf/gibbs.hpp"
#include "hmf/init.hpp"
#include "json.hpp"

namespace hmf {

struct RunConfig {
  HmfModel model;  // data loaded, factors not yet initialised
  InitStrategy init;
  DrawMode draw_mode = DrawMode::elementwise;
  // The config with every default filled in and data paths made absolute.
  // Loading it again gives the same RunConfig.
  nlohmann::json resolved;
};

// Unknown keys, bad enum names and wrong types are ConfigErrors; unreadable
// or malformed matrices are DataErrors. The model is not validated here.
RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir);
// Accepts a config file or a run manifest (its "config" member).
RunConfig load_config(const std::string& path);

}  // namespace hmf
