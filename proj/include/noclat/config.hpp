#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "noclat/analytic.hpp"
#include "noclat/topology.hpp"

namespace noclat {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TrafficKind { Uniform, Matrix, Profile };

struct AppProfile {
  std::string name;
  double rate = 0.0;        // per source
  double burst_prob = 0.0;
};

// Shipped presets; rates in [0.02, 0.1], burstiness in [0.25, 0.55].
const std::vector<AppProfile>& app_profiles();

struct ExperimentConfig {
  int schema_version = 1;
  NocTopology topology;
  TrafficKind traffic = TrafficKind::Uniform;
  double base_rate = 0.0;  // per-source rate (uniform and profile traffic)
  std::vector<std::vector<double>> matrix;  // explicit per-pair rates
  std::string profile;
  double burst_prob = 0.0;
  DeflectConfig deflect;
  std::vector<double> rates;  // sweep axes, singleton when not swept
  std::vector<double> burst_probs;
  std::vector<double> deflect_probs;
  uint64_t horizon = 200000;
  uint64_t warmup = 20000;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int max_deflections = 16;
  SolverOptions solver;
  bool trace = false;
};

// Both throw ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace noclat
