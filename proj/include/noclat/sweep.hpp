#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "noclat/config.hpp"
#include "noclat/noc_model.hpp"
#include "noclat/noc_sim.hpp"

namespace noclat {

struct SweepPoint {
  double rate = 0.0;
  double burst_prob = 0.0;
  double deflect_prob = 0.0;
};

// Cartesian product of the config axes, ordered by ascending coordinates.
std::vector<SweepPoint> expand_grid(const ExperimentConfig& cfg);

std::vector<ClassTraffic> classes_at(const ExperimentConfig& cfg,
                                     const SweepPoint& pt);
DeflectConfig deflect_at(const ExperimentConfig& cfg, const SweepPoint& pt);

struct ModelOutcome {
  SweepPoint pt;
  bool unstable = false;
  std::string message;  // instability detail when unstable
  NocModelResult result;
};

ModelOutcome run_model_point(const ExperimentConfig& cfg, const SweepPoint& pt);
NocSimStats run_sim_point(const ExperimentConfig& cfg, const SweepPoint& pt,
                          uint64_t seed, bool trace);

// Worker-count resolution: explicit flag, then the NOCLAT_WORKERS environment
// variable, then hardware concurrency.
int resolve_workers(int requested);

// Runs fn(0..n-1) across up to `workers` threads; rethrows the first failure.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// Subcommand drivers; each returns the process exit code (0 ok, 2 instability,
// 3 non-convergence; usage and IO problems throw).
int run_analyze(const ExperimentConfig& cfg, const std::string& out_dir);
int run_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                 int workers);
int run_validate(const ExperimentConfig& cfg, const std::string& out_dir,
                 int workers);
int run_bench(const std::vector<int>& sizes, const std::string& out_dir);
int run_deflection_check(const ExperimentConfig& cfg,
                         const std::string& out_dir, int workers);

}  // namespace noclat
