#pragma once

#include <cstdint>
#include <vector>

#include "noclat/topology.hpp"
#include "noclat/workload.hpp"

namespace noclat {

// Cycle-accurate slot-synchronous simulation of the deflecting NoC. Links
// carry one packet per per_hop_latency slots; in-flight packets advance in
// lockstep and never stall. New crossings are granted per link by priority:
// returning deflected packets, then junction transfers, then source
// injections. Exits reject with the configured probabilities and ride the
// loop's fixed-latency return path back to their segment entry.
struct NocSimConfig {
  NocTopology topology;
  std::vector<ClassTraffic> classes;
  DeflectConfig deflect;
  int max_deflections = 16;
  uint64_t horizon = 200000;
  uint64_t warmup = 20000;
  uint64_t seed = 1;
  bool collect_trace = false;
  bool check_work_conservation = false;
};

struct NocClassStats {
  uint64_t delivered = 0;  // with post-warmup injection
  double mean_latency = 0.0;
  double p95_latency = 0.0;
  double mean_wait_egress = 0.0;
  double mean_deflections = 0.0;
  SequenceMoments measured_arrivals;  // rate 0 when < 2 arrivals
};

struct TraceRecord {
  int class_id = 0;
  uint64_t injected_at = 0;
  uint64_t delivered_at = 0;
  int deflections = 0;
};

struct NocSimStats {
  uint64_t horizon = 0;
  uint64_t warmup = 0;
  uint64_t seed = 0;
  uint64_t injected = 0;
  uint64_t delivered = 0;
  uint64_t live_end = 0;
  uint64_t measured_delivered = 0;
  double mean_latency = 0.0;
  double p95_latency = 0.0;
  std::vector<NocClassStats> classes;
  std::vector<uint64_t> loop_deflections;  // rejection events per loop
  double mean_wait_egress = 0.0;
  double mean_wait_transfer = 0.0;
  double mean_wait_reentry = 0.0;
  std::vector<double> link_egress_occupancy;  // time-averaged queue lengths
  std::vector<double> link_transfer_occupancy;
  std::vector<double> link_reentry_occupancy;
  uint64_t work_conservation_violations = 0;
  std::vector<TraceRecord> trace;
};

NocSimStats run_noc_sim(const NocSimConfig& config);

// True when two runs of the same config agree on every collected statistic.
bool replay_check(const NocSimConfig& config);

inline const std::vector<uint64_t>& measure_deflections(
    const NocSimStats& stats) {
  return stats.loop_deflections;
}

}  // namespace noclat
