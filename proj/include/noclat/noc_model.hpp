#pragma once

#include <vector>

#include "noclat/analytic.hpp"
#include "noclat/topology.hpp"
#include "noclat/workload.hpp"

namespace noclat {

// N traffic classes in fixed priority order sharing one slotted server, each
// departure rejected with the same probability and retried through a single
// top-priority return queue after a fixed-latency flight.
struct MulticlassInput {
  std::vector<GGeoParams> classes;  // highest priority first
  ServiceProcess service;           // per-attempt service
  ServiceProcess deflect_service;   // retry service
  double deflect_prob = 0.0;
  double loop_return = 1.0;  // flight cycles from rejection to the retry queue
};

struct MulticlassResult {
  std::vector<double> wait;     // class-queue waits, priority order
  std::vector<double> latency;  // end-to-end means, priority order
  double wait_deflected = 0.0;
  double deflected_rate = 0.0;
  double deflected_scv = 1.0;
  double mean_latency = 0.0;  // rate-weighted
  int iterations = 0;
  bool converged = false;
  int clamp_events = 0;
};

MulticlassResult solve_multiclass(const MulticlassInput& input,
                                  const SolverOptions& options = {});

// Queueing state the model computes for one directed link. Entries are
// arbitrated below pass-through crossings: returning deflected packets first,
// then junction transfers, then local injections.
struct LinkChain {
  double through_load = 0.0;  // load of crossings that never queue here
  double reentry_rate = 0.0;
  double reentry_scv = 1.0;
  double wait_reentry = 0.0;
  double transfer_rate = 0.0;
  double transfer_scv = 1.0;
  double wait_transfer = 0.0;
  double egress_rate = 0.0;
  double egress_scv = 1.0;
  double wait_egress = 0.0;
  double utilization = 0.0;  // total load including queued entries
};

struct ClassPrediction {
  TrafficClassSpec spec;
  double wait_egress = 0.0;
  double wait_transfer = 0.0;  // zero without a turn
  double deflections = 0.0;    // expected rejections per packet
  double latency = 0.0;        // end-to-end mean
};

struct LoopReport {
  int loop_id = 0;
  int loop_time = 0;
  double deflection_rate = 0.0;  // rejection events per cycle on this loop
  double reentry_wait = 0.0;     // rate-weighted over the loop's entry links
};

struct ModelDiagnostics {
  int canonical_solves = 0;
  long total_iterations = 0;
  bool converged = true;  // every inner fixed point converged
  int clamp_events = 0;
  double max_utilization = 0.0;
};

struct NocModelResult {
  std::vector<ClassPrediction> classes;
  std::vector<LinkChain> links;
  std::vector<LoopReport> loops;
  double mean_latency = 0.0;  // rate-weighted over classes
  ModelDiagnostics diag;
};

// End-to-end latency model for the deflecting NoC. Per class and stage, a
// standalone retry fixed point shapes the deflected and accepted flows; the
// shaped flows then feed per-link priority chains evaluated source to sink.
// Throws InstabilityError naming the first saturated link.
NocModelResult solve_noc(const NocTopology& topo,
                         const std::vector<ClassTraffic>& classes,
                         const DeflectConfig& deflect,
                         const SolverOptions& options = {});

}  // namespace noclat
