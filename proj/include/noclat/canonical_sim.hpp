#pragma once

#include <cstdint>
#include <vector>

#include "noclat/traffic.hpp"

namespace noclat {

// Slot-synchronous simulation of the canonical priority server: N class
// queues under strict priority, topped by a retry queue fed by sink
// rejections. Service completions are accepted with probability
// 1 - deflect_prob; rejections fly loop_return slots and retry.
struct CanonicalSimConfig {
  std::vector<GGeoParams> classes;  // priority order, index 0 highest
  int service = 1;                  // class service slots
  int deflect_service = 1;          // retry service slots
  double deflect_prob = 0.0;
  int loop_return = 1;   // in-flight slots between rejection and retry queue
  int max_deflections = 16;  // afterwards the next delivery attempt is forced
  uint64_t horizon = 200000;
  uint64_t warmup = 20000;
  uint64_t seed = 1;
};

struct CanonicalSimStats {
  uint64_t injected = 0;
  uint64_t delivered = 0;
  uint64_t live_end = 0;            // packets still in the system at horizon
  uint64_t measured_delivered = 0;  // delivered with post-warmup arrival
  double mean_latency = 0.0;
  std::vector<double> class_mean_wait;     // first service wait per class
  std::vector<double> class_mean_latency;  // injection to acceptance
  double mean_wait_deflected = 0.0;        // retry-queue wait per visit
  double deflected_rate = 0.0;             // rejections per post-warmup slot
  double mean_deflections = 0.0;           // per delivered packet
  std::vector<double> class_empty_frac;    // class queue+server empty
  std::vector<uint64_t> deflection_histogram;  // delivered packets by count
};

CanonicalSimStats run_canonical_sim(const CanonicalSimConfig& config);

}  // namespace noclat
