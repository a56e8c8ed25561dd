#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "noclat/traffic.hpp"

namespace noclat {

// Raised when a server's load makes the requested quantity undefined.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ServiceProcess {
  double mean = 1.0;  // cycles, >= 1
  double scv = 0.0;
};

// Single traffic class feeding a slotted priority server whose departures are
// rejected with probability deflect_prob and retried through a top-priority
// return queue.
struct CanonicalInput {
  GGeoParams arrivals;
  ServiceProcess service;          // class service, T_i
  ServiceProcess deflect_service;  // retry service, T_d
  double deflect_prob = 0.0;       // p_d in [0,1)
};

struct CanonicalResult {
  double deflected_rate = 0.0;  // retries per cycle
  double deflected_scv = 1.0;   // gap SCV of the retry flow
  double empty_prob = 1.0;      // P(class queue and its server empty)
  ServiceProcess mod_service;       // effective class service seen upstream
  ServiceProcess mod_service_defl;  // effective retry service
  double occupancy = 0.0;           // mean packets in class queue + server
  double occupancy_defl = 0.0;      // mean packets in retry queue + server
  double depart_scv_class = 1.0;
  double depart_scv_defl = 1.0;
  double merged_scv = 1.0;  // SCV of the combined flow reaching the sink
  double wait_defl = 0.0;   // mean retry-queue wait
  double wait_class = 0.0;  // mean class-queue wait
  int iterations = 0;
  bool converged = false;
  int clamp_events = 0;
};

// Mean number of rejections per packet under repeated Bernoulli(p_d) retry.
double expected_deflections(double p_d);

// Rate of rejected packets re-entering the system.
double deflected_rate(double rate, double p_d);

// Probability that a queue and its server hold no packet, given its own load,
// the interfering load and the queue's mean occupancy. Clamped to [0,1].
double empty_prob(double rho_own, double rho_other, double occupancy,
                  bool* clamped = nullptr);

// Effective service mean reconstructed from the empty probability.
double modified_service_mean(double p_empty, double rate);

// Effective service SCV reconstructed from occupancy and effective load.
// Negative values clamp to 0.
double modified_service_scv(double occupancy, double rho_eff, double scv_arr,
                            bool* clamped = nullptr);

// Two-moment stationary-interval departure approximation.
double departure_scv(double rho, double scv_arr, double scv_svc);

// Rate-weighted SCV of two merged flows.
double merge_scv(double rate_a, double scv_a, double rate_b, double scv_b);

// SCV of a flow thinned by probability p (renewal splitting).
double split_scv(double scv, double p);

// Mean wait of the top-priority retry queue; the lower class contributes only
// residual service blocking. Floors at 0.
double wait_deflected(double rho_d, double t_d, double rho_i, double t_i,
                      double scv_d, double rate_d, bool* clamped = nullptr);

// Mean wait of the class queue under a higher-priority retry flow.
double wait_class(double rho_d, double t_d, double wait_d, double rho_i,
                  double t_i, double scv_i, double rate_i,
                  bool* clamped = nullptr);

// One level of a discrete-time nonpreemptive priority server.
struct PriorityFlow {
  double rate = 0.0;
  double mean_service = 1.0;
  double scv_arrival = 1.0;  // consulted only for the level under analysis
  double wait = 0.0;         // consulted only for higher-priority levels
};

// Mean wait of `own` given fully interfering higher levels and the residual
// blocking of lower levels. Throws InstabilityError (using `server_name`)
// when the higher+own load reaches 1.
double wait_priority_level(const std::vector<PriorityFlow>& higher,
                           const PriorityFlow& own,
                           const std::vector<PriorityFlow>& lower,
                           bool* clamped = nullptr,
                           const std::string& server_name = "server");

// Damped fixed point over (retry SCV, waits, occupancies).
struct SolverOptions {
  double damping = 0.5;
  double tolerance = 1e-6;
  int max_iterations = 1000;
};

CanonicalResult solve_canonical(const CanonicalInput& input,
                                const SolverOptions& options = {});

}  // namespace noclat
