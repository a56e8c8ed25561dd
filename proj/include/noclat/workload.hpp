#pragma once

#include <vector>

#include "noclat/topology.hpp"
#include "noclat/traffic.hpp"

namespace noclat {

// A routed class together with its arrival process.
struct ClassTraffic {
  TrafficClassSpec spec;
  GGeoParams arrivals;
};

// All-to-all matrix: every source spreads rate_per_source evenly over the
// other nodes.
std::vector<std::vector<double>> uniform_matrix(int nodes,
                                                double rate_per_source);

// Routes every nonzero matrix entry and attaches the burstiness-derived
// arrival moments.
std::vector<ClassTraffic> make_traffic(
    const NocTopology& topo, const std::vector<std::vector<double>>& matrix,
    double burst_prob);

}  // namespace noclat
