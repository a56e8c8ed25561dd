#include "noclat/workload.hpp"

#include <stdexcept>

namespace noclat {

std::vector<std::vector<double>> uniform_matrix(int nodes,
                                                double rate_per_source) {
  if (nodes < 2) throw std::invalid_argument("need at least two nodes");
  if (rate_per_source < 0.0) {
    throw std::invalid_argument("rate must be nonnegative");
  }
  const double each = rate_per_source / static_cast<double>(nodes - 1);
  std::vector<std::vector<double>> m(nodes, std::vector<double>(nodes, each));
  for (int i = 0; i < nodes; ++i) m[i][i] = 0.0;
  return m;
}

std::vector<ClassTraffic> make_traffic(
    const NocTopology& topo, const std::vector<std::vector<double>>& matrix,
    double burst_prob) {
  std::vector<ClassTraffic> out;
  for (const TrafficClassSpec& spec : enumerate_classes(topo, matrix)) {
    ClassTraffic ct;
    ct.spec = spec;
    ct.arrivals = ggeo_from_burstiness(BurstProfile{spec.rate, burst_prob});
    out.push_back(ct);
  }
  return out;
}

}  // namespace noclat
