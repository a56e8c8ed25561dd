#pragma once

#include <map>
#include <string>
#include <vector>

namespace noclat {

enum class TopologyKind { Mesh, Ring };

// Nodes are numbered 1..node_count(), row-major from the top-left corner.
// Mesh rows/columns carry bidirectional links; a ring circulates one way.
struct NocTopology {
  TopologyKind kind = TopologyKind::Mesh;
  int rows = 1;
  int cols = 1;
  int per_hop_latency = 1;

  static NocTopology mesh(int rows, int cols, int per_hop = 1);
  static NocTopology ring(int n, int per_hop = 1);

  int node_count() const { return rows * cols; }
  int node_id(int row, int col) const { return row * cols + col + 1; }
  int row_of(int id) const { return (id - 1) / cols; }
  int col_of(int id) const { return (id - 1) % cols; }
  bool valid_node(int id) const { return id >= 1 && id <= node_count(); }
};

// One source-destination flow and its dimension-ordered route: the column
// segment runs first, turning onto the row at the junction node.
struct TrafficClassSpec {
  int id = 0;
  int source = 0;
  int destination = 0;
  int junction = 0;  // turn node; the source when no column segment exists,
                     // the destination when no row segment follows
  int column_hops = 0;
  int row_hops = 0;
  int static_latency = 0;  // (column_hops + row_hops) * per_hop_latency
  double rate = 0.0;
};

TrafficClassSpec route_yx(const NocTopology& topo, int source,
                          int destination);

// One class per nonzero off-diagonal matrix entry, ordered row-major by
// source then destination. matrix[s][d] is indexed by node id - 1.
std::vector<TrafficClassSpec> enumerate_classes(
    const NocTopology& topo, const std::vector<std::vector<double>>& matrix);

enum class LoopOrientation { Row, Column };

// Closed circulation a deflected packet rides back to its segment entry.
struct DeflectionLoop {
  int id = 0;
  LoopOrientation orientation = LoopOrientation::Row;
  int index = 0;                  // row or column index
  std::vector<int> members;       // node ids in circulation order
  std::vector<double> sink_p_d;   // per member node
  int loop_time = 0;              // cycles for one full circulation
};

struct DeflectConfig {
  double p_sink = 0.0;
  double p_junction = -1.0;  // negative means "same as p_sink"
  std::map<int, double> per_sink;  // node-id overrides for sink probability
  bool bidirectional_fold = false;  // loop_time 2(len-1) instead of len
};

double sink_prob(const DeflectConfig& cfg, int node);
double junction_prob(const DeflectConfig& cfg);

// Mesh: one loop per row then one per column; ring: a single loop.
std::vector<DeflectionLoop> loops_of(const NocTopology& topo,
                                     const DeflectConfig& cfg);

// Directed single-hop channels; shared by the simulator and the model so the
// two sides count contention on identical resources.
struct LinkTable {
  std::vector<int> from;  // node ids
  std::vector<int> to;
  int count() const { return static_cast<int>(from.size()); }
  std::string name(int link) const;
};

LinkTable build_links(const NocTopology& topo);

// One contiguous segment of a route: the ordered links it crosses, the loop
// it circulates on when rejected at the segment exit, and the rejection
// probability applied at that exit.
struct RouteStage {
  std::vector<int> links;
  int loop_id = -1;
  double deflect_prob = 0.0;
  int hops() const { return static_cast<int>(links.size()); }
  int entry_link() const { return links.front(); }
};

struct ClassRoute {
  TrafficClassSpec spec;
  std::vector<RouteStage> stages;  // one or two; the last exits at the sink
};

// Expands specs into per-link stage paths against the given loops (as built
// by loops_of with the same config).
std::vector<ClassRoute> build_routes(const NocTopology& topo,
                                     const std::vector<TrafficClassSpec>& specs,
                                     const std::vector<DeflectionLoop>& loops,
                                     const DeflectConfig& cfg);

}  // namespace noclat
