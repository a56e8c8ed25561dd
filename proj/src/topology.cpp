#include "noclat/topology.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace noclat {

namespace {

void check_prob01(double p, const char* what) {
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument(std::string(what) +
                                " must lie in [0,1), got " +
                                std::to_string(p));
  }
}

// Mesh link-id layout: east block, west block, south block, north block.
int east_base(const NocTopology& t) { (void)t; return 0; }
int west_base(const NocTopology& t) { return t.rows * (t.cols - 1); }
int south_base(const NocTopology& t) { return 2 * t.rows * (t.cols - 1); }
int north_base(const NocTopology& t) {
  return south_base(t) + t.cols * (t.rows - 1);
}

int link_east(const NocTopology& t, int r, int c) {
  return east_base(t) + r * (t.cols - 1) + c;
}
int link_west(const NocTopology& t, int r, int c) {
  return west_base(t) + r * (t.cols - 1) + (c - 1);
}
int link_south(const NocTopology& t, int r, int c) {
  return south_base(t) + c * (t.rows - 1) + r;
}
int link_north(const NocTopology& t, int r, int c) {
  return north_base(t) + c * (t.rows - 1) + (r - 1);
}

}  // namespace

NocTopology NocTopology::mesh(int rows, int cols, int per_hop) {
  if (rows < 1 || cols < 1 || per_hop < 1) {
    throw std::invalid_argument("mesh dimensions and per-hop latency must be >= 1");
  }
  NocTopology t;
  t.kind = TopologyKind::Mesh;
  t.rows = rows;
  t.cols = cols;
  t.per_hop_latency = per_hop;
  return t;
}

NocTopology NocTopology::ring(int n, int per_hop) {
  if (n < 2 || per_hop < 1) {
    throw std::invalid_argument("ring needs >= 2 nodes and per-hop latency >= 1");
  }
  NocTopology t;
  t.kind = TopologyKind::Ring;
  t.rows = 1;
  t.cols = n;
  t.per_hop_latency = per_hop;
  return t;
}

TrafficClassSpec route_yx(const NocTopology& topo, int source,
                          int destination) {
  if (!topo.valid_node(source) || !topo.valid_node(destination)) {
    throw std::invalid_argument("invalid node id");
  }
  if (source == destination) {
    throw std::invalid_argument("source equals destination");
  }
  TrafficClassSpec spec;
  spec.source = source;
  spec.destination = destination;
  if (topo.kind == TopologyKind::Ring) {
    const int n = topo.cols;
    spec.column_hops = 0;
    spec.row_hops = ((destination - source) % n + n) % n;
    spec.junction = destination;  // no turn exists
  } else {
    const int r0 = topo.row_of(source), c0 = topo.col_of(source);
    const int r1 = topo.row_of(destination), c1 = topo.col_of(destination);
    spec.column_hops = std::abs(r1 - r0);
    spec.row_hops = std::abs(c1 - c0);
    if (spec.column_hops == 0) {
      spec.junction = source;  // row segment starts right at the source
    } else if (spec.row_hops == 0) {
      spec.junction = destination;
    } else {
      spec.junction = topo.node_id(r1, c0);
    }
  }
  spec.static_latency =
      (spec.column_hops + spec.row_hops) * topo.per_hop_latency;
  return spec;
}

std::vector<TrafficClassSpec> enumerate_classes(
    const NocTopology& topo, const std::vector<std::vector<double>>& matrix) {
  const int n = topo.node_count();
  if (static_cast<int>(matrix.size()) != n) {
    throw std::invalid_argument("traffic matrix must have one row per node");
  }
  std::vector<TrafficClassSpec> classes;
  for (int s = 0; s < n; ++s) {
    if (static_cast<int>(matrix[s].size()) != n) {
      throw std::invalid_argument("traffic matrix row " + std::to_string(s + 1) +
                                  " has wrong width");
    }
    for (int d = 0; d < n; ++d) {
      const double rate = matrix[s][d];
      if (rate < 0.0) {
        throw std::invalid_argument("negative traffic matrix entry");
      }
      if (rate == 0.0) continue;
      if (s == d) {
        throw std::invalid_argument("traffic matrix diagonal must be zero");
      }
      TrafficClassSpec spec = route_yx(topo, s + 1, d + 1);
      spec.id = static_cast<int>(classes.size());
      spec.rate = rate;
      classes.push_back(spec);
    }
  }
  return classes;
}

double sink_prob(const DeflectConfig& cfg, int node) {
  auto it = cfg.per_sink.find(node);
  const double p = it != cfg.per_sink.end() ? it->second : cfg.p_sink;
  check_prob01(p, "sink deflection probability");
  return p;
}

double junction_prob(const DeflectConfig& cfg) {
  const double p = cfg.p_junction < 0.0 ? cfg.p_sink : cfg.p_junction;
  check_prob01(p, "junction deflection probability");
  return p;
}

std::vector<DeflectionLoop> loops_of(const NocTopology& topo,
                                     const DeflectConfig& cfg) {
  check_prob01(cfg.p_sink, "sink deflection probability");
  junction_prob(cfg);

  auto loop_time = [&](int length) {
    return cfg.bidirectional_fold ? 2 * (length - 1) * topo.per_hop_latency
                                  : length * topo.per_hop_latency;
  };

  std::vector<DeflectionLoop> loops;
  if (topo.kind == TopologyKind::Ring) {
    DeflectionLoop loop;
    loop.id = 0;
    loop.orientation = LoopOrientation::Row;
    loop.index = 0;
    for (int i = 0; i < topo.cols; ++i) {
      loop.members.push_back(i + 1);
      loop.sink_p_d.push_back(sink_prob(cfg, i + 1));
    }
    loop.loop_time = loop_time(topo.cols);
    loops.push_back(std::move(loop));
    return loops;
  }
  for (int r = 0; r < topo.rows; ++r) {
    DeflectionLoop loop;
    loop.id = r;
    loop.orientation = LoopOrientation::Row;
    loop.index = r;
    for (int c = 0; c < topo.cols; ++c) {
      const int node = topo.node_id(r, c);
      loop.members.push_back(node);
      loop.sink_p_d.push_back(sink_prob(cfg, node));
    }
    loop.loop_time = loop_time(topo.cols);
    loops.push_back(std::move(loop));
  }
  for (int c = 0; c < topo.cols; ++c) {
    DeflectionLoop loop;
    loop.id = topo.rows + c;
    loop.orientation = LoopOrientation::Column;
    loop.index = c;
    for (int r = 0; r < topo.rows; ++r) {
      const int node = topo.node_id(r, c);
      loop.members.push_back(node);
      loop.sink_p_d.push_back(sink_prob(cfg, node));
    }
    loop.loop_time = loop_time(topo.rows);
    loops.push_back(std::move(loop));
  }
  return loops;
}

std::string LinkTable::name(int link) const {
  return "link " + std::to_string(from[link]) + "->" + std::to_string(to[link]);
}

LinkTable build_links(const NocTopology& topo) {
  LinkTable t;
  if (topo.kind == TopologyKind::Ring) {
    const int n = topo.cols;
    for (int i = 0; i < n; ++i) {
      t.from.push_back(i + 1);
      t.to.push_back((i + 1) % n + 1);
    }
    return t;
  }
  for (int r = 0; r < topo.rows; ++r) {
    for (int c = 0; c + 1 < topo.cols; ++c) {
      t.from.push_back(topo.node_id(r, c));
      t.to.push_back(topo.node_id(r, c + 1));
    }
  }
  for (int r = 0; r < topo.rows; ++r) {
    for (int c = 1; c < topo.cols; ++c) {
      t.from.push_back(topo.node_id(r, c));
      t.to.push_back(topo.node_id(r, c - 1));
    }
  }
  for (int c = 0; c < topo.cols; ++c) {
    for (int r = 0; r + 1 < topo.rows; ++r) {
      t.from.push_back(topo.node_id(r, c));
      t.to.push_back(topo.node_id(r + 1, c));
    }
  }
  for (int c = 0; c < topo.cols; ++c) {
    for (int r = 1; r < topo.rows; ++r) {
      t.from.push_back(topo.node_id(r, c));
      t.to.push_back(topo.node_id(r - 1, c));
    }
  }
  return t;
}

std::vector<ClassRoute> build_routes(const NocTopology& topo,
                                     const std::vector<TrafficClassSpec>& specs,
                                     const std::vector<DeflectionLoop>& loops,
                                     const DeflectConfig& cfg) {
  (void)loops;
  std::vector<ClassRoute> routes;
  routes.reserve(specs.size());
  for (const TrafficClassSpec& spec : specs) {
    ClassRoute route;
    route.spec = spec;
    if (topo.kind == TopologyKind::Ring) {
      RouteStage stage;
      const int n = topo.cols;
      int node = spec.source - 1;
      for (int h = 0; h < spec.row_hops; ++h) {
        stage.links.push_back(node);
        node = (node + 1) % n;
      }
      stage.loop_id = 0;
      stage.deflect_prob = sink_prob(cfg, spec.destination);
      route.stages.push_back(std::move(stage));
      routes.push_back(std::move(route));
      continue;
    }
    const int r0 = topo.row_of(spec.source), c0 = topo.col_of(spec.source);
    const int r1 = topo.row_of(spec.destination),
              c1 = topo.col_of(spec.destination);
    if (spec.column_hops > 0) {
      RouteStage stage;
      if (r1 > r0) {
        for (int r = r0; r < r1; ++r) stage.links.push_back(link_south(topo, r, c0));
      } else {
        for (int r = r0; r > r1; --r) stage.links.push_back(link_north(topo, r, c0));
      }
      stage.loop_id = topo.rows + c0;  // column loop
      stage.deflect_prob = spec.row_hops > 0
                               ? junction_prob(cfg)
                               : sink_prob(cfg, spec.destination);
      route.stages.push_back(std::move(stage));
    }
    if (spec.row_hops > 0) {
      RouteStage stage;
      if (c1 > c0) {
        for (int c = c0; c < c1; ++c) stage.links.push_back(link_east(topo, r1, c));
      } else {
        for (int c = c0; c > c1; --c) stage.links.push_back(link_west(topo, r1, c));
      }
      stage.loop_id = r1;  // row loop
      stage.deflect_prob = sink_prob(cfg, spec.destination);
      route.stages.push_back(std::move(stage));
    }
    routes.push_back(std::move(route));
  }
  return routes;
}

}  // namespace noclat
