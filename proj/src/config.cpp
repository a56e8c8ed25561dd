#include "noclat/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace noclat {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) {
    throw ConfigError("missing field: " + ctx + key);
  }
  return j.at(key);
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

double get_number(const json& j, const char* key, const std::string& ctx) {
  return number_at(require(j, key, ctx), ctx + key);
}

double get_number_or(const json& j, const char* key, const std::string& ctx,
                     double fallback) {
  if (!j.contains(key)) return fallback;
  return number_at(j.at(key), ctx + key);
}

int get_int_or(const json& j, const char* key, const std::string& ctx,
               int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(ctx + key + " must be an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_string()) throw ConfigError(ctx + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_axis(const json& j, const char* key,
                             const std::string& ctx, double lo, double hi,
                             bool lo_open) {
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) {
    throw ConfigError(ctx + key + " must be a non-empty array");
  }
  std::vector<double> out;
  for (const json& e : v) {
    const double x = number_at(e, ctx + key + " entry");
    const bool low_ok = lo_open ? x > lo : x >= lo;
    if (!low_ok || x >= hi) {
      throw ConfigError(ctx + key + " entry out of range: " +
                        std::to_string(x));
    }
    out.push_back(x);
  }
  return out;
}

NocTopology parse_topology(const json& j) {
  const std::string ctx = "topology.";
  const std::string kind = get_string(j, "kind", ctx);
  const int per_hop = get_int_or(j, "per_hop_latency", ctx, 1);
  if (per_hop < 1) throw ConfigError("topology.per_hop_latency must be >= 1");
  if (kind == "mesh") {
    const int rows = get_int_or(j, "rows", ctx, 0);
    const int cols = get_int_or(j, "cols", ctx, 0);
    if (rows < 1 || cols < 1) {
      throw ConfigError("topology.rows and topology.cols must be >= 1");
    }
    return NocTopology::mesh(rows, cols, per_hop);
  }
  if (kind == "ring") {
    const int n = get_int_or(j, "n", ctx, 0);
    if (n < 2) throw ConfigError("topology.n must be >= 2");
    return NocTopology::ring(n, per_hop);
  }
  throw ConfigError("topology.kind must be \"mesh\" or \"ring\"");
}

}  // namespace

const std::vector<AppProfile>& app_profiles() {
  static const std::vector<AppProfile> profiles = {
      {"web_serving", 0.02, 0.25},   {"kv_cache", 0.03, 0.30},
      {"stream_decode", 0.04, 0.35}, {"dense_kernel", 0.05, 0.40},
      {"graph_walk", 0.06, 0.45},    {"packet_filter", 0.07, 0.50},
      {"ml_inference", 0.08, 0.55},  {"shuffle_sort", 0.10, 0.52},
  };
  return profiles;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
    throw ConfigError("missing field: schema_version");
  }
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != 1) {
    throw ConfigError("unsupported schema_version: " +
                      std::to_string(cfg.schema_version));
  }

  cfg.topology = parse_topology(require(j, "topology", ""));
  const int nodes = cfg.topology.node_count();

  const json& traffic = require(j, "traffic", "");
  const std::string kind = get_string(traffic, "type", "traffic.");
  if (kind == "uniform") {
    cfg.traffic = TrafficKind::Uniform;
    cfg.base_rate = get_number(traffic, "rate", "traffic.");
    if (cfg.base_rate <= 0.0 || cfg.base_rate >= 1.0) {
      throw ConfigError("traffic.rate must lie in (0,1)");
    }
  } else if (kind == "matrix") {
    cfg.traffic = TrafficKind::Matrix;
    const json& m = require(traffic, "matrix", "traffic.");
    if (!m.is_array() || static_cast<int>(m.size()) != nodes) {
      throw ConfigError("traffic.matrix must be a " + std::to_string(nodes) +
                        "-row array");
    }
    double total = 0.0;
    for (int r = 0; r < nodes; ++r) {
      const json& row = m.at(r);
      if (!row.is_array() || static_cast<int>(row.size()) != nodes) {
        throw ConfigError("traffic.matrix row " + std::to_string(r) +
                          " must have " + std::to_string(nodes) + " entries");
      }
      std::vector<double> vals;
      for (int c = 0; c < nodes; ++c) {
        const double x = number_at(row.at(c), "traffic.matrix entry");
        if (x < 0.0) throw ConfigError("traffic.matrix entries must be >= 0");
        if (r == c && x != 0.0) {
          throw ConfigError("traffic.matrix diagonal must be zero");
        }
        vals.push_back(x);
        total += x;
      }
      cfg.matrix.push_back(vals);
    }
    cfg.base_rate = total / static_cast<double>(nodes);
  } else if (kind == "profile") {
    cfg.traffic = TrafficKind::Profile;
    cfg.profile = get_string(traffic, "name", "traffic.");
    bool found = false;
    for (const AppProfile& p : app_profiles()) {
      if (p.name == cfg.profile) {
        cfg.base_rate = p.rate;
        cfg.burst_prob = p.burst_prob;
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown traffic.name: " + cfg.profile);
  } else {
    throw ConfigError("traffic.type must be uniform, matrix, or profile");
  }

  if (cfg.traffic != TrafficKind::Profile) {
    cfg.burst_prob = get_number_or(j, "burst_prob", "", 0.0);
  } else if (j.contains("burst_prob")) {
    throw ConfigError("burst_prob conflicts with profile traffic");
  }
  if (cfg.burst_prob < 0.0 || cfg.burst_prob >= 1.0) {
    throw ConfigError("burst_prob must lie in [0,1)");
  }

  const json& defl = require(j, "deflect", "");
  cfg.deflect.p_sink = get_number_or(defl, "p_sink", "deflect.", 0.0);
  if (cfg.deflect.p_sink < 0.0 || cfg.deflect.p_sink >= 1.0) {
    throw ConfigError("deflect.p_sink must lie in [0,1)");
  }
  cfg.deflect.p_junction = get_number_or(defl, "p_junction", "deflect.", -1.0);
  if (cfg.deflect.p_junction >= 1.0) {
    throw ConfigError("deflect.p_junction must lie in [0,1)");
  }
  if (defl.contains("per_sink")) {
    const json& per = defl.at("per_sink");
    if (!per.is_object()) throw ConfigError("deflect.per_sink must be an object");
    for (auto it = per.begin(); it != per.end(); ++it) {
      int node = 0;
      try {
        node = std::stoi(it.key());
      } catch (...) {
        throw ConfigError("deflect.per_sink key is not a node id: " + it.key());
      }
      if (node < 1 || node > nodes) {
        throw ConfigError("deflect.per_sink node out of range: " + it.key());
      }
      const double p = number_at(it.value(), "deflect.per_sink value");
      if (p < 0.0 || p >= 1.0) {
        throw ConfigError("deflect.per_sink value must lie in [0,1)");
      }
      cfg.deflect.per_sink[node] = p;
    }
  }
  if (defl.contains("bidirectional_fold")) {
    if (!defl.at("bidirectional_fold").is_boolean()) {
      throw ConfigError("deflect.bidirectional_fold must be a boolean");
    }
    cfg.deflect.bidirectional_fold = defl.at("bidirectional_fold").get<bool>();
  }

  cfg.rates = {cfg.base_rate};
  cfg.burst_probs = {cfg.burst_prob};
  cfg.deflect_probs = {cfg.deflect.p_sink};
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    if (sw.contains("rates")) {
      if (cfg.traffic == TrafficKind::Matrix) {
        throw ConfigError("sweep.rates requires uniform traffic");
      }
      if (cfg.traffic == TrafficKind::Profile) {
        throw ConfigError("sweep.rates conflicts with profile traffic");
      }
      cfg.rates = get_axis(sw, "rates", "sweep.", 0.0, 1.0, true);
    }
    if (sw.contains("burst_probs")) {
      if (cfg.traffic == TrafficKind::Profile) {
        throw ConfigError("sweep.burst_probs conflicts with profile traffic");
      }
      cfg.burst_probs = get_axis(sw, "burst_probs", "sweep.", 0.0, 1.0, false);
    }
    if (sw.contains("deflect_probs")) {
      cfg.deflect_probs = get_axis(sw, "deflect_probs", "sweep.", 0.0, 1.0, false);
    }
  }

  if (j.contains("sim")) {
    const json& sim = j.at("sim");
    cfg.horizon = static_cast<uint64_t>(get_number_or(sim, "horizon", "sim.",
                                                      200000.0));
    cfg.warmup =
        static_cast<uint64_t>(get_number_or(sim, "warmup", "sim.", 20000.0));
    if (cfg.warmup >= cfg.horizon) {
      throw ConfigError("sim.warmup must be smaller than sim.horizon");
    }
    cfg.max_deflections = get_int_or(sim, "max_deflections", "sim.", 16);
    if (cfg.max_deflections < 1) {
      throw ConfigError("sim.max_deflections must be >= 1");
    }
    if (sim.contains("seeds")) {
      const json& seeds = sim.at("seeds");
      if (!seeds.is_array() || seeds.empty()) {
        throw ConfigError("sim.seeds must be a non-empty array");
      }
      cfg.seeds.clear();
      for (const json& s : seeds) {
        if (!s.is_number_integer()) {
          throw ConfigError("sim.seeds entries must be integers");
        }
        cfg.seeds.push_back(s.get<uint64_t>());
      }
    }
  }

  if (j.contains("solver")) {
    const json& sol = j.at("solver");
    cfg.solver.damping = get_number_or(sol, "damping", "solver.", 0.5);
    cfg.solver.tolerance = get_number_or(sol, "tolerance", "solver.", 1e-6);
    cfg.solver.max_iterations =
        get_int_or(sol, "max_iterations", "solver.", 1000);
    if (cfg.solver.damping <= 0.0 || cfg.solver.damping > 1.0) {
      throw ConfigError("solver.damping must lie in (0,1]");
    }
    if (cfg.solver.tolerance <= 0.0) {
      throw ConfigError("solver.tolerance must be positive");
    }
    if (cfg.solver.max_iterations < 1) {
      throw ConfigError("solver.max_iterations must be >= 1");
    }
  }

  if (j.contains("trace")) {
    if (!j.at("trace").is_boolean()) {
      throw ConfigError("trace must be a boolean");
    }
    cfg.trace = j.at("trace").get<bool>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace noclat
