// End-to-end acceptance checks for the latency toolkit. Each criterion
// prints exactly one PASS/FAIL line with its measured values and pinned
// tolerances; the exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "noclat/analytic.hpp"
#include "noclat/canonical_sim.hpp"
#include "noclat/config.hpp"
#include "noclat/noc_model.hpp"
#include "noclat/noc_sim.hpp"
#include "noclat/sweep.hpp"
#include "noclat/topology.hpp"
#include "noclat/traffic.hpp"
#include "noclat/workload.hpp"

namespace {

using namespace noclat;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Cross-criterion bookkeeping feeding the final property check.
struct Tally {
  bool conservation = true;      // injected == delivered + still in flight
  uint64_t work_violations = 0;  // idle links that had a grantable packet
  bool converged = true;         // every fixed point reported convergence
  long clamp_events = 0;
  int model_points = 0;
  int sim_runs = 0;
};

void track_model(Tally& t, const ModelDiagnostics& d) {
  t.converged = t.converged && d.converged;
  t.clamp_events += d.clamp_events;
  ++t.model_points;
}

NocSimStats sim_once(const NocTopology& topo,
                     const std::vector<ClassTraffic>& classes,
                     const DeflectConfig& deflect, uint64_t seed, Tally& tally,
                     uint64_t horizon = 200000, uint64_t warmup = 20000) {
  NocSimConfig cfg;
  cfg.topology = topo;
  cfg.classes = classes;
  cfg.deflect = deflect;
  cfg.horizon = horizon;
  cfg.warmup = warmup;
  cfg.seed = seed;
  cfg.check_work_conservation = true;
  const NocSimStats st = run_noc_sim(cfg);
  tally.conservation =
      tally.conservation && st.injected == st.delivered + st.live_end;
  tally.work_violations += st.work_conservation_violations;
  ++tally.sim_runs;
  return st;
}

double sim_mean_latency(const NocTopology& topo,
                        const std::vector<ClassTraffic>& classes,
                        const DeflectConfig& deflect,
                        const std::vector<uint64_t>& seeds, Tally& tally) {
  double sum = 0.0;
  for (const uint64_t s : seeds) {
    sum += sim_once(topo, classes, deflect, s, tally).mean_latency;
  }
  return sum / static_cast<double>(seeds.size());
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

int main() {
  Tally tally;
  int failures = 0;
  const auto run = [&failures](int id, const char* name,
                               const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string(" exception: ") + e.what();
    }
    std::printf("%s criterion %d (%s):%s\n", o.pass ? "PASS" : "FAIL", id,
                name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };

  run(1, "deflection closed forms vs Monte Carlo", [&]() -> Outcome {
    const auto t0 = Clock::now();
    std::ostringstream os;
    os << std::fixed;
    bool ok = true;
    for (const double p : {0.1, 0.2, 0.3, 0.5}) {
      std::mt19937_64 rng(90001 + static_cast<uint64_t>(p * 100.0));
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      const int packets = 1000000;
      const double logp = std::log(p);
      double sum = 0.0;
      for (int i = 0; i < packets; ++i) {
        sum += std::floor(std::log(1.0 - uni(rng)) / logp);
      }
      const double mc_mean = sum / packets;
      const double err =
          std::abs(expected_deflections(p) - mc_mean) / mc_mean;
      const double mc_rate = 0.37 * mc_mean;
      const double rate_err =
          std::abs(deflected_rate(0.37, p) - mc_rate) / mc_rate;
      ok = ok && err < 0.01 && rate_err < 0.01;
      os << " p=" << std::setprecision(1) << p
         << " err=" << std::setprecision(3) << 100.0 * err << "%";
    }
    const double secs = secs_since(t0);
    ok = ok && secs < 10.0;
    os << " runtime=" << std::setprecision(1) << secs
       << "s (tol 1%, limit 10s)";
    return {ok, os.str()};
  });

  run(2, "shared-server model vs its simulator", [&]() -> Outcome {
    const auto t0 = Clock::now();
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    bool ok = true;
    for (const int n : {1, 5}) {
      double err_sum = 0.0;
      int pts = 0;
      for (const double total : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}) {
        const double per = total / n;
        MulticlassInput in;
        CanonicalSimConfig sc;
        for (int c = 0; c < n; ++c) {
          in.classes.push_back({per, 1.0 - per});
          sc.classes.push_back({per, 1.0 - per});
        }
        in.deflect_prob = 0.3;
        const MulticlassResult m = solve_multiclass(in);
        tally.converged = tally.converged && m.converged;
        tally.clamp_events += m.clamp_events;
        ++tally.model_points;

        sc.deflect_prob = 0.3;
        sc.max_deflections = 64;
        sc.seed = 11 + static_cast<uint64_t>(100 * n + pts);
        const CanonicalSimStats st = run_canonical_sim(sc);
        tally.conservation = tally.conservation &&
                             st.injected == st.delivered + st.live_end;
        ++tally.sim_runs;
        err_sum += std::abs(m.mean_latency - st.mean_latency) /
                   st.mean_latency;
        ++pts;
      }
      const double mean_err = 100.0 * err_sum / pts;
      ok = ok && mean_err <= 15.0;
      os << " N=" << n << " mean_err=" << mean_err << "%";
    }
    const double secs = secs_since(t0);
    ok = ok && secs < 300.0;
    os << " runtime=" << std::setprecision(1) << secs
       << "s (tol 15%, limit 300s)";
    return {ok, os.str()};
  });

  run(3, "mesh latency under geometric traffic", [&]() -> Outcome {
    const auto t0 = Clock::now();
    const NocTopology topo = NocTopology::mesh(6, 6);
    const std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    std::ostringstream os;
    os << std::fixed;
    bool ok = true;
    for (const double p : {0.1, 0.3}) {
      DeflectConfig deflect;
      deflect.p_sink = p;
      double err_sum = 0.0;
      int pts = 0;
      for (const double lam : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
        const auto traffic = make_traffic(topo, uniform_matrix(36, lam), 0.0);
        const NocModelResult model = solve_noc(topo, traffic, deflect);
        track_model(tally, model.diag);
        const double sim =
            sim_mean_latency(topo, traffic, deflect, seeds, tally);
        err_sum += std::abs(model.mean_latency - sim) / sim;
        ++pts;
      }
      const double mean_err = 100.0 * err_sum / pts;
      ok = ok && mean_err <= 20.0;
      os << " p_d=" << std::setprecision(1) << p
         << " mean_err=" << std::setprecision(2) << mean_err << "%";
    }
    const double secs = secs_since(t0);
    ok = ok && secs < 1800.0;
    os << " runtime=" << std::setprecision(0) << secs
       << "s (tol 20%, limit 1800s)";
    return {ok, os.str()};
  });

  run(4, "bursty grid on mesh and ring", [&]() -> Outcome {
    const auto t0 = Clock::now();
    const std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    double abs_sum = 0.0, signed_sum = 0.0;
    int stable = 0, skipped = 0;
    struct Setup {
      NocTopology topo;
      int nodes;
    };
    const std::vector<Setup> setups{{NocTopology::mesh(6, 6), 36},
                                    {NocTopology::ring(6), 6}};
    for (const Setup& su : setups) {
      for (const double lam : {0.1, 0.3}) {
        for (const double burst : {0.2, 0.6}) {
          for (const double p : {0.1, 0.3}) {
            DeflectConfig deflect;
            deflect.p_sink = p;
            const auto traffic =
                make_traffic(su.topo, uniform_matrix(su.nodes, lam), burst);
            NocModelResult model;
            try {
              model = solve_noc(su.topo, traffic, deflect);
            } catch (const InstabilityError&) {
              ++skipped;
              continue;
            }
            track_model(tally, model.diag);
            const double sim =
                sim_mean_latency(su.topo, traffic, deflect, seeds, tally);
            const double rel = (model.mean_latency - sim) / sim;
            abs_sum += std::abs(rel);
            signed_sum += rel;
            ++stable;
          }
        }
      }
    }
    const double mean_abs = stable > 0 ? 100.0 * abs_sum / stable : 1e9;
    const double mean_signed = stable > 0 ? 100.0 * signed_sum / stable : -1e9;
    const bool ok = stable == 12 && skipped == 4 && mean_abs <= 25.0 &&
                    mean_signed > -10.0;
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << " stable=" << stable
       << " skipped=" << skipped << " mean_abs_err=" << mean_abs
       << "% mean_signed_err=" << mean_signed
       << "% runtime=" << std::setprecision(0) << secs_since(t0)
       << "s (tol 25%, signed > -10%)";
    return {ok, os.str()};
  });

  run(5, "per-loop deflection counts", [&]() -> Outcome {
    const NocTopology topo = NocTopology::mesh(6, 6);
    DeflectConfig deflect;
    deflect.p_sink = 0.3;
    const auto traffic = make_traffic(topo, uniform_matrix(36, 0.33), 0.0);
    const NocModelResult model = solve_noc(topo, traffic, deflect);
    track_model(tally, model.diag);
    const uint64_t horizon = 200000, warmup = 20000;
    const int n_seeds = 5;
    std::vector<double> sim_counts(model.loops.size(), 0.0);
    for (uint64_t s = 1; s <= static_cast<uint64_t>(n_seeds); ++s) {
      const NocSimStats st =
          sim_once(topo, traffic, deflect, s, tally, horizon, warmup);
      for (size_t i = 0; i < st.loop_deflections.size(); ++i) {
        sim_counts[i] += static_cast<double>(st.loop_deflections[i]);
      }
    }
    const double window = static_cast<double>(horizon - warmup) * n_seeds;
    double min_acc = 100.0, acc_sum = 0.0;
    for (size_t i = 0; i < model.loops.size(); ++i) {
      double acc = 0.0;
      if (sim_counts[i] > 0.0) {
        const double predicted = model.loops[i].deflection_rate * window;
        acc = std::max(
            0.0, 100.0 * (1.0 - std::abs(predicted - sim_counts[i]) /
                                    sim_counts[i]));
      }
      min_acc = std::min(min_acc, acc);
      acc_sum += acc;
    }
    const double mean_acc = acc_sum / static_cast<double>(model.loops.size());
    const bool ok = min_acc >= 85.0 && mean_acc >= 90.0;
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << " worst_loop=" << min_acc
       << "% mean=" << mean_acc << "% (floors 85%, 90%)";
    return {ok, os.str()};
  });

  run(6, "latency growth with deflection probability", [&]() -> Outcome {
    const auto t0 = Clock::now();
    const NocTopology topo = NocTopology::mesh(6, 6);
    const auto traffic = make_traffic(topo, uniform_matrix(36, 0.25), 0.0);
    const std::vector<uint64_t> seeds{1, 2, 3};
    std::vector<double> model_lat, sim_lat;
    for (const double p : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      DeflectConfig deflect;
      deflect.p_sink = p;
      const NocModelResult model = solve_noc(topo, traffic, deflect);
      track_model(tally, model.diag);
      model_lat.push_back(model.mean_latency);
      sim_lat.push_back(sim_mean_latency(topo, traffic, deflect, seeds, tally));
    }
    bool increasing = true;
    for (size_t i = 0; i + 1 < model_lat.size(); ++i) {
      increasing = increasing && model_lat[i] < model_lat[i + 1] &&
                   sim_lat[i] < sim_lat[i + 1];
    }
    const double model_ratio = model_lat.back() / model_lat.front();
    const double sim_ratio = sim_lat.back() / sim_lat.front();
    const bool ok = increasing && model_ratio >= 5.0 && sim_ratio >= 5.0;
    std::ostringstream os;
    os << std::fixed << std::setprecision(2)
       << " increasing=" << (increasing ? "yes" : "no")
       << " model_ratio=" << model_ratio << "x sim_ratio=" << sim_ratio
       << "x runtime=" << std::setprecision(0) << secs_since(t0)
       << "s (threshold 5x)";
    return {ok, os.str()};
  });

  run(7, "degenerate inputs reduce exactly", [&]() -> Outcome {
    MulticlassInput in;
    in.classes = {ggeo_from_burstiness({0.2, 0.1}),
                  ggeo_from_burstiness({0.15, 0.3}),
                  ggeo_from_burstiness({0.1, 0.0})};
    in.deflect_prob = 0.0;
    const MulticlassResult res = solve_multiclass(in);
    double ladder_err = 0.0;
    std::vector<PriorityFlow> higher, lower;
    for (const GGeoParams& g : in.classes) {
      lower.push_back({g.rate, 1.0, 1.0, 0.0});
    }
    for (size_t c = 0; c < in.classes.size(); ++c) {
      lower.erase(lower.begin());
      const PriorityFlow own{in.classes[c].rate, 1.0, in.classes[c].scv, 0.0};
      const double want = wait_priority_level(higher, own, lower);
      ladder_err = std::max(ladder_err, std::abs(res.wait[c] - want) /
                                            std::max(1.0, want));
      higher.push_back({own.rate, 1.0, own.scv_arrival, want});
    }

    const NocTopology topo = NocTopology::mesh(4, 4);
    std::vector<std::vector<double>> m(16, std::vector<double>(16, 0.0));
    m[1][11] = 1e-12;  // node 2 -> node 12: 4 hops, one crossing each
    const DeflectConfig deflect;  // p_sink = 0
    const auto traffic = make_traffic(topo, m, 0.0);
    const NocModelResult zero = solve_noc(topo, traffic, deflect);
    track_model(tally, zero.diag);
    const double zero_err = std::abs(zero.classes[0].latency - 5.0);

    const bool ok = ladder_err <= 1e-12 && zero_err <= 1e-9;
    std::ostringstream os;
    os << std::scientific << std::setprecision(2)
       << " ladder_err=" << ladder_err << " zero_traffic_err=" << zero_err
       << " (tols 1e-12, 1e-9)";
    return {ok, os.str()};
  });

  run(8, "analytical scale-up on a 16x16 mesh", [&]() -> Outcome {
    const NocTopology topo = NocTopology::mesh(16, 16);
    const auto traffic = make_traffic(topo, uniform_matrix(256, 0.05), 0.2);
    DeflectConfig deflect;
    deflect.p_sink = 0.1;
    const auto t0 = Clock::now();
    const NocModelResult model = solve_noc(topo, traffic, deflect);
    const double secs = secs_since(t0);
    track_model(tally, model.diag);
    const bool ok = secs < 5.0 && model.classes.size() == 65280;
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << " classes="
       << model.classes.size() << " solves=" << model.diag.canonical_solves
       << " runtime=" << secs << "s (limit 5s)";
    return {ok, os.str()};
  });

  run(9, "bit-identical reruns", [&]() -> Outcome {
    const ExperimentConfig vcfg = parse_config(R"({
      "schema_version": 1,
      "topology": {"kind": "ring", "n": 6},
      "traffic": {"type": "uniform", "rate": 0.1},
      "deflect": {"p_sink": 0.2},
      "sim": {"horizon": 20000, "warmup": 2000, "seeds": [1, 2]}})");
    const fs::path va = fresh_dir("noclat_acc_val_a");
    const fs::path vb = fresh_dir("noclat_acc_val_b");
    bool ok = run_validate(vcfg, va.string(), 1) == 0;
    ok = ok && run_validate(vcfg, vb.string(), 2) == 0;
    ok = ok && slurp(va / "comparison.csv") == slurp(vb / "comparison.csv");
    ok = ok && slurp(va / "validate_summary.csv") ==
                   slurp(vb / "validate_summary.csv");

    const ExperimentConfig acfg = parse_config(R"({
      "schema_version": 1,
      "topology": {"kind": "mesh", "rows": 6, "cols": 6},
      "traffic": {"type": "uniform", "rate": 0.1},
      "deflect": {"p_sink": 0.2}})");
    const fs::path aa = fresh_dir("noclat_acc_ana_a");
    const fs::path ab = fresh_dir("noclat_acc_ana_b");
    ok = ok && run_analyze(acfg, aa.string()) == 0;
    ok = ok && run_analyze(acfg, ab.string()) == 0;
    ok = ok && slurp(aa / "classes.csv") == slurp(ab / "classes.csv");
    ok = ok && slurp(aa / "aggregate.csv") == slurp(ab / "aggregate.csv");
    return {ok, ok ? " validate and analyze outputs byte-identical"
                   : " rerun outputs differ"};
  });

  run(10, "property suite", [&]() -> Outcome {
    bool mono_lambda = true, mono_p = true, mono_scv = true, ordering = true;
    double prev = -1.0;
    for (const double lam : {0.1, 0.2, 0.3, 0.4}) {
      CanonicalInput ci;
      ci.arrivals = {lam, 1.0 - lam};
      ci.deflect_prob = 0.2;
      const CanonicalResult r = solve_canonical(ci);
      tally.converged = tally.converged && r.converged;
      tally.clamp_events += r.clamp_events;
      ++tally.model_points;
      mono_lambda = mono_lambda && r.wait_class > prev;
      prev = r.wait_class;
    }
    prev = -1.0;
    for (const double p : {0.0, 0.1, 0.2, 0.3, 0.4}) {
      CanonicalInput ci;
      ci.arrivals = {0.2, 0.8};
      ci.deflect_prob = p;
      const CanonicalResult r = solve_canonical(ci);
      tally.converged = tally.converged && r.converged;
      tally.clamp_events += r.clamp_events;
      ++tally.model_points;
      mono_p = mono_p && r.wait_class > prev;
      prev = r.wait_class;
    }
    prev = -1.0;
    for (const double scv : {1.0, 2.0, 3.0}) {
      CanonicalInput ci;
      ci.arrivals = {0.3, scv};
      ci.deflect_prob = 0.2;
      const CanonicalResult r = solve_canonical(ci);
      tally.converged = tally.converged && r.converged;
      tally.clamp_events += r.clamp_events;
      ++tally.model_points;
      mono_scv = mono_scv && r.wait_class > prev;
      prev = r.wait_class;
    }
    MulticlassInput mi;
    for (int c = 0; c < 5; ++c) {
      mi.classes.push_back(ggeo_from_burstiness({0.09, 0.2}));
    }
    mi.deflect_prob = 0.2;
    const MulticlassResult mres = solve_multiclass(mi);
    tally.converged = tally.converged && mres.converged;
    tally.clamp_events += mres.clamp_events;
    ++tally.model_points;
    for (int c = 0; c + 1 < 5; ++c) {
      ordering = ordering && mres.wait[c] <= mres.wait[c + 1];
    }

    const bool ok = mono_lambda && mono_p && mono_scv && ordering &&
                    tally.conservation && tally.work_violations == 0 &&
                    tally.converged;
    std::ostringstream os;
    os << " mono_lambda=" << (mono_lambda ? "yes" : "no")
       << " mono_p=" << (mono_p ? "yes" : "no")
       << " mono_scv=" << (mono_scv ? "yes" : "no")
       << " ordering=" << (ordering ? "yes" : "no")
       << " conservation=" << (tally.conservation ? "ok" : "VIOLATED")
       << " work_violations=" << tally.work_violations
       << " converged=" << (tally.converged ? "all" : "NOT all")
       << " model_points=" << tally.model_points
       << " sim_runs=" << tally.sim_runs
       << " clamp_events=" << tally.clamp_events;
    return {ok, os.str()};
  });

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
