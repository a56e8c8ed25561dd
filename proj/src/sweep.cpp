#include "noclat/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "noclat/csv.hpp"
#include "noclat/stats.hpp"
#include "noclat/workload.hpp"

namespace noclat {

namespace {

std::vector<double> sorted_axis(std::vector<double> axis) {
  std::sort(axis.begin(), axis.end());
  return axis;
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

std::string orientation_name(LoopOrientation o) {
  return o == LoopOrientation::Row ? "row" : "column";
}

}  // namespace

std::vector<SweepPoint> expand_grid(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> grid;
  for (double r : sorted_axis(cfg.rates)) {
    for (double b : sorted_axis(cfg.burst_probs)) {
      for (double d : sorted_axis(cfg.deflect_probs)) {
        grid.push_back({r, b, d});
      }
    }
  }
  return grid;
}

std::vector<ClassTraffic> classes_at(const ExperimentConfig& cfg,
                                     const SweepPoint& pt) {
  if (cfg.traffic == TrafficKind::Matrix) {
    return make_traffic(cfg.topology, cfg.matrix, pt.burst_prob);
  }
  return make_traffic(cfg.topology,
                      uniform_matrix(cfg.topology.node_count(), pt.rate),
                      pt.burst_prob);
}

DeflectConfig deflect_at(const ExperimentConfig& cfg, const SweepPoint& pt) {
  DeflectConfig d = cfg.deflect;
  d.p_sink = pt.deflect_prob;
  return d;
}

ModelOutcome run_model_point(const ExperimentConfig& cfg,
                             const SweepPoint& pt) {
  ModelOutcome out;
  out.pt = pt;
  try {
    out.result = solve_noc(cfg.topology, classes_at(cfg, pt),
                           deflect_at(cfg, pt), cfg.solver);
  } catch (const InstabilityError& e) {
    out.unstable = true;
    out.message = e.what();
  }
  return out;
}

NocSimStats run_sim_point(const ExperimentConfig& cfg, const SweepPoint& pt,
                          uint64_t seed, bool trace) {
  NocSimConfig sc;
  sc.topology = cfg.topology;
  sc.classes = classes_at(cfg, pt);
  sc.deflect = deflect_at(cfg, pt);
  sc.max_deflections = cfg.max_deflections;
  sc.horizon = cfg.horizon;
  sc.warmup = cfg.warmup;
  sc.seed = seed;
  sc.collect_trace = trace;
  sc.check_work_conservation = true;
  return run_noc_sim(sc);
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NOCLAT_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::vector<std::string> point_fields(const SweepPoint& pt) {
  return {fixed6(pt.rate), fixed6(pt.burst_prob), fixed6(pt.deflect_prob)};
}

void append(std::vector<std::string>& row,
            std::initializer_list<std::string> fields) {
  row.insert(row.end(), fields);
}

}  // namespace

int run_analyze(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto grid = expand_grid(cfg);
  std::vector<ModelOutcome> outcomes;
  outcomes.reserve(grid.size());
  for (const SweepPoint& pt : grid) outcomes.push_back(run_model_point(cfg, pt));

  CsvTable classes;
  classes.header = {"rate",          "burst_prob",  "deflect_prob",
                    "class_id",      "source",      "destination",
                    "junction",      "class_rate",  "static_latency",
                    "wait_egress",   "wait_transfer", "deflections",
                    "latency"};
  CsvTable aggregate;
  aggregate.header = {"rate",           "burst_prob", "deflect_prob",
                      "status",         "mean_latency", "max_utilization",
                      "canonical_solves", "iterations", "converged",
                      "clamp_events",   "detail"};

  bool any_unstable = false, any_nonconverged = false;
  std::string first_problem;
  for (const ModelOutcome& oc : outcomes) {
    std::vector<std::string> agg = point_fields(oc.pt);
    if (oc.unstable) {
      any_unstable = true;
      if (first_problem.empty()) first_problem = oc.message;
      append(agg, {"skipped-unstable", fixed6(0.0), fixed6(0.0), "0", "0", "0",
                   "0", oc.message});
      aggregate.rows.push_back(agg);
      continue;
    }
    const NocModelResult& r = oc.result;
    if (!r.diag.converged) {
      any_nonconverged = true;
      if (first_problem.empty()) first_problem = "fixed point did not converge";
    }
    for (const ClassPrediction& cp : r.classes) {
      std::vector<std::string> row = point_fields(oc.pt);
      append(row, {std::to_string(cp.spec.id), std::to_string(cp.spec.source),
                   std::to_string(cp.spec.destination),
                   std::to_string(cp.spec.junction), fixed6(cp.spec.rate),
                   std::to_string(cp.spec.static_latency),
                   fixed6(cp.wait_egress), fixed6(cp.wait_transfer),
                   fixed6(cp.deflections), fixed6(cp.latency)});
      classes.rows.push_back(row);
    }
    append(agg, {"ok", fixed6(r.mean_latency), fixed6(r.diag.max_utilization),
                 std::to_string(r.diag.canonical_solves),
                 std::to_string(r.diag.total_iterations),
                 r.diag.converged ? "1" : "0",
                 std::to_string(r.diag.clamp_events), ""});
    aggregate.rows.push_back(agg);
  }
  write_csv(out_path(out_dir, "classes.csv"), classes);
  write_csv(out_path(out_dir, "aggregate.csv"), aggregate);
  if (any_unstable) {
    std::cerr << first_problem << "\n";
    return 2;
  }
  if (any_nonconverged) {
    std::cerr << first_problem << "\n";
    return 3;
  }
  return 0;
}

int run_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                 int workers) {
  const auto grid = expand_grid(cfg);
  const int seeds = static_cast<int>(cfg.seeds.size());
  const int jobs = static_cast<int>(grid.size()) * seeds;
  std::vector<NocSimStats> results(jobs);
  parallel_for(jobs, workers, [&](int i) {
    const SweepPoint& pt = grid[static_cast<size_t>(i / seeds)];
    results[i] = run_sim_point(cfg, pt, cfg.seeds[static_cast<size_t>(i % seeds)],
                               cfg.trace);
  });

  CsvTable sim;
  sim.header = {"rate",        "burst_prob",   "deflect_prob",
                "seed",        "horizon",      "warmup",
                "injected",    "delivered",    "live_end",
                "measured",    "mean_latency", "p95_latency",
                "wait_egress", "wait_transfer", "wait_reentry",
                "deflection_events", "conservation_violations"};
  CsvTable summary;
  summary.header = {"rate",        "burst_prob",  "deflect_prob", "seeds",
                    "mean_latency", "latency_ci95", "p95_latency"};
  for (size_t p = 0; p < grid.size(); ++p) {
    std::vector<double> lat, p95;
    for (int s = 0; s < seeds; ++s) {
      const NocSimStats& st = results[p * static_cast<size_t>(seeds) +
                                      static_cast<size_t>(s)];
      uint64_t events = 0;
      for (uint64_t e : st.loop_deflections) events += e;
      std::vector<std::string> row = point_fields(grid[p]);
      append(row, {std::to_string(st.seed), std::to_string(st.horizon),
                   std::to_string(st.warmup), std::to_string(st.injected),
                   std::to_string(st.delivered), std::to_string(st.live_end),
                   std::to_string(st.measured_delivered),
                   fixed6(st.mean_latency), fixed6(st.p95_latency),
                   fixed6(st.mean_wait_egress), fixed6(st.mean_wait_transfer),
                   fixed6(st.mean_wait_reentry), std::to_string(events),
                   std::to_string(st.work_conservation_violations)});
      sim.rows.push_back(row);
      lat.push_back(st.mean_latency);
      p95.push_back(st.p95_latency);
      if (cfg.trace) {
        CsvTable trace;
        trace.header = {"class_id", "injected_at", "delivered_at",
                        "deflections"};
        for (const TraceRecord& tr : st.trace) {
          trace.rows.push_back({std::to_string(tr.class_id),
                                std::to_string(tr.injected_at),
                                std::to_string(tr.delivered_at),
                                std::to_string(tr.deflections)});
        }
        write_csv(out_path(out_dir, "trace_p" + std::to_string(p) + "_s" +
                                        std::to_string(st.seed) + ".csv"),
                  trace);
      }
    }
    std::vector<std::string> row = point_fields(grid[p]);
    append(row, {std::to_string(seeds), fixed6(mean_of(lat)),
                 fixed6(ci95_half(lat)), fixed6(mean_of(p95))});
    summary.rows.push_back(row);
  }
  write_csv(out_path(out_dir, "sim.csv"), sim);
  write_csv(out_path(out_dir, "simsummary.csv"), summary);
  return 0;
}

int run_validate(const ExperimentConfig& cfg, const std::string& out_dir,
                 int workers) {
  const auto grid = expand_grid(cfg);
  const int seeds = static_cast<int>(cfg.seeds.size());
  std::vector<ModelOutcome> models;
  models.reserve(grid.size());
  for (const SweepPoint& pt : grid) models.push_back(run_model_point(cfg, pt));

  const int jobs = static_cast<int>(grid.size()) * seeds;
  std::vector<NocSimStats> sims(jobs);
  parallel_for(jobs, workers, [&](int i) {
    const SweepPoint& pt = grid[static_cast<size_t>(i / seeds)];
    sims[i] =
        run_sim_point(cfg, pt, cfg.seeds[static_cast<size_t>(i % seeds)], false);
  });

  CsvTable cmp;
  cmp.header = {"rate",         "burst_prob", "deflect_prob",
                "status",       "model_latency", "sim_latency",
                "sim_ci95",     "error_pct",  "signed_error_pct",
                "model_converged", "clamp_events"};
  std::vector<double> errors, signed_errors;
  int skipped = 0, nonconverged = 0;
  long clamp_total = 0;
  for (size_t p = 0; p < grid.size(); ++p) {
    std::vector<std::string> row = point_fields(grid[p]);
    const ModelOutcome& mo = models[p];
    if (mo.unstable) {
      ++skipped;
      append(row, {"skipped-unstable", fixed6(0.0), fixed6(0.0), fixed6(0.0),
                   fixed6(0.0), fixed6(0.0), "0", "0"});
      cmp.rows.push_back(row);
      continue;
    }
    std::vector<double> lat;
    for (int s = 0; s < seeds; ++s) {
      lat.push_back(sims[p * static_cast<size_t>(seeds) +
                         static_cast<size_t>(s)]
                        .mean_latency);
    }
    const double sim_mean = mean_of(lat);
    const double signed_err =
        sim_mean > 0.0
            ? (mo.result.mean_latency - sim_mean) / sim_mean * 100.0
            : 0.0;
    errors.push_back(std::abs(signed_err));
    signed_errors.push_back(signed_err);
    if (!mo.result.diag.converged) ++nonconverged;
    clamp_total += mo.result.diag.clamp_events;
    append(row, {"ok", fixed6(mo.result.mean_latency), fixed6(sim_mean),
                 fixed6(ci95_half(lat)), fixed6(std::abs(signed_err)),
                 fixed6(signed_err), mo.result.diag.converged ? "1" : "0",
                 std::to_string(mo.result.diag.clamp_events)});
    cmp.rows.push_back(row);
  }
  write_csv(out_path(out_dir, "comparison.csv"), cmp);

  CsvTable summary;
  summary.header = {"points",           "stable_points",
                    "skipped_points",   "mean_error_pct",
                    "median_error_pct", "max_error_pct",
                    "mean_signed_error_pct", "nonconverged_points",
                    "clamp_events"};
  std::vector<std::string> row{
      std::to_string(grid.size()),
      std::to_string(grid.size() - static_cast<size_t>(skipped)),
      std::to_string(skipped)};
  if (errors.empty()) {
    append(row, {fixed6(0.0), fixed6(0.0), fixed6(0.0), fixed6(0.0)});
  } else {
    append(row, {fixed6(mean_of(errors)), fixed6(median_of(errors)),
                 fixed6(*std::max_element(errors.begin(), errors.end())),
                 fixed6(mean_of(signed_errors))});
  }
  append(row, {std::to_string(nonconverged), std::to_string(clamp_total)});
  summary.rows.push_back(row);
  write_csv(out_path(out_dir, "validate_summary.csv"), summary);
  return 0;
}

int run_bench(const std::vector<int>& sizes, const std::string& out_dir) {
  if (sizes.empty()) {
    throw std::invalid_argument("bench needs at least one mesh size");
  }
  CsvTable bench;
  bench.header = {"rows", "cols", "classes", "seconds"};
  for (int size : sizes) {
    if (size < 2) throw std::invalid_argument("mesh size must be >= 2");
    const NocTopology topo = NocTopology::mesh(size, size);
    const auto classes =
        make_traffic(topo, uniform_matrix(topo.node_count(), 0.1), 0.0);
    DeflectConfig deflect;
    deflect.p_sink = 0.1;
    const auto t0 = std::chrono::steady_clock::now();
    const NocModelResult res = solve_noc(topo, classes, deflect);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    bench.rows.push_back({std::to_string(size), std::to_string(size),
                          std::to_string(res.classes.size()), fixed6(secs)});
  }
  write_csv(out_path(out_dir, "bench.csv"), bench);
  return 0;
}

int run_deflection_check(const ExperimentConfig& cfg,
                         const std::string& out_dir, int workers) {
  const auto grid = expand_grid(cfg);
  const int seeds = static_cast<int>(cfg.seeds.size());
  std::vector<ModelOutcome> models;
  models.reserve(grid.size());
  for (const SweepPoint& pt : grid) models.push_back(run_model_point(cfg, pt));

  const int jobs = static_cast<int>(grid.size()) * seeds;
  std::vector<NocSimStats> sims(jobs);
  parallel_for(jobs, workers, [&](int i) {
    const SweepPoint& pt = grid[static_cast<size_t>(i / seeds)];
    sims[i] =
        run_sim_point(cfg, pt, cfg.seeds[static_cast<size_t>(i % seeds)], false);
  });

  const double window = static_cast<double>(cfg.horizon - cfg.warmup);
  CsvTable table;
  table.header = {"rate",      "burst_prob", "deflect_prob", "status",
                  "loop_id",   "orientation", "loop_index",  "loop_time",
                  "model_rate", "model_count", "sim_count",  "accuracy_pct",
                  "degenerate"};
  for (size_t p = 0; p < grid.size(); ++p) {
    const auto loops = loops_of(cfg.topology, deflect_at(cfg, grid[p]));
    const ModelOutcome& mo = models[p];
    for (size_t li = 0; li < loops.size(); ++li) {
      std::vector<std::string> row = point_fields(grid[p]);
      if (mo.unstable) {
        append(row, {"skipped-unstable", std::to_string(loops[li].id),
                     orientation_name(loops[li].orientation),
                     std::to_string(loops[li].index),
                     std::to_string(loops[li].loop_time), fixed6(0.0),
                     fixed6(0.0), fixed6(0.0), fixed6(0.0), "0"});
        table.rows.push_back(row);
        continue;
      }
      double sim_count = 0.0;
      for (int s = 0; s < seeds; ++s) {
        sim_count += static_cast<double>(
            sims[p * static_cast<size_t>(seeds) + static_cast<size_t>(s)]
                .loop_deflections[li]);
      }
      sim_count /= static_cast<double>(seeds);
      const double model_count = mo.result.loops[li].deflection_rate * window;
      bool degenerate = false;
      double accuracy;
      if (sim_count < 0.5 && model_count < 0.5) {
        accuracy = 100.0;
        degenerate = true;
      } else if (sim_count <= 0.0) {
        accuracy = 0.0;
      } else {
        accuracy = std::max(
            0.0, 100.0 * (1.0 - std::abs(model_count - sim_count) / sim_count));
      }
      append(row, {"ok", std::to_string(loops[li].id),
                   orientation_name(loops[li].orientation),
                   std::to_string(loops[li].index),
                   std::to_string(loops[li].loop_time),
                   fixed6(mo.result.loops[li].deflection_rate),
                   fixed6(model_count), fixed6(sim_count), fixed6(accuracy),
                   degenerate ? "1" : "0"});
      table.rows.push_back(row);
    }
  }
  write_csv(out_path(out_dir, "deflection.csv"), table);
  return 0;
}

}  // namespace noclat
