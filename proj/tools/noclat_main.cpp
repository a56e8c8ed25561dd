#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "noclat/config.hpp"
#include "noclat/sweep.hpp"

namespace {

noclat::ExperimentConfig load_with_overrides(const std::string& path,
                                             int seeds) {
  noclat::ExperimentConfig cfg = noclat::load_config(path);
  if (seeds > 0) {
    cfg.seeds.clear();
    for (int i = 1; i <= seeds; ++i) {
      cfg.seeds.push_back(static_cast<uint64_t>(i));
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency toolkit for priority-arbitrated NoCs with deflection "
               "routing: analytical model, cycle-accurate simulator, and "
               "validation harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string format = "csv";
  int seeds = 0;
  int workers = 0;
  std::vector<int> sizes = {4, 6, 8, 12, 16};

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", config_path, "experiment config (JSON)")
          ->required();
    }
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--seeds", seeds,
                    "run seeds 1..N, overriding the config seed list");
    sub->add_option(
        "--workers", workers,
        "worker threads (default: NOCLAT_WORKERS env, then hardware)");
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv"}));
  };

  CLI::App* analyze =
      app.add_subcommand("analyze", "analytical latency over the sweep grid");
  add_common(analyze, true);
  CLI::App* simulate = app.add_subcommand(
      "simulate", "cycle-accurate simulation over the grid and seeds");
  add_common(simulate, true);
  CLI::App* validate = app.add_subcommand(
      "validate", "model-vs-simulation comparison with error summary");
  add_common(validate, true);
  CLI::App* deflection = app.add_subcommand(
      "deflection-check", "per-loop deflected-count accuracy table");
  add_common(deflection, true);
  CLI::App* bench =
      app.add_subcommand("bench", "model wall-clock timing per mesh size");
  add_common(bench, false);
  bench->add_option("--sizes", sizes, "square mesh sizes (default 4 6 8 12 16)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // app.exit prints help or the parse error; fold CLI11's error codes
    // into the documented usage-error exit while keeping --help at 0.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(analyze)) {
      return noclat::run_analyze(load_with_overrides(config_path, seeds),
                                 out_dir);
    }
    if (app.got_subcommand(simulate)) {
      return noclat::run_simulate(load_with_overrides(config_path, seeds),
                                  out_dir, noclat::resolve_workers(workers));
    }
    if (app.got_subcommand(validate)) {
      return noclat::run_validate(load_with_overrides(config_path, seeds),
                                  out_dir, noclat::resolve_workers(workers));
    }
    if (app.got_subcommand(deflection)) {
      return noclat::run_deflection_check(
          load_with_overrides(config_path, seeds), out_dir,
          noclat::resolve_workers(workers));
    }
    if (app.got_subcommand(bench)) {
      return noclat::run_bench(sizes, out_dir);
    }
  } catch (const noclat::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const noclat::InstabilityError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
