#include "ifb/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

ifb::ExperimentConfig load_config(const std::string& path,
                                  const std::vector<std::string>& overrides) {
  auto cfg = ifb::ExperimentConfig::from_map(ifb::parse_config_file(path));
  for (const std::string& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: override '" + kv + "' is not key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

// Runs one experiment and flushes its outputs; the trace is written even on
// numeric blow-up so the last good rows survive.
ifb::ExperimentResult run_one(const ifb::ExperimentConfig& cfg) {
  ifb::ExperimentResult res = ifb::run_experiment(cfg);
  ifb::write_trace_csv(cfg.out_trace, res.trace);
  if (!cfg.out_image.empty() && res.status != ifb::RunStatus::Diverged)
    ifb::write_pgm(cfg.out_image, res.restored);
  std::cout << ifb::summarize(cfg, res);
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial forward-backward splitting experiments"};
  app.require_subcommand(1);

  std::string config_path, config_path_b;
  std::vector<std::string> overrides;
  double eps = 1e-6;
  int grid = 200;
  std::string curve_out = "alpha_curve.csv";

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", config_path, "key=value config file")->required();
  run->add_option("--set", overrides, "override a config key (key=value, repeatable)");

  auto* curve = app.add_subcommand("alpha-curve",
                                   "Emit the maximal extrapolation factor over gamma");
  curve->add_option("--eps", eps, "margin epsilon");
  curve->add_option("--grid", grid, "number of interior grid points");
  curve->add_option("--out", curve_out, "output data file");

  auto* cmp = app.add_subcommand("compare",
                                 "Run two configs on the identical problem instance");
  cmp->add_option("configA", config_path, "first config file")->required();
  cmp->add_option("configB", config_path_b, "second config file")->required();
  cmp->add_option("--set", overrides, "override a key in both configs (key=value)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ifb::ExperimentResult res = run_one(load_config(config_path, overrides));
      return res.status == ifb::RunStatus::Diverged ? kExitDiverged : kExitOk;
    }
    if (curve->parsed()) {
      ifb::emit_alpha_curve(curve_out, eps, grid);
      std::cout << "wrote " << curve_out << " (" << grid << " rows)\n";
      return kExitOk;
    }
    // compare: force the problem instance of B to match A so the two solver
    // settings face byte-identical data.
    ifb::ExperimentConfig a = load_config(config_path, overrides);
    ifb::ExperimentConfig b = load_config(config_path_b, overrides);
    b.image = a.image;
    b.width = a.width;
    b.height = a.height;
    b.lambda = a.lambda;
    b.noise_sigma = a.noise_sigma;
    b.seed = a.seed;
    b.kernel = a.kernel;
    b.reference = a.reference;
    if (b.out_trace == a.out_trace) b.out_trace = a.out_trace + ".b";

    std::cout << "--- A: " << config_path << "\n";
    ifb::ExperimentResult ra = run_one(a);
    std::cout << "--- B: " << config_path_b << "\n";
    ifb::ExperimentResult rb = run_one(b);
    std::cout << "--- comparison\n"
              << "iterations: A=" << ra.iters << " B=" << rb.iters << " -> "
              << (ra.iters < rb.iters ? "A" : rb.iters < ra.iters ? "B" : "tie")
              << (ra.iters == rb.iters ? "" : " in fewer iterations") << "\n";
    bool diverged = ra.status == ifb::RunStatus::Diverged ||
                    rb.status == ifb::RunStatus::Diverged;
    return diverged ? kExitDiverged : kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
