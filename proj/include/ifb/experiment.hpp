#pragma once

#include "ifb/io.hpp"
#include "ifb/solve.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ifb {

/// A fully specified experiment: problem instance, solver parameters,
/// stopping rules and output paths. Mirrors the key=value config format
/// one-to-one (see ExperimentConfig::from_map for the key names).
struct ExperimentConfig {
  // problem instance
  std::string problem;              // rof-dual-fista | rof-saddle-pd | deconv-explicit | deconv-splitdual
  std::string image = "synthetic";  // PGM path or "synthetic"
  Index width = 64, height = 64;    // synthetic size
  double lambda = 10.0;
  double noise_sigma = 0.1;
  unsigned seed = 42;
  std::string kernel = "motion7";   // deconvolution kernel: motion7 | delta | box3

  // solver
  double tau_sigma_ratio = 1.0;     // scalar primal/dual step ratio
  std::string alpha_mode = "constant";  // constant | fista | fista-safeguard | max
  double alpha = 0.0;
  double rho = 1.0;
  double c = 1e4;
  double gamma = 1.0, delta = 1.0, r = 1.0, s = 1.0, eps = 1e-6;

  // stopping / logging
  double tol = 0.0;
  int k_max = 2000;
  double gap_threshold = -1.0;      // absolute; < 0 disables
  double gap_threshold_rel = -1.0;  // relative to the initial gap; < 0 disables
  int log_stride = 1;

  // outputs
  std::string out_trace = "trace.csv";
  std::string out_image;            // optional restored-image PGM
  std::string reference;            // deconvolution reference-energy cache file

  static ExperimentConfig from_map(const ConfigMap& map);
  /// Applies one "key=value" override (same keys as the config file).
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

struct ExperimentResult {
  RunStatus status = RunStatus::MaxIter;
  int iters = 0;
  double final_gap = 0.0;
  double initial_gap = 0.0;
  std::vector<std::pair<std::string, bool>> checks;  // theorem checker outcomes
  bool theory_ok = true;   // false downgrades the run to "experimental"
  std::vector<TraceRow> trace;
  ImageGrid restored;
};

/// Runs the configured experiment. Deterministic given the seed. Throws
/// std::invalid_argument for invalid configurations (exit code 2 territory);
/// numeric blow-up is reported via status = Diverged with the last good
/// trace retained.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

/// Figure-style data file of (gamma, alpha(gamma)) over a uniform grid in (0,2).
void emit_alpha_curve(const std::string& path, double eps, int grid);

/// Human-readable summary lines (status, iterations, gap, checker outcomes).
std::string summarize(const ExperimentConfig& cfg, const ExperimentResult& res);

}  // namespace ifb
