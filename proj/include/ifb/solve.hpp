#pragma once

#include "ifb/imaging.hpp"

#include <functional>
#include <vector>

namespace ifb {

/// One logged iteration. Energies are filled by the problem-specific hook;
/// rows without energy information carry NaN there.
struct TraceRow {
  int k = 0;
  double alpha = 0.0;
  double primal = 0.0, dual = 0.0, gap = 0.0;
  double residual_m = 0.0;  // ||x^{k+1}-x^k||_M / max(1, ||x^k||_M)
  double e_k = 0.0;         // alpha_k ||x^k - x^{k-1}||_M^2
  double err_sum = 0.0;
  double ms = 0.0;          // cumulative wall clock
};

struct StopRule {
  double tol = 0.0;            // fixed-point residual threshold (0 = disabled)
  int k_max = 1000;
  double gap_threshold = -1.0; // absolute gap threshold (<0 = disabled)
};

enum class RunStatus { Converged, GapReached, MaxIter, Diverged };

struct RunResult {
  RunStatus status = RunStatus::MaxIter;
  int iters = 0;
  std::vector<TraceRow> trace;
};

const char* run_status_name(RunStatus s);

/// Hook filling primal/dual/gap for an inertial forward-backward iterate.
using FBEnergyHook = std::function<void(const Vec& x, TraceRow& row)>;

/// Runs the inertial forward-backward iteration until the stop rule fires.
/// Rows are logged every `log_stride` iterations (plus the final one); the
/// energy hook, when present, runs every iteration so gap-based stopping and
/// per-iterate certificates stay exact.
RunResult run_inertial_fb(FBState& state, const MonotonePair& prob, const Metric& m,
                          double lambda, const AlphaSchedule& sched, const StopRule& stop,
                          int log_stride = 1, const FBEnergyHook& hook = nullptr);

using PDEnergyHook = std::function<void(const Vec& x, const Vec& y, TraceRow& row)>;

RunResult run_ipdfb(PDState& state, const SaddleProblem& prob, const PDConfig& cfg,
                    const StopRule& stop, int log_stride = 1,
                    const PDEnergyHook& hook = nullptr);

}  // namespace ifb
