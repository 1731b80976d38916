#include "ifb/solve.hpp"

#include <chrono>
#include <cmath>

namespace ifb {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool finite(const Vec& v) { return v.allFinite(); }

}  // namespace

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::GapReached: return "gap-reached";
    case RunStatus::MaxIter: return "max-iter";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

RunResult run_inertial_fb(FBState& state, const MonotonePair& prob, const Metric& m,
                          double lambda, const AlphaSchedule& sched, const StopRule& stop,
                          int log_stride, const FBEnergyHook& hook) {
  RunResult res;
  auto t0 = Clock::now();
  for (int k = 1; k <= stop.k_max; ++k) {
    double dx_sq = m_norm_sq(m, Vec(state.x_curr - state.x_prev));
    double alpha = sched.next(k, dx_sq);
    FBState next = inertial_fb_step(state, prob.A, prob.B, m, lambda, alpha);

    TraceRow row;
    row.k = k;
    row.alpha = alpha;
    row.e_k = alpha * dx_sq;
    row.err_sum = next.err_sum;
    double xn = std::sqrt(std::max(m_norm_sq(m, state.x_curr), 0.0));
    row.residual_m =
        std::sqrt(std::max(m_norm_sq(m, Vec(next.x_curr - state.x_curr)), 0.0)) /
        std::max(1.0, xn);
    row.primal = row.dual = row.gap = std::nan("");
    if (hook) hook(next.x_curr, row);
    row.ms = elapsed_ms(t0);

    bool blown = !finite(next.x_curr);
    bool log = blown || log_stride <= 1 || k % log_stride == 0 || k == 1;
    res.iters = k;
    if (blown) {
      if (log) res.trace.push_back(row);
      res.status = RunStatus::Diverged;
      return res;
    }
    state = std::move(next);
    bool gap_hit = stop.gap_threshold >= 0 && hook && row.gap <= stop.gap_threshold;
    bool conv = stop.tol > 0 && row.residual_m < stop.tol;
    if (log || gap_hit || conv || k == stop.k_max) res.trace.push_back(row);
    if (gap_hit) {
      res.status = RunStatus::GapReached;
      return res;
    }
    if (conv) {
      res.status = RunStatus::Converged;
      return res;
    }
  }
  res.status = RunStatus::MaxIter;
  return res;
}

RunResult run_ipdfb(PDState& state, const SaddleProblem& prob, const PDConfig& cfg,
                    const StopRule& stop, int log_stride, const PDEnergyHook& hook) {
  RunResult res;
  auto t0 = Clock::now();
  for (int k = 1; k <= stop.k_max; ++k) {
    double dz_sq = pd_norm_sq(cfg, prob.K, Vec(state.x_curr - state.x_prev),
                              Vec(state.y_curr - state.y_prev));
    double alpha = cfg.alpha_schedule.next(k, dz_sq);
    PDState next = ipdfb_step(state, prob, cfg, alpha);

    TraceRow row;
    row.k = k;
    row.alpha = (cfg.rho != 1.0) ? 0.0 : alpha;
    row.e_k = row.alpha * dz_sq;
    row.err_sum = next.err_sum;
    double zn_sq = pd_norm_sq(cfg, prob.K, state.x_curr, state.y_curr);
    row.residual_m = std::sqrt(pd_norm_sq(cfg, prob.K, Vec(next.x_curr - state.x_curr),
                                          Vec(next.y_curr - state.y_curr))) /
                     std::max(1.0, std::sqrt(zn_sq));
    row.primal = row.dual = row.gap = std::nan("");
    if (hook) hook(next.x_curr, next.y_curr, row);
    row.ms = elapsed_ms(t0);

    bool blown = !finite(next.x_curr) || !finite(next.y_curr);
    bool log = blown || log_stride <= 1 || k % log_stride == 0 || k == 1;
    res.iters = k;
    if (blown) {
      if (log) res.trace.push_back(row);
      res.status = RunStatus::Diverged;
      return res;
    }
    state = std::move(next);
    bool gap_hit = stop.gap_threshold >= 0 && hook && row.gap <= stop.gap_threshold;
    bool conv = stop.tol > 0 && row.residual_m < stop.tol;
    if (log || gap_hit || conv || k == stop.k_max) res.trace.push_back(row);
    if (gap_hit) {
      res.status = RunStatus::GapReached;
      return res;
    }
    if (conv) {
      res.status = RunStatus::Converged;
      return res;
    }
  }
  res.status = RunStatus::MaxIter;
  return res;
}

}  // namespace ifb
