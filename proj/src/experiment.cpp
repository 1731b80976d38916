#include "ifb/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ifb {

namespace {

[[noreturn]] void bad_config(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    bad_config("key '" + key + "' expects a number, got '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  double v = to_double(key, value);
  if (v != std::floor(v)) bad_config("key '" + key + "' expects an integer, got '" + value + "'");
  return static_cast<int>(v);
}

Kernel kernel_by_name(const std::string& name) {
  if (name == "motion7") return Kernel::motion7();
  if (name == "delta") return Kernel::delta();
  if (name == "box3") return Kernel::box(3);
  bad_config("unknown kernel '" + name + "'");
}

// Largest admissible constant extrapolation factor for the given problem.
// With smooth parts present this is the scalar bound at the normalized step;
// without them the step condition is alpha-independent and only the
// (1 - 3a - eps) > 0 coefficient remains, whose supremum is (1 - eps)/3.
double alpha_cap(double L_Q, double L_P, const ExperimentConfig& cfg) {
  double g = std::max(L_Q > 0 ? cfg.gamma : 0.0, L_P > 0 ? cfg.delta : 0.0);
  if (g <= 0.0) return (1.0 - cfg.eps) / 3.0 - 1e-9;
  return alpha_max_scalar(g, cfg.eps);
}

AlphaSchedule make_schedule(const ExperimentConfig& cfg, double L_Q, double L_P) {
  if (cfg.alpha_mode == "constant") return AlphaSchedule::constant(cfg.alpha);
  if (cfg.alpha_mode == "fista") return AlphaSchedule::fista();
  if (cfg.alpha_mode == "fista-safeguard") return AlphaSchedule::fista_safeguarded(cfg.c);
  if (cfg.alpha_mode == "max") return AlphaSchedule::constant(alpha_cap(L_Q, L_P, cfg));
  bad_config("unknown alpha mode '" + cfg.alpha_mode + "'");
}

// The constant factor a schedule settles on, or its supremum for FISTA laws
// (used only for reporting which theorem condition applies).
double schedule_cap(const AlphaSchedule& s) {
  switch (s.kind) {
    case AlphaSchedule::Kind::Constant: return s.alpha;
    case AlphaSchedule::Kind::Ramp: return s.alpha;
    case AlphaSchedule::Kind::Theorem2Max: return s.next(1, 0.0);
    default: return 1.0;
  }
}

StopRule make_stop(const ExperimentConfig& cfg, double gap0) {
  StopRule stop;
  stop.tol = cfg.tol;
  stop.k_max = cfg.k_max;
  stop.gap_threshold = cfg.gap_threshold_rel >= 0 ? cfg.gap_threshold_rel * gap0
                                                  : cfg.gap_threshold;
  return stop;
}

ImageGrid load_clean(const ExperimentConfig& cfg) {
  if (cfg.image == "synthetic") return synthetic_image(cfg.width, cfg.height);
  return read_pgm(cfg.image);
}

ImageGrid with_pixels(const ImageGrid& like, Vec pixels) {
  ImageGrid out;
  out.width = like.width;
  out.height = like.height;
  out.pixels = std::move(pixels);
  return out;
}

void finish(ExperimentResult& res, const RunResult& run, double gap0) {
  res.status = run.status;
  res.iters = run.iters;
  res.trace = run.trace;
  res.initial_gap = gap0;
  res.final_gap = run.trace.empty() ? std::nan("") : run.trace.back().gap;
  res.theory_ok = std::all_of(res.checks.begin(), res.checks.end(),
                              [](const auto& c) { return c.second; });
}

ExperimentResult run_rof_dual_fista(const ExperimentConfig& cfg, const ImageGrid& f_img) {
  RofDualProblem prob = build_rof_dual(f_img, cfg.lambda);
  const Index n2 = 2 * f_img.size();
  Metric m = Metric::identity(n2);
  double step = cfg.gamma / prob.L;

  AlphaSchedule sched = make_schedule(cfg, prob.L, 0.0);
  FBEnergyHook hook = [&](const Vec& p, TraceRow& row) {
    Energies e = rof_energies(prob.grad, prob.recover_primal(p), p, prob.f, cfg.lambda);
    row.primal = e.primal;
    row.dual = e.dual;
    row.gap = e.gap;
  };

  Energies e0 = rof_energies(prob.grad, prob.f, Vec::Zero(n2), prob.f, cfg.lambda);
  FBState state = FBState::init(Vec::Zero(n2));
  RunResult run = run_inertial_fb(state, prob.pair, m, step, sched, make_stop(cfg, e0.gap),
                                  cfg.log_stride, hook);

  ExperimentResult res;
  auto t1 = check_theorem1(m, prob.pair.B.cocoercivity, step);
  res.checks.emplace_back("theorem1-step", t1.ok);
  if (sched.kind == AlphaSchedule::Kind::FistaSafeguarded) {
    res.checks.emplace_back("safeguard-summability", true);
  } else {
    res.checks.emplace_back("theorem2-inertia",
                            check_theorem2(m, prob.pair.B.cocoercivity, step,
                                           schedule_cap(sched), cfg.eps));
  }
  finish(res, run, e0.gap);
  res.restored = with_pixels(f_img, prob.recover_primal(state.x_curr));
  return res;
}

ExperimentResult run_rof_saddle(const ExperimentConfig& cfg, const ImageGrid& f_img) {
  SaddleProblem prob = build_rof_saddle(f_img, cfg.lambda);
  PDConfig pd;
  // tau*sigma*||K||^2 = 0.999 at the requested tau/sigma ratio.
  pd.tau = std::sqrt(0.999 * cfg.tau_sigma_ratio) / prob.K_norm;
  pd.sigma = std::sqrt(0.999 / cfg.tau_sigma_ratio) / prob.K_norm;
  pd.rho = cfg.rho;
  pd.eps = cfg.eps;
  pd.alpha_schedule = make_schedule(cfg, prob.L_Q, prob.L_P);
  pd_metric(pd, prob.K);  // rejects inadmissible step sizes up front

  PDEnergyHook hook = [&](const Vec& x, const Vec& y, TraceRow& row) {
    // Overrelaxed dual iterates can leave the unit ball; the projection is a
    // feasible dual point, so the reported gap stays a valid bound.
    Energies e = rof_energies(prob.K, x, project_dual_ball(y), f_img.pixels, cfg.lambda);
    row.primal = e.primal;
    row.dual = e.dual;
    row.gap = e.gap;
  };

  Energies e0 = rof_energies(prob.K, f_img.pixels, Vec::Zero(prob.dim_y),
                             f_img.pixels, cfg.lambda);
  PDState state = PDState::init(f_img.pixels, Vec::Zero(prob.dim_y));
  RunResult run = run_ipdfb(state, prob, pd, make_stop(cfg, e0.gap), cfg.log_stride, hook);

  ExperimentResult res;
  double a_used = pd.rho != 1.0 ? 0.0 : schedule_cap(pd.alpha_schedule);
  res.checks.emplace_back("theorem3-steps", check_theorem3(prob, pd, a_used));
  if (pd.rho != 1.0) res.checks.emplace_back("rho-range", pd.rho > 0.0 && pd.rho < 2.0);
  finish(res, run, e0.gap);
  res.restored = with_pixels(f_img, state.x_curr);
  return res;
}

double run_deconv_reference(const ImageGrid& f_img, const Kernel& ker,
                            const ExperimentConfig& cfg) {
  SaddleProblem prob = build_deconv(f_img, ker, cfg.lambda, DeconvVariant::Explicit);
  PDConfig pd;
  ScalarSteps st = scalar_steps_from_lemma(prob.K_norm, prob.L_Q, prob.L_P, 1.0, 1.0, cfg.r);
  pd.tau = st.tau;
  pd.sigma = st.sigma;
  pd.r = cfg.r;
  pd.alpha_schedule = AlphaSchedule::constant(alpha_max_scalar(1.0, cfg.eps));
  StopRule stop;
  stop.k_max = 10000;
  PDState state = PDState::init(f_img.pixels, Vec::Zero(prob.dim_y));
  run_ipdfb(state, prob, pd, stop, stop.k_max);
  LinearMap grad = grad_op(f_img.width, f_img.height);
  LinearMap hop = conv_op(f_img.width, f_img.height, ker);
  return deconv_primal(grad, hop, state.x_curr, f_img.pixels, cfg.lambda);
}

double deconv_reference_energy(const ImageGrid& f_img, const Kernel& ker,
                               const ExperimentConfig& cfg) {
  if (!cfg.reference.empty()) {
    std::ifstream in(cfg.reference);
    double cached;
    if (in && (in >> cached)) return cached;
  }
  double e = run_deconv_reference(f_img, ker, cfg);
  if (!cfg.reference.empty()) {
    std::ofstream out(cfg.reference);
    if (!out) bad_config("cannot write reference file '" + cfg.reference + "'");
    out.precision(17);
    out << e << "\n";
  }
  return e;
}

ExperimentResult run_deconv(const ExperimentConfig& cfg, const ImageGrid& f_img,
                            const Kernel& ker, DeconvVariant variant) {
  SaddleProblem prob = build_deconv(f_img, ker, cfg.lambda, variant);
  LinearMap grad = grad_op(f_img.width, f_img.height);
  LinearMap hop = conv_op(f_img.width, f_img.height, ker);
  double e_ref = deconv_reference_energy(f_img, ker, cfg);

  PDConfig pd;
  pd.r = cfg.r;
  pd.gamma = cfg.gamma;
  pd.delta = cfg.delta;
  pd.s = cfg.s;
  pd.eps = cfg.eps;
  pd.rho = cfg.rho;
  pd.alpha_schedule = make_schedule(cfg, prob.L_Q, prob.L_P);
  ExperimentResult res;
  if (variant == DeconvVariant::Explicit) {
    ScalarSteps st = scalar_steps_from_lemma(prob.K_norm, prob.L_Q, prob.L_P,
                                             cfg.gamma, cfg.delta, cfg.r);
    pd.tau = st.tau;
    pd.sigma = st.sigma;
    res.checks.emplace_back("theorem3-steps",
                            check_theorem3(prob, pd, schedule_cap(pd.alpha_schedule)));
  } else {
    Vec d = prob.D.value_or(Vec::Zero(prob.dim_x));
    Vec e = prob.E.value_or(Vec::Zero(prob.dim_y));
    // The gradient's Neumann boundary makes some rows of K identically zero;
    // those dual variables never move, so give them any finite step via a
    // positive e_i instead of tripping the absent-variable error.
    Vec row_mass = prob.K.abs_pow_row_sums(cfg.s);
    for (Index i = 0; i < e.size(); ++i)
      if (row_mass[i] == 0.0 && e[i] == 0.0) e[i] = cfg.delta;
    DiagSteps st = diag_precond(prob.K, d, e, cfg.gamma, cfg.delta, cfg.r, cfg.s);
    pd.T = st.T;
    pd.Sigma = st.Sigma;
    res.checks.emplace_back("theorem4-steps",
                            check_theorem4(prob, *pd.T, *pd.Sigma,
                                           schedule_cap(pd.alpha_schedule), cfg.eps));
  }

  PDEnergyHook hook = [&](const Vec& x, const Vec&, TraceRow& row) {
    row.primal = deconv_primal(grad, hop, x, f_img.pixels, cfg.lambda);
    row.gap = row.primal - e_ref;
  };

  double gap0 = deconv_primal(grad, hop, f_img.pixels, f_img.pixels, cfg.lambda) - e_ref;
  PDState state = PDState::init(f_img.pixels, Vec::Zero(prob.dim_y));
  RunResult run = run_ipdfb(state, prob, pd, make_stop(cfg, gap0), cfg.log_stride, hook);

  finish(res, run, gap0);
  res.restored = with_pixels(f_img, state.x_curr);
  return res;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& map) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : map) cfg.set(key, value);
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "problem") problem = value;
  else if (key == "image") image = value;
  else if (key == "width") width = to_int(key, value);
  else if (key == "height") height = to_int(key, value);
  else if (key == "lambda") lambda = to_double(key, value);
  else if (key == "noise.sigma") noise_sigma = to_double(key, value);
  else if (key == "noise.seed") seed = static_cast<unsigned>(to_int(key, value));
  else if (key == "kernel") kernel = value;
  else if (key == "solver.ratio") tau_sigma_ratio = to_double(key, value);
  else if (key == "solver.alpha_mode") alpha_mode = value;
  else if (key == "solver.alpha") alpha = to_double(key, value);
  else if (key == "solver.rho") rho = to_double(key, value);
  else if (key == "solver.c") c = to_double(key, value);
  else if (key == "solver.gamma") gamma = to_double(key, value);
  else if (key == "solver.delta") delta = to_double(key, value);
  else if (key == "solver.r") r = to_double(key, value);
  else if (key == "solver.s") s = to_double(key, value);
  else if (key == "solver.eps") eps = to_double(key, value);
  else if (key == "stop.tol") tol = to_double(key, value);
  else if (key == "stop.k_max") k_max = to_int(key, value);
  else if (key == "stop.gap") gap_threshold = to_double(key, value);
  else if (key == "stop.gap_rel") gap_threshold_rel = to_double(key, value);
  else if (key == "out.stride") log_stride = to_int(key, value);
  else if (key == "out.trace") out_trace = value;
  else if (key == "out.image") out_image = value;
  else if (key == "reference") reference = value;
  else bad_config("unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kProblems = {
      "rof-dual-fista", "rof-saddle-pd", "deconv-explicit", "deconv-splitdual"};
  static const std::set<std::string> kAlphaModes = {"constant", "fista",
                                                    "fista-safeguard", "max"};
  if (!kProblems.count(problem))
    bad_config("problem must be one of rof-dual-fista, rof-saddle-pd, "
               "deconv-explicit, deconv-splitdual (got '" + problem + "')");
  if (!kAlphaModes.count(alpha_mode))
    bad_config("unknown alpha mode '" + alpha_mode + "'");
  if (image == "synthetic" && (width < 2 || height < 2))
    bad_config("synthetic image must be at least 2x2");
  if (lambda <= 0) bad_config("lambda must be positive");
  if (noise_sigma < 0) bad_config("noise sigma must be nonnegative");
  if (alpha < 0 || alpha >= 1) bad_config("alpha must lie in [0, 1)");
  if (rho <= 0 || rho > 2) bad_config("rho must lie in (0, 2]");
  if (rho != 1.0 && (alpha_mode != "constant" || alpha != 0.0))
    bad_config("overrelaxation (rho != 1) requires alpha = 0");
  if (c <= 0) bad_config("safeguard constant c must be positive");
  if (gamma <= 0 || gamma >= 2) bad_config("gamma must lie in (0, 2)");
  if (delta <= 0 || delta >= 2) bad_config("delta must lie in (0, 2)");
  if (r <= 0) bad_config("r must be positive");
  if (s < 0 || s > 2) bad_config("s must lie in [0, 2]");
  if (eps <= 0 || eps >= 0.25) bad_config("eps must lie in (0, 0.25)");
  if (tau_sigma_ratio <= 0) bad_config("tau/sigma ratio must be positive");
  if (tol < 0) bad_config("tol must be nonnegative");
  if (k_max < 1) bad_config("k_max must be at least 1");
  if (log_stride < 1) bad_config("log stride must be at least 1");
  kernel_by_name(kernel);  // validates the name
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ImageGrid clean = load_clean(cfg);

  if (cfg.problem == "rof-dual-fista" || cfg.problem == "rof-saddle-pd") {
    ImageGrid f = clean;
    add_gaussian_noise(f, cfg.noise_sigma, cfg.seed);
    return cfg.problem == "rof-dual-fista" ? run_rof_dual_fista(cfg, f)
                                           : run_rof_saddle(cfg, f);
  }

  Kernel ker = kernel_by_name(cfg.kernel);
  LinearMap hop = conv_op(clean.width, clean.height, ker);
  ImageGrid f = with_pixels(clean, hop.apply(clean.pixels));
  add_gaussian_noise(f, cfg.noise_sigma, cfg.seed);
  return run_deconv(cfg, f, ker,
                    cfg.problem == "deconv-explicit" ? DeconvVariant::Explicit
                                                     : DeconvVariant::SplitDual);
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("trace: cannot write " + path);
  out << "k,alpha,primal,dual,gap,residual_m,e_k,err_sum,ms\n";
  char buf[256];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.k, r.alpha, r.primal, r.dual, r.gap, r.residual_m, r.e_k,
                  r.err_sum, r.ms);
    out << buf;
  }
  if (!out) throw std::runtime_error("trace: write failed for " + path);
}

void emit_alpha_curve(const std::string& path, double eps, int grid) {
  if (grid < 1) bad_config("alpha-curve grid must be at least 1");
  if (eps <= 0 || eps >= 0.25) bad_config("eps must lie in (0, 0.25)");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("alpha-curve: cannot write " + path);
  out << "gamma,alpha_max\n";
  char buf[128];
  for (int i = 1; i <= grid; ++i) {
    double g = 2.0 * i / (grid + 1);
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", g, alpha_max_scalar(g, eps));
    out << buf;
  }
}

std::string summarize(const ExperimentConfig& cfg, const ExperimentResult& res) {
  std::ostringstream out;
  out.precision(6);
  out << "problem:    " << cfg.problem << "\n"
      << "status:     " << run_status_name(res.status) << " after " << res.iters
      << " iterations\n"
      << "gap:        " << res.final_gap << " (initial " << res.initial_gap << ")\n";
  for (const auto& [name, ok] : res.checks)
    out << "check:      " << name << " " << (ok ? "pass" : "FAIL") << "\n";
  out << "guarantees: " << (res.theory_ok ? "certified" : "experimental") << "\n";
  return out.str();
}

}  // namespace ifb
