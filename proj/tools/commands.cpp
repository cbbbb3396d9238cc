#include "commands.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "plot.hpp"
#include "pnpkit/diagnostics.hpp"
#include "pnpkit/gmm.hpp"
#include "pnpkit/io.hpp"
#include "pnpkit/sampling.hpp"

namespace pnpkit::cli {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

struct Session {
  Json config;
  Context ctx;
  std::filesystem::path out_dir;
  std::string hash;
};

Session open_session(const CommandOptions& opts, const std::string& command, std::initializer_list<const char*> tasks) {
  Session s;
  s.config = load_config(opts.config);
  s.ctx.base_dir = opts.config.parent_path();
  if (s.config.contains("task")) {
    const std::string task = get_string(s.config, "task", "", "config");
    bool ok = false;
    for (const char* t : tasks) ok = ok || task == t;
    if (!ok) throw ConfigError("task '" + task + "' cannot be run by the " + command + " command");
  }
  std::uint64_t seed = 0;
  if (s.config.contains("seed")) {
    const Json& j = s.config.at("seed");
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
      throw ConfigError("seed must be a non-negative integer");
    }
    seed = j.get<std::uint64_t>();
  }
  if (opts.seed) seed = *opts.seed;
  s.ctx.seed = seed;
  s.hash = config_hash(s.config, seed);
  if (opts.out) {
    s.out_dir = *opts.out;
  } else if (s.config.contains("output")) {
    s.out_dir = resolve(s.ctx, get_string(s.config, "output", "", "config"));
  } else {
    s.out_dir = std::filesystem::path("pnpkit-out") / s.hash;
  }
  std::filesystem::create_directories(s.out_dir);
  return s;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

Json default_operator(const std::string& task) {
  if (task == "inpaint") return Json{{"type", "mask"}, {"keep", 0.5}};
  if (task == "denoise") return Json{{"type", "identity"}};
  return Json{{"type", "blur"}, {"kernel", "uniform"}, {"size", 9}};
}

Json get_or(const Json& config, const char* key, Json fallback) {
  return config.contains(key) ? config.at(key) : std::move(fallback);
}

Signal observe(const LinearOp& k, const Signal& x, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return add_gaussian_noise(k.apply(x), sigma, rng);
}

void save_image_outputs(const Signal& x, const std::filesystem::path& stem) {
  save_signal(x, stem.string() + ".pnpk");
  if (x.rank() >= 2 && (x.rank() == 2 || x.shape()[2] == 3)) save_signal(x, stem.string() + ".pgm");
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("PNPKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

double residual_slope(const Trace& trace) {
  if (trace.empty()) return std::numeric_limits<double>::quiet_NaN();
  const int last = trace.rows.back().iter;
  const int first = std::max(1, static_cast<int>(std::ceil(last / 10.0)));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const TraceRow& r : trace.rows) {
    if (r.iter < first || !(r.step_residual > 0) || !std::isfinite(r.step_residual)) continue;
    const double lx = std::log(static_cast<double>(r.iter));
    const double ly = std::log(r.step_residual);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom <= 0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

CompareRow summarize_run(const std::string& solver, const std::string& image, const Trace& trace,
                         const std::string& stop_reason, bool diverged) {
  CompareRow row;
  row.solver = solver;
  row.image = image;
  row.trace = trace;
  row.stop_reason = stop_reason;
  row.diverged = diverged;
  if (!trace.empty()) row.final_psnr = trace.rows.back().psnr;
  for (const TraceRow& r : trace.rows) {
    if (std::isfinite(r.step_residual) && !(r.step_residual >= row.min_residual)) row.min_residual = r.step_residual;
  }
  row.residual_slope = residual_slope(trace);
  row.converged = !diverged && (stop_reason == "tolerance" || row.residual_slope <= kSlopeThreshold);
  return row;
}

int cmd_solve(const CommandOptions& opts) {
  Session s = open_session(opts, "solve", {"deblur", "inpaint", "denoise"});
  const Json& c = s.config;
  check_keys(c, {"task", "image", "operator", "noise", "denoiser", "solver", "seed", "output"}, "config");
  const std::string task = get_string(c, "task", "deblur", "config");
  if (!c.contains("image")) throw ConfigError("solve needs an image");
  if (!c.contains("solver")) throw ConfigError("solve needs a solver");
  const Signal x = load_image_spec(c.at("image"), s.ctx);
  const LinearOp k = build_operator(get_or(c, "operator", default_operator(task)), x.shape(), s.ctx);
  const double noise = noise_sigma(get_or(c, "noise", Json{{"percent", 3}}));
  const Signal y = observe(k, x, noise, s.ctx.seed);
  SolverSpec spec = parse_solver(c.at("solver"));
  spec.cfg.reference = x;
  const DenoiserSpec den =
      build_denoiser(spec.denoiser ? *spec.denoiser : get_or(c, "denoiser", Json{{"type", "tv"}}), x.shape(), s.ctx);

  save_signal(y, s.out_dir / "observed.pnpk");
  Json summary{{"algo", spec.algo}, {"seed", s.ctx.seed}, {"config_hash", s.hash}};
  if (y.shape() == x.shape()) summary["input_psnr"] = num(psnr(y, x));
  try {
    const SolverResult res = run_algorithm(spec, k, y, den, noise);
    save_image_outputs(res.x, s.out_dir / "reconstruction");
    write_trace(res.trace, s.out_dir / "trace.csv");
    summary["final_psnr"] = num(psnr(res.x, x));
    summary["iters"] = res.iterations;
    summary["stop_reason"] = res.stop_reason;
    write_json(s.out_dir / "summary.json", summary);
  } catch (const DivergenceError& e) {
    write_trace(e.trace(), s.out_dir / "trace.csv");
    summary["final_psnr"] = num(psnr(e.last_finite(), x));
    summary["iters"] = e.step();
    summary["stop_reason"] = "diverged";
    write_json(s.out_dir / "summary.json", summary);
    throw;
  }
  std::cout << s.out_dir.string() << "\n";
  return 0;
}

std::vector<CompareRow> run_compare(const Json& c, const Context& ctx) {
  check_keys(c, {"task", "images", "solvers", "operator", "noise", "denoiser", "seed", "output"}, "config");
  if (!c.contains("solvers") || !c.at("solvers").is_array() || c.at("solvers").size() < 2) {
    throw ConfigError("compare needs a solvers array with at least two entries");
  }
  if (!c.contains("images") || !c.at("images").is_array() || c.at("images").empty()) {
    throw ConfigError("compare needs a non-empty images array");
  }
  std::vector<SolverSpec> solvers;
  std::set<std::string> labels;
  for (const Json& sj : c.at("solvers")) {
    solvers.push_back(parse_solver(sj));
    if (!labels.insert(solvers.back().label).second) {
      throw ConfigError("duplicate solver name '" + solvers.back().label + "'; set distinct \"name\" fields");
    }
  }
  struct ImageCase {
    std::string label;
    Signal x;
    LinearOp k;
    Signal y;
  };
  const double noise = noise_sigma(get_or(c, "noise", Json{{"percent", 3}}));
  const Json op_spec = get_or(c, "operator", default_operator("deblur"));
  const Json den_spec = get_or(c, "denoiser", Json{{"type", "tv"}});
  std::vector<ImageCase> images;
  for (std::size_t i = 0; i < c.at("images").size(); ++i) {
    const Json& ij = c.at("images")[i];
    ImageCase ic;
    ic.label = image_label(ij);
    ic.x = load_image_spec(ij, ctx);
    ic.k = build_operator(op_spec, ic.x.shape(), ctx);
    ic.y = observe(ic.k, ic.x, noise, ctx.seed + 1000003ULL * i);
    images.push_back(std::move(ic));
  }
  // Build every denoiser up front so configuration errors surface before work starts.
  std::vector<DenoiserSpec> dens;
  for (const SolverSpec& sp : solvers)
    for (const ImageCase& ic : images) dens.push_back(build_denoiser(sp.denoiser ? *sp.denoiser : den_spec, ic.x.shape(), ctx));

  const std::size_t jobs = solvers.size() * images.size();
  std::vector<CompareRow> rows(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const SolverSpec& sp = solvers[j / images.size()];
      const ImageCase& ic = images[j % images.size()];
      SolverSpec run = sp;
      run.cfg.reference = ic.x;
      try {
        try {
          const SolverResult res = run_algorithm(run, ic.k, ic.y, dens[j], noise);
          rows[j] = summarize_run(sp.label, ic.label, res.trace, res.stop_reason, false);
        } catch (const DivergenceError& e) {
          rows[j] = summarize_run(sp.label, ic.label, e.trace(), "diverged", true);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(worker_count(), static_cast<int>(jobs)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

int cmd_compare(const CommandOptions& opts) {
  Session s = open_session(opts, "compare", {"compare"});
  const std::vector<CompareRow> rows = run_compare(s.config, s.ctx);
  std::string table = "solver,image,final_psnr,min_residual,residual_slope,converged\n";
  for (const CompareRow& r : rows) {
    table += r.solver + "," + r.image + "," + fmt(r.final_psnr) + "," + fmt(r.min_residual) + "," +
             fmt(r.residual_slope) + "," + (r.converged ? "true" : "false") + "\n";
    write_trace(r.trace, s.out_dir / ("trace_" + safe_name(r.solver) + "_" + safe_name(r.image) + ".csv"));
  }
  write_file(s.out_dir / "compare.csv", table);
  std::cout << table;
  if (opts.assert_mode) {
    static const std::set<std::string> provable{"pnp-pgd", "pnp-apgd", "pnp-drs", "pnp-drsdiff", "gs-pnp"};
    std::vector<std::string> algos;
    for (const Json& sj : s.config.at("solvers")) algos.push_back(parse_solver(sj).algo);
    const std::size_t per_solver = rows.size() / algos.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (provable.count(algos[i / per_solver]) && !rows[i].converged) {
        throw AssertionFailure("provable method " + rows[i].solver + " did not converge on " + rows[i].image);
      }
    }
  }
  return 0;
}

std::vector<SweepRow> run_sweep(const Json& c, const Context& ctx) {
  check_keys(c, {"task", "operator", "x_true", "deltas", "ladder", "lambda_rule", "family", "solver", "seed", "output"},
             "config");
  std::vector<double> xs = get_numbers(c, "x_true", "config");
  if (xs.empty()) xs = {1.0, 0.5, 0.25, 0.125};
  const Signal xtrue = Signal::vector(Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size())));
  Json op = get_or(c, "operator", Json{{"type", "diagonal"}, {"values", {2.0, 1.0, 0.5, 0.25}}});
  const LinearOp k = build_operator(op, xtrue.shape(), ctx);

  std::vector<double> deltas = get_numbers(c, "deltas", "config");
  if (deltas.empty()) {
    const Json ladder = get_or(c, "ladder", Json::object());
    check_keys(ladder, {"k_min", "k_max"}, "ladder");
    const int k0 = get_int(ladder, "k_min", 1, "ladder");
    const int k1 = get_int(ladder, "k_max", 8, "ladder");
    for (int i = k0; i <= k1; ++i) deltas.push_back(std::ldexp(1.0, -i));
  }
  const Json rule = get_or(c, "lambda_rule", Json::object());
  check_keys(rule, {"c", "power"}, "lambda_rule");
  const double rc = get_number(rule, "c", 0.5, "lambda_rule");
  const double rp = get_number(rule, "power", 0.5, "lambda_rule");
  const Json fam_spec = get_or(c, "family", Json::object());
  check_keys(fam_spec, {"transform", "rule", "levels"}, "family");
  SpectralDenoiserFamily fam;
  fam.transform = parse_transform(get_string(fam_spec, "transform", "dct", "family"));
  fam.rule = parse_shrink_rule(get_string(fam_spec, "rule", "uniform", "family"));
  fam.levels = get_int(fam_spec, "levels", 1, "family");
  const Json sol = get_or(c, "solver", Json::object());
  check_keys(sol, {"step", "max_iter", "tol"}, "solver");
  const double knorm = operator_norm(k);
  SolverConfig cfg;
  cfg.step = get_number(sol, "step", 1.0 / (knorm * knorm), "solver");
  cfg.max_iter = get_int(sol, "max_iter", 100000, "solver");
  cfg.tol = get_number(sol, "tol", 1e-13, "solver");
  cfg.track_objective = false;

  const Signal y0 = k.apply(xtrue);
  const Signal xdagger = naive_svd_solve(k, y0);
  Rng rng(ctx.seed);
  Vec u = rng.normal_vector(y0.size());
  u.normalize();
  std::vector<SweepRow> rows;
  for (double delta : deltas) {
    if (!(delta >= 0)) throw ConfigError("deltas must be non-negative");
    const Signal y = y0.with_values(y0.values() + delta * u);
    const double lambda = rc * std::pow(delta, rp);
    Signal x;
    if (lambda == 0.0) {
      x = naive_svd_solve(k, y);
    } else {
      const RegSlot slot = RegSlot::denoiser(linear_spectral_denoiser(fam, lambda), 0.0);
      x = run_pgd(quadratic_fidelity(k, y), slot, cfg, k.adjoint(y)).x;
    }
    rows.push_back({delta, lambda, (x.values() - xdagger.values()).norm()});
  }
  return rows;
}

bool sweep_strictly_decreasing(const std::vector<SweepRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].error < rows[i - 1].error)) return false;
  return true;
}

int cmd_sweep(const CommandOptions& opts) {
  Session s = open_session(opts, "sweep", {"sweep"});
  const auto rows = run_sweep(s.config, s.ctx);
  std::string csv = "delta,lambda,error\n";
  for (const SweepRow& r : rows) csv += fmt(r.delta) + "," + fmt(r.lambda) + "," + fmt(r.error) + "\n";
  write_file(s.out_dir / "sweep.csv", csv);
  std::cout << csv;
  if (opts.assert_mode && !sweep_strictly_decreasing(rows)) {
    throw AssertionFailure("sweep error column is not strictly decreasing");
  }
  return 0;
}

Json run_diagnose(const Json& c, const Context& ctx) {
  check_keys(c, {"task", "denoiser", "probe", "sigma", "mu", "delta", "probes", "fd_step", "seed", "output"}, "config");
  if (!c.contains("denoiser")) throw ConfigError("diagnose needs a denoiser");
  const Json probe = get_or(c, "probe", Json{{"shape", {16, 16}}});
  Signal x;
  if (probe.is_object() && probe.contains("shape")) {
    check_keys(probe, {"shape"}, "probe");
    const Shape shape = probe.at("shape").get<Shape>();
    Rng rng(ctx.seed ^ 0xD1A6ULL);
    x = Signal(shape);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform();
  } else {
    x = load_image_spec(probe, ctx);
  }
  const DenoiserSpec den = build_denoiser(c.at("denoiser"), x.shape(), ctx);
  const double sigma = get_number(c, "sigma", std::isnan(den.sigma) ? 0.05 : den.sigma, "config");
  const double mu = get_number(c, "mu", 1.0, "config");
  LipschitzOptions lo;
  lo.probes = get_int(c, "probes", lo.probes, "config");
  lo.fd_step = get_number(c, "fd_step", -1.0, "config");
  Rng rng(ctx.seed);
  const LipschitzEstimate est = estimate_residual_lipschitz(den.denoiser, x, sigma, rng, lo);
  Json report;
  report["denoiser"] = den.denoiser.id;
  report["epsilon_hat"] = num(est.epsilon);
  report["fd_step"] = num(est.fd_step);
  report["method"] = est.method;
  if (den.denoiser.residual_lipschitz) report["epsilon_exact"] = num(*den.denoiser.residual_lipschitz);
  report["asymmetry"] = x.size() <= 4096 ? num(jacobian_asymmetry(den.denoiser, x, sigma, lo.fd_step)) : Json(nullptr);
  report["homogeneity_defect"] = num(homogeneity_defect(den.denoiser, x, sigma, get_number(c, "delta", 1e-3, "config")));
  const double tau = drsdiff_tau_min(est.epsilon, mu);
  report["theorem_gate"] = Json{{"mu", mu}, {"pnp_drsdiff_tau_min", std::isnan(tau) ? Json("not applicable") : Json(tau)}};
  return report;
}

int cmd_diagnose(const CommandOptions& opts) {
  Session s = open_session(opts, "diagnose", {"diagnose"});
  const Json report = run_diagnose(s.config, s.ctx);
  write_json(s.out_dir / "diagnose.json", report);
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_sample(const CommandOptions& opts) {
  Session s = open_session(opts, "sample", {"sample"});
  const Json& c = s.config;
  check_keys(c, {"task", "signal", "operator", "prior", "ula", "y", "seed", "output", "stream_samples"}, "config");
  if (!c.contains("signal")) throw ConfigError("sample needs a signal (the ground truth used to simulate y)");
  const Signal xtrue = load_image_spec(c.at("signal"), s.ctx);
  const LinearOp k = build_operator(get_or(c, "operator", Json{{"type", "identity"}}), xtrue.shape(), s.ctx);

  const Json ula = get_or(c, "ula", Json::object());
  check_keys(ula, {"step", "sigma", "sigma_w", "burn_in", "kept", "thinning", "ess_coordinates", "diffusion"}, "ula");
  UlaConfig cfg;
  cfg.step = get_number(ula, "step", cfg.step, "ula");
  cfg.sigma = get_number(ula, "sigma", cfg.sigma, "ula");
  cfg.sigma_w = get_number(ula, "sigma_w", cfg.sigma_w, "ula");
  cfg.burn_in = get_int(ula, "burn_in", -1, "ula");
  cfg.kept = get_int(ula, "kept", 1000, "ula");
  cfg.thinning = get_int(ula, "thinning", 1, "ula");
  cfg.ess_coordinates = get_int(ula, "ess_coordinates", cfg.ess_coordinates, "ula");
  cfg.diffusion = get_number(ula, "diffusion", cfg.diffusion, "ula");
  cfg.seed = s.ctx.seed;

  const Json prior = get_or(c, "prior", Json{{"type", "gaussian"}, {"gamma", 1.0}});
  check_keys(prior, {"type", "gamma", "path"}, "prior");
  const std::string ptype = get_string(prior, "type", "gaussian", "prior");
  const auto n = static_cast<Eigen::Index>(xtrue.size());
  GmmPrior gmm;
  double gamma = 0.0;
  if (ptype == "gaussian") {
    gamma = get_number(prior, "gamma", 1.0, "prior");
    gmm = single_gaussian(Vec::Zero(n), gamma * gamma);
  } else if (ptype == "gmm") {
    gmm = load_gmm_json(resolve(s.ctx, get_string(prior, "path", "", "prior")));
  } else {
    throw ConfigError("unknown prior type '" + ptype + "' (expected gaussian or gmm)");
  }

  Signal y;
  if (c.contains("y")) {
    const auto ys = get_numbers(c, "y", "config");
    y = Signal(k.out_shape(), Eigen::Map<const Vec>(ys.data(), static_cast<Eigen::Index>(ys.size())));
  } else {
    y = observe(k, xtrue, cfg.sigma_w, s.ctx.seed ^ 0xA5A5A5A5ULL);
  }
  std::optional<std::filesystem::path> stream;
  if (get_bool(c, "stream_samples", false, "config")) stream = s.out_dir / "samples.pnpk";
  const UlaResult res = run_pnp_ula(k, y, mmse_gmm_denoiser(gmm), cfg, k.adjoint(y), stream);

  std::string csv = "coordinate,mean,variance\n";
  for (Eigen::Index i = 0; i < res.stats.mean.size(); ++i) {
    csv += std::to_string(i) + "," + fmt(res.stats.mean[i]) + "," + fmt(res.stats.variance[i]) + "\n";
  }
  write_file(s.out_dir / "stats.csv", csv);
  write_json(s.out_dir / "summary.json", Json{{"seed", s.ctx.seed},
                                              {"config_hash", s.hash},
                                              {"count", res.stats.count},
                                              {"min_ess", num(res.stats.min_ess)},
                                              {"stability", num(res.stability)},
                                              {"total_steps", res.total_steps}});
  if (ptype == "gaussian") {
    const GaussianPosterior post = gaussian_posterior_oracle(k, y, gamma, cfg.sigma, cfg.sigma_w);
    double mean_gap = 0.0;
    double var_err = 0.0;
    bool mean_ok = true;
    const double mean_ess = res.stats.ess.size() ? res.stats.ess.mean() : static_cast<double>(res.stats.count);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double gap = std::abs(res.stats.mean[i] - post.mean[i]);
      const double se = std::sqrt(res.stats.variance[i] / mean_ess);
      mean_gap = std::max(mean_gap, gap);
      mean_ok = mean_ok && gap <= std::max(3.0 * se, 2.0 * cfg.step);
      var_err = std::max(var_err, std::abs(res.stats.variance[i] / post.covariance(i, i) - 1.0));
    }
    const Json gap{{"mean_gap_inf", num(mean_gap)},
                   {"mean_within_tolerance", mean_ok},
                   {"max_variance_rel_error", num(var_err)},
                   {"variance_within_tolerance", var_err <= 0.1},
                   {"condition_number", num(post.condition_number)}};
    write_json(s.out_dir / "oracle_gap.json", gap);
    if (opts.assert_mode && !(mean_ok && var_err <= 0.1)) throw AssertionFailure("sampler misses the Gaussian oracle");
  }
  std::cout << s.out_dir.string() << "\n";
  return 0;
}

int cmd_plot(const CommandOptions& opts) {
  Session s = open_session(opts, "plot", {"plot"});
  const Json& c = s.config;
  check_keys(c, {"task", "traces", "labels", "output", "seed"}, "config");
  if (!c.contains("traces") || !c.at("traces").is_array() || c.at("traces").empty()) {
    throw ConfigError("plot needs a non-empty traces array");
  }
  std::vector<Trace> traces;
  std::vector<std::string> labels;
  for (const Json& p : c.at("traces")) {
    if (!p.is_string()) throw ConfigError("traces must be file paths");
    const auto path = resolve(s.ctx, p.get<std::string>());
    Trace t = read_trace(path);
    if (t.empty()) throw ParseError("trace " + path.string() + " has no rows", 0);
    traces.push_back(std::move(t));
    labels.push_back(path.stem().string());
  }
  if (c.contains("labels")) {
    labels = c.at("labels").get<std::vector<std::string>>();
    if (labels.size() != traces.size()) throw ConfigError("labels must match traces one to one");
  }
  write_file(s.out_dir / "plot.svg", render_svg(traces, labels));
  std::cout << (s.out_dir / "plot.svg").string() << "\n";
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Plug-and-play proximal solvers, RED and PnP-ULA"};
  std::string command;
  CommandOptions opts;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  app.add_option("command", command, "solve | compare | sweep | diagnose | sample | plot")->required();
  app.add_option("--config", config, "JSON config file")->required();
  auto* out_opt = app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--assert", opts.assert_mode, "exit 3 when the command's checks fail");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  opts.config = config;
  if (*out_opt) opts.out = out;
  if (*seed_opt) opts.seed = seed;

  try {
    if (command == "solve") return cmd_solve(opts);
    if (command == "compare") return cmd_compare(opts);
    if (command == "sweep") return cmd_sweep(opts);
    if (command == "diagnose") return cmd_diagnose(opts);
    if (command == "sample") return cmd_sample(opts);
    if (command == "plot") return cmd_plot(opts);
    std::cerr << "pnpkit: unknown command '" << command << "' (expected solve, compare, sweep, diagnose, sample or plot)\n";
    return 2;
  } catch (const AssertionFailure& e) {
    std::cerr << "pnpkit: assertion failed: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "pnpkit: diverged: " << e.what() << "\n";
    return 4;
  } catch (const ConvergenceError& e) {
    std::cerr << "pnpkit: numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "pnpkit: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace pnpkit::cli
