#include "pnpkit/solvers.hpp"

#include <chrono>
#include <cmath>

namespace pnpkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Trace bookkeeping shared by every run driver.
class Recorder {
 public:
  explicit Recorder(const SolverConfig& cfg) : cfg_(cfg), start_(std::chrono::steady_clock::now()) {}

  void row(int iter, double objective, double step, double fp, const Signal& x) {
    TraceRow r;
    r.iter = iter;
    r.objective = objective;
    r.step_residual = step;
    r.fp_residual = fp;
    if (cfg_.reference) r.psnr = psnr(x, *cfg_.reference, cfg_.psnr_peak);
    if (cfg_.record_time) {
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    trace.push(r);
  }

  /// Throws DivergenceError when x is non-finite or beyond the bound.
  void guard(const Signal& x, int step, const Signal& last_finite) const {
    if (!x.all_finite()) throw DivergenceError("iterate became non-finite", step, last_finite, trace);
    if (x.values().norm() > kDivergenceBound) {
      throw DivergenceError("iterate norm exceeded 1e12", step, last_finite, trace);
    }
  }

  Trace trace;

 private:
  const SolverConfig& cfg_;
  std::chrono::steady_clock::time_point start_;
};

Signal axpy(const Signal& x, double a, const Signal& g) { return x.with_values(x.values() - a * g.values()); }

double dist(const Signal& a, const Signal& b) { return (a.values() - b.values()).norm(); }

SolverResult finish(Signal x, Recorder& rec, bool converged, int iterations) {
  SolverResult res;
  res.x = std::move(x);
  res.trace = std::move(rec.trace);
  res.stop_reason = converged ? "tolerance" : "max_iter";
  res.iterations = iterations;
  return res;
}

std::function<double(const Signal&)> sum_objective(const SmoothTerm& f, const std::function<double(const Signal&)>& g,
                                                   const SolverConfig& cfg) {
  if (!cfg.track_objective || !f.value || !g) return {};
  return [f, g](const Signal& x) { return f.value(x) + g(x); };
}

double eval_or_nan(const std::function<double(const Signal&)>& fn, const Signal& x) { return fn ? fn(x) : kNaN; }

RegSlot fidelity_slot(const LinearOp& k, const Signal& y) { return RegSlot::prox(quadratic_fidelity_prox(k, y)); }

double fidelity_value(const LinearOp& k, const Signal& y, const Signal& x) {
  return 0.5 * (k.apply(x).values() - y.values()).squaredNorm();
}

}  // namespace

SmoothTerm quadratic_fidelity(const LinearOp& k, const Signal& y) {
  if (y.shape() != k.out_shape()) throw ShapeError("fidelity data shape does not match the operator output");
  SmoothTerm f;
  f.gradient = [k, y](const Signal& x) {
    Signal r = k.apply(x);
    r.values() -= y.values();
    return k.adjoint(r);
  };
  f.value = [k, y](const Signal& x) { return fidelity_value(k, y, x); };
  const double nk = operator_norm(k);
  f.lipschitz = nk * nk;
  return f;
}

SmoothTerm diagonal_quadratic(Vec h, Vec c) {
  if (h.size() != c.size()) throw ShapeError("diagonal quadratic: size mismatch");
  SmoothTerm f;
  f.gradient = [h, c](const Signal& x) { return x.with_values(h.cwiseProduct(x.values() - c)); };
  f.value = [h, c](const Signal& x) { return 0.5 * (h.array() * (x.values() - c).array().square()).sum(); };
  f.lipschitz = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
  return f;
}

RegSlot RegSlot::prox(ProxMap p) {
  if (!p.evaluate) throw InvalidArgument("prox slot needs an evaluate function");
  RegSlot s;
  s.slot_ = std::move(p);
  return s;
}

RegSlot RegSlot::denoiser(Denoiser d, double sigma) {
  if (!d.apply) throw InvalidArgument("denoiser slot needs an apply function");
  if (!(sigma >= 0)) throw InvalidArgument("denoiser sigma must be non-negative");
  RegSlot s;
  s.slot_ = std::move(d);
  s.sigma_ = sigma;
  return s;
}

std::string RegSlot::describe() const {
  return is_prox() ? "prox:" + prox_map().id : "denoiser:" + denoiser_map().id;
}

Signal RegSlot::apply(const Signal& v, double lambda) const {
  return is_prox() ? prox_map()(v, lambda) : denoiser_map()(v, sigma_);
}

std::function<double(const Signal&)> RegSlot::objective(double lambda) const {
  if (is_prox()) {
    if (!prox_map().has_objective()) return {};
    return prox_map().objective;
  }
  const Denoiser& d = denoiser_map();
  if (!d.prox_potential) return {};
  auto phi = d.prox_potential;
  const double sigma = sigma_;
  return [phi, sigma, lambda](const Signal& x) { return phi(x, sigma) / lambda; };
}

void SolverConfig::validate() const {
  if (!(step > 0) || !std::isfinite(step)) throw InvalidArgument("step size must be positive");
  if (!(alpha > 0 && alpha <= 1)) throw InvalidArgument("relaxation alpha must lie in (0, 1]");
  if (!(rho > 0)) throw InvalidArgument("penalty rho must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (!(tol >= 0)) throw InvalidArgument("tolerance must be non-negative");
  if (!(psnr_peak > 0)) throw InvalidArgument("PSNR peak must be positive");
}

SolverResult run_pgd(const SmoothTerm& f, const RegSlot& reg, const SolverConfig& cfg, const Signal& x0) {
  cfg.validate();
  const double lambda = cfg.step;
  const auto objective = sum_objective(f, reg.objective(lambda), cfg);
  Recorder rec(cfg);
  Signal x = x0;
  rec.row(0, eval_or_nan(objective, x), kNaN, kNaN, x);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Signal next = reg.apply(axpy(x, lambda, f.gradient(x)), lambda);
    rec.guard(next, k, x);
    const double step = dist(next, x);
    x = std::move(next);
    rec.row(k, eval_or_nan(objective, x), step, step, x);
    if (step <= cfg.tol) return finish(std::move(x), rec, true, k);
  }
  return finish(std::move(x), rec, false, cfg.max_iter);
}

SolverResult run_pgd_preconditioned(const SmoothTerm& f, const ProxMap& reg, const Vec& b, const SolverConfig& cfg,
                                    const Signal& x0) {
  cfg.validate();
  if (b.size() != 1 && b.size() != x0.size()) throw ShapeError("preconditioner size must be 1 or n");
  if (!((b.array() > 0).all())) throw InvalidArgument("preconditioner entries must be positive");
  const bool scalar = b.size() == 1;
  if (!scalar && !reg.separable()) {
    throw Unsupported("prox '" + reg.id + "' is not separable; a non-scalar preconditioner needs a separable prox");
  }
  const Vec inv_b = b.cwiseInverse();
  std::function<double(const Signal&)> objective;
  if (cfg.track_objective && f.value && reg.has_objective()) {
    objective = [f, reg](const Signal& x) { return f.value(x) + reg.objective(x); };
  }
  Recorder rec(cfg);
  Signal x = x0;
  rec.row(0, eval_or_nan(objective, x), kNaN, kNaN, x);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Signal g = f.gradient(x);
    Signal next;
    if (scalar) {
      next = reg(axpy(x, inv_b[0], g), inv_b[0]);
    } else {
      next = reg.evaluate_weighted(x.with_values(x.values() - inv_b.cwiseProduct(g.values())), inv_b);
    }
    rec.guard(next, k, x);
    const double step = dist(next, x);
    x = std::move(next);
    rec.row(k, eval_or_nan(objective, x), step, step, x);
    if (step <= cfg.tol) return finish(std::move(x), rec, true, k);
  }
  return finish(std::move(x), rec, false, cfg.max_iter);
}

SolverResult run_apgd(const SmoothTerm& f, const RegSlot& reg, const SolverConfig& cfg, const Signal& x0,
                      const Signal& y0) {
  cfg.validate();
  require_same_shape(x0, y0, "run_apgd");
  const double lambda = cfg.step;
  const double alpha = cfg.alpha;
  const double weight = 0.5 * alpha * (1.0 - 1.0 / alpha) * (1.0 - 1.0 / alpha);
  const auto objective = sum_objective(f, reg.objective(lambda), cfg);
  Recorder rec(cfg);
  std::vector<double> lyapunov;
  Signal x = x0;
  Signal y = y0;
  const double f0 = eval_or_nan(objective, x);
  rec.row(0, f0, kNaN, kNaN, x);
  lyapunov.push_back(f0);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Signal q = x.with_values((1.0 - alpha) * x.values() + alpha * y.values());
    Signal y_next = reg.apply(axpy(y, lambda, f.gradient(q)), lambda);
    Signal x_next = x.with_values((1.0 - alpha) * x.values() + alpha * y_next.values());
    rec.guard(x_next, k, x);
    rec.guard(y_next, k, x);
    const double step = dist(x_next, x);
    const double ystep = dist(y_next, y);
    x = std::move(x_next);
    y = std::move(y_next);
    const double fx = eval_or_nan(objective, x);
    rec.row(k, fx, step, ystep, x);
    lyapunov.push_back(fx + weight * step * step);
    if (std::max(step, ystep) <= cfg.tol) {
      SolverResult res = finish(std::move(x), rec, true, k);
      res.extra = std::move(lyapunov);
      res.aux = std::move(y);
      return res;
    }
  }
  SolverResult res = finish(std::move(x), rec, false, cfg.max_iter);
  res.extra = std::move(lyapunov);
  res.aux = std::move(y);
  return res;
}

SolverResult run_drs(const RegSlot& map_a, const RegSlot& map_b, const SolverConfig& cfg, const Signal& x0,
                     const std::function<double(const Signal&)>& objective) {
  cfg.validate();
  const double lambda = cfg.step;
  const auto obj = cfg.track_objective ? objective : std::function<double(const Signal&)>{};
  Recorder rec(cfg);
  Signal x = x0;
  Signal y = map_a.apply(x, lambda);
  rec.row(0, eval_or_nan(obj, y), kNaN, kNaN, y);
  bool converged = false;
  int k = 1;
  for (; k <= cfg.max_iter; ++k) {
    const Signal z = map_b.apply(y.with_values(2.0 * y.values() - x.values()), lambda);
    Signal next = x.with_values(x.values() + z.values() - y.values());
    rec.guard(next, k, x);
    const double step = dist(next, x);
    x = std::move(next);
    y = map_a.apply(x, lambda);
    rec.guard(y, k, x);
    rec.row(k, eval_or_nan(obj, y), step, step, y);
    if (step <= cfg.tol) {
      converged = true;
      break;
    }
  }
  SolverResult res = finish(std::move(y), rec, converged, converged ? k : cfg.max_iter);
  res.aux = std::move(x);
  return res;
}

SolverResult run_pnp_drs(const LinearOp& k, const Signal& y, const RegSlot& reg, const SolverConfig& cfg,
                         const Signal& x0) {
  const auto g = reg.objective(cfg.step);
  std::function<double(const Signal&)> obj;
  if (g) obj = [k, y, g](const Signal& x) { return fidelity_value(k, y, x) + g(x); };
  return run_drs(reg, fidelity_slot(k, y), cfg, x0, obj);
}

SolverResult run_pnp_drsdiff(const LinearOp& k, const Signal& y, const RegSlot& reg, const SolverConfig& cfg,
                             const Signal& x0) {
  const auto g = reg.objective(cfg.step);
  std::function<double(const Signal&)> obj;
  if (g) obj = [k, y, g](const Signal& x) { return fidelity_value(k, y, x) + g(x); };
  return run_drs(fidelity_slot(k, y), reg, cfg, x0, obj);
}

SolverResult run_admm(const LinearOp& k, const Signal& y, const RegSlot& reg, const SolverConfig& cfg,
                      const Signal& x0, const Signal& z0, const Signal& u0) {
  cfg.validate();
  require_same_shape(x0, z0, "run_admm");
  require_same_shape(x0, u0, "run_admm");
  const double rho = cfg.rho;
  const Signal kty = k.adjoint(y);
  const auto g = reg.objective(1.0 / rho);
  std::function<double(const Signal&)> obj;
  if (cfg.track_objective && g) obj = [k, y, g](const Signal& x) { return fidelity_value(k, y, x) + g(x); };
  Recorder rec(cfg);
  Signal x = x0;
  Signal z = z0;
  Signal u = u0;
  rec.row(0, eval_or_nan(obj, x), kNaN, dist(x, z), x);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Signal next = solve_shifted_normal(k, rho, kty.with_values(kty.values() + rho * (z.values() - u.values())));
    rec.guard(next, it, x);
    z = reg.apply(next.with_values(next.values() + u.values()), 1.0 / rho);
    rec.guard(z, it, x);
    u.values() += next.values() - z.values();
    const double step = dist(next, x);
    x = std::move(next);
    const double primal = dist(x, z);
    rec.row(it, eval_or_nan(obj, x), step, primal, x);
    if (std::max(step, primal) <= cfg.tol) {
      SolverResult res = finish(std::move(x), rec, true, it);
      res.aux = std::move(z);
      return res;
    }
  }
  SolverResult res = finish(std::move(x), rec, false, cfg.max_iter);
  res.aux = std::move(z);
  return res;
}

HqsSchedule HqsSchedule::constant(double rho, double sigma, int iterations) {
  if (iterations < 1) throw InvalidArgument("schedule needs at least one entry");
  return HqsSchedule{std::vector<double>(static_cast<std::size_t>(iterations), rho),
                     std::vector<double>(static_cast<std::size_t>(iterations), sigma)};
}

HqsSchedule HqsSchedule::decreasing(double sigma_noise, double sigma_start, double sigma_end, int iterations,
                                    double weight) {
  if (iterations < 1) throw InvalidArgument("schedule needs at least one entry");
  if (!(sigma_start > 0 && sigma_end > 0 && sigma_noise > 0 && weight > 0)) {
    throw InvalidArgument("decreasing schedule needs positive parameters");
  }
  HqsSchedule s;
  const double a = std::log(sigma_start);
  const double b = std::log(sigma_end);
  for (int i = 0; i < iterations; ++i) {
    const double t = iterations == 1 ? 1.0 : static_cast<double>(i) / (iterations - 1);
    const double sigma = std::exp(a + (b - a) * t);
    s.sigma.push_back(sigma);
    s.rho.push_back(weight * sigma_noise * sigma_noise / (sigma * sigma));
  }
  return s;
}

SolverResult run_hqs(const LinearOp& k, const Signal& y, const RegSlot& reg, const HqsSchedule& schedule,
                     const SolverConfig& cfg, const Signal& x0) {
  cfg.validate();
  if (schedule.rho.empty()) throw InvalidArgument("HQS needs a non-empty rho schedule");
  for (double r : schedule.rho)
    if (!(r > 0)) throw InvalidArgument("HQS rho schedule must be positive");
  auto pick = [](const std::vector<double>& v, int i) { return v[std::min<std::size_t>(i, v.size() - 1)]; };
  Recorder rec(cfg);
  Signal z = x0;
  rec.row(0, kNaN, kNaN, kNaN, z);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const double rho = pick(schedule.rho, it - 1);
    const Signal x = prox_quadratic_fidelity(z, 1.0 / rho, k, y);
    rec.guard(x, it, z);
    Signal next;
    if (reg.is_prox()) {
      next = reg.prox_map()(x, 1.0 / rho);
    } else {
      const double sigma = schedule.sigma.empty() ? reg.sigma() : pick(schedule.sigma, it - 1);
      next = reg.denoiser_map()(x, sigma);
    }
    rec.guard(next, it, z);
    const double step = dist(next, z);
    z = std::move(next);
    rec.row(it, kNaN, step, dist(x, z), z);
    if (step <= cfg.tol) return finish(std::move(z), rec, true, it);
  }
  return finish(std::move(z), rec, false, cfg.max_iter);
}

SolverResult run_red_gd(const LinearOp& k, const Signal& y, const Denoiser& d, double lambda, double sigma,
                        double eta, const SolverConfig& cfg, const Signal& x0) {
  cfg.validate();
  if (!(eta > 0)) throw InvalidArgument("RED step eta must be positive");
  if (!(sigma > 0)) throw InvalidArgument("RED needs sigma > 0");
  const double weight = lambda / (sigma * sigma);
  // Returns the update direction and, through `objective`, ½‖Kx−y‖² + weight·½xᵀ(x − D(x)).
  auto bracket = [&](const Signal& x, double& objective) {
    Signal r = k.apply(x);
    r.values() -= y.values();
    const Signal dx = d(x, sigma);
    const Vec resid = x.values() - dx.values();
    objective = cfg.track_objective ? 0.5 * r.values().squaredNorm() + weight * 0.5 * x.values().dot(resid) : kNaN;
    Signal g = k.adjoint(r);
    g.values() += weight * resid;
    return g;
  };
  Recorder rec(cfg);
  Signal x = x0;
  double obj = kNaN;
  Signal g = bracket(x, obj);
  rec.row(0, obj, kNaN, g.values().norm(), x);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Signal next = axpy(x, eta, g);
    rec.guard(next, it, x);
    const double step = dist(next, x);
    x = std::move(next);
    g = bracket(x, obj);
    rec.row(it, obj, step, g.values().norm(), x);
    if (step <= cfg.tol) return finish(std::move(x), rec, true, it);
  }
  return finish(std::move(x), rec, false, cfg.max_iter);
}

namespace {

SolverResult red_proximal(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma, double lambda, double l,
                          const SolverConfig& cfg, const Signal& v0, bool accelerated) {
  cfg.validate();
  if (!(lambda > 0)) throw InvalidArgument("RED-PG needs lambda > 0");
  if (!(l > 1)) throw InvalidArgument("RED-PG needs L > 1");
  const double prox_step = 1.0 / (lambda * l);
  Recorder rec(cfg);
  std::vector<double> ts{1.0};
  Signal v = v0;
  Signal x_prev = v0;
  rec.row(0, kNaN, kNaN, kNaN, v0);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Signal x = prox_quadratic_fidelity(v, prox_step, k, y);
    rec.guard(x, it, x_prev);
    const Signal dx = d(x, sigma);
    Signal anchor = x;
    if (accelerated) {
      const double t_prev = ts.back();
      const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
      ts.push_back(t);
      anchor.values() += ((t_prev - 1.0) / t) * (x.values() - x_prev.values());
    }
    v = x.with_values(dx.values() / l - ((1.0 - l) / l) * anchor.values());
    rec.guard(v, it, x_prev);
    Signal r = k.apply(x);
    r.values() -= y.values();
    Signal fc = k.adjoint(r);
    fc.values() += lambda * (x.values() - dx.values());
    double obj = kNaN;
    if (cfg.track_objective) {
      obj = 0.5 * r.values().squaredNorm() + lambda * 0.5 * x.values().dot(x.values() - dx.values());
    }
    const double step = dist(x, x_prev);
    rec.row(it, obj, step, fc.values().norm(), x);
    x_prev = std::move(x);
    if (step <= cfg.tol) {
      SolverResult res = finish(std::move(x_prev), rec, true, it);
      res.aux = std::move(v);
      if (accelerated) res.extra = std::move(ts);
      return res;
    }
  }
  SolverResult res = finish(std::move(x_prev), rec, false, cfg.max_iter);
  res.aux = std::move(v);
  if (accelerated) res.extra = std::move(ts);
  return res;
}

}  // namespace

SolverResult run_red_pg(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma, double lambda, double l,
                        const SolverConfig& cfg, const Signal& v0) {
  return red_proximal(k, y, d, sigma, lambda, l, cfg, v0, false);
}

SolverResult run_red_apg(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma, double lambda, double l,
                         const SolverConfig& cfg, const Signal& v0) {
  return red_proximal(k, y, d, sigma, lambda, l, cfg, v0, true);
}

std::vector<double> nesterov_sequence(int count) {
  std::vector<double> t;
  if (count <= 0) return t;
  t.push_back(1.0);
  while (static_cast<int>(t.size()) < count) t.push_back(0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t.back() * t.back())));
  return t;
}

SolverResult run_gs_pnp(const LinearOp& k, const Signal& y, const Denoiser& gs, double sigma, double lambda,
                        const SolverConfig& cfg, const Signal& x0, const BacktrackingOptions& bt) {
  cfg.validate();
  if (!gs.potential || !gs.potential_gradient) {
    throw InvalidArgument("GS-PnP needs a denoiser with an explicit potential");
  }
  if (!(lambda >= 0)) throw InvalidArgument("GS-PnP needs lambda >= 0");
  auto objective = [&](const Signal& x) { return fidelity_value(k, y, x) + lambda * gs.potential(x, sigma); };
  auto step_map = [&](const Signal& x, double tau) {
    return prox_quadratic_fidelity(axpy(x, tau * lambda, gs.potential_gradient(x, sigma)), tau, k, y);
  };
  Recorder rec(cfg);
  double tau = cfg.step;
  Signal x = x0;
  double fx = objective(x);
  std::vector<double> history{fx};
  rec.row(0, fx, kNaN, kNaN, x);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Signal next = step_map(x, tau);
    double fnext = objective(next);
    if (bt.enabled) {
      int halvings = 0;
      // Round-off allowance on F.
      const double slack = 16 * std::numeric_limits<double>::epsilon() * std::abs(fx);
      while (!(fx - fnext + slack >= (bt.gamma / tau) * (next.values() - x.values()).squaredNorm())) {
        if (halvings == bt.max_halvings) {
          history.push_back(fnext);
          throw BacktrackingError("GS-PnP backtracking exhausted after " + std::to_string(halvings) +
                                      " halvings at iteration " + std::to_string(it),
                                  history);
        }
        tau *= 0.5;
        ++halvings;
        next = step_map(x, tau);
        fnext = objective(next);
      }
    }
    rec.guard(next, it, x);
    const double step = dist(next, x);
    x = std::move(next);
    fx = fnext;
    history.push_back(fx);
    rec.row(it, fx, step, step, x);
    if (step <= cfg.tol) {
      SolverResult res = finish(std::move(x), rec, true, it);
      res.extra = {tau};
      return res;
    }
  }
  SolverResult res = finish(std::move(x), rec, false, cfg.max_iter);
  res.extra = {tau};
  return res;
}

FixedPointProblem pnp_drsdiff_operator(const ProxMap& f, const Denoiser& d, double sigma, double tau) {
  if (!(tau > 0)) throw InvalidArgument("tau must be positive");
  return FixedPointProblem{[f, d, sigma, tau](const Signal& x) {
    const Signal p = f(x, tau);
    const Signal z = d(p.with_values(2.0 * p.values() - x.values()), sigma);
    return x.with_values(x.values() + z.values() - p.values());
  }};
}

FixedPointProblem pnp_drsdiff_operator(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma,
                                       double tau) {
  return pnp_drsdiff_operator(quadratic_fidelity_prox(k, y), d, sigma, tau);
}

double estimate_contraction(const std::vector<Signal>& iterates, double final_step) {
  if (iterates.size() < 2) return kNaN;
  const Signal& xstar = iterates.back();
  const double floor = 1e3 * final_step;
  const long usable = static_cast<long>(iterates.size()) - 1 - kContractionTail;
  double best = kNaN;
  for (long i = 0; i + 1 <= usable; ++i) {
    const double a = dist(iterates[static_cast<std::size_t>(i)], xstar);
    const double b = dist(iterates[static_cast<std::size_t>(i + 1)], xstar);
    if (a < floor || b < floor || a == 0.0) continue;
    const double ratio = b / a;
    if (!(ratio <= best)) best = ratio;
  }
  return best;
}

FixedPointResult run_fixed_point(const FixedPointProblem& t, const SolverConfig& cfg, const Signal& x0) {
  cfg.validate();
  Recorder rec(cfg);
  std::vector<Signal> iterates{x0};
  Signal x = x0;
  rec.row(0, kNaN, kNaN, kNaN, x);
  double step = kNaN;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Signal next = t.apply(x);
    rec.guard(next, it, x);
    step = dist(next, x);
    x = std::move(next);
    iterates.push_back(x);
    rec.row(it, kNaN, step, step, x);
    if (step <= cfg.tol) {
      FixedPointResult res;
      res.contraction = estimate_contraction(iterates, step);
      res.x = std::move(x);
      res.trace = std::move(rec.trace);
      res.stop_reason = "tolerance";
      res.iterations = it;
      return res;
    }
  }
  throw FixedPointError("fixed-point iteration did not reach tolerance in " + std::to_string(cfg.max_iter) +
                            " iterations",
                        step, estimate_contraction(iterates, step));
}

}  // namespace pnpkit
