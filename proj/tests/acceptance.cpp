// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "oracles.hpp"
#include "pnpkit/denoisers.hpp"
#include "pnpkit/diagnostics.hpp"
#include "pnpkit/gmm.hpp"
#include "pnpkit/images.hpp"
#include "pnpkit/operators.hpp"
#include "pnpkit/proximal.hpp"
#include "pnpkit/sampling.hpp"
#include "pnpkit/solvers.hpp"

using namespace pnpkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void run(int id, const char* name, double limit_seconds, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d %s: %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              secs, limit_seconds, in_time ? "" : ", over time");
  std::fflush(stdout);
}

Vec random_vec(Rng& rng, Eigen::Index n, double scale) { return scale * rng.normal_vector(n); }

// 64×64 deblurring instance shared by the GS-PnP and αPGD checks.
struct DeblurInstance {
  Signal x;
  LinearOp k;
  Signal y;
  Denoiser gs;
};

DeblurInstance deblur_instance() {
  DeblurInstance d;
  d.x = builtin_image("shapes", 64);
  d.k = make_blur(uniform_kernel(9), d.x.shape());
  Rng rng(7);
  d.y = add_gaussian_noise(d.k.apply(d.x), 0.03, rng);
  d.gs = gs_denoiser(make_blur(gaussian_kernel(1.0), d.x.shape()), 1.0);
  return d;
}

Outcome tweedie() {
  Rng rng(2024);
  double worst = 0.0;
  for (int p = 0; p < 5; ++p) {
    const int n = 1 + static_cast<int>(rng.uniform() * 8);
    const int j = 1 + static_cast<int>(rng.uniform() * 5);
    GmmPrior prior;
    prior.weights = Vec(j);
    prior.variances = Vec(j);
    for (int c = 0; c < j; ++c) {
      prior.weights[c] = 0.2 + rng.uniform();
      prior.variances[c] = 0.05 + 2.0 * rng.uniform();
      prior.means.push_back(random_vec(rng, n, 2.0));
    }
    prior.weights /= prior.weights.sum();
    for (double sigma : {0.1, 1.0, 10.0}) worst = std::max(worst, tweedie_check(prior, sigma, 100, rng));
  }
  return {worst <= 1e-8, "max defect " + sci(worst) + " (tol 1e-8)"};
}

Outcome moreau() {
  Rng rng(11);
  double l1_box = 0.0, quad = 0.0;
  const ProxMap l1 = l1_prox(1.0), box = box_prox(-1.0, 1.0);
  const ProxMap sq = squared_norm_prox(2.0), sq_conj = squared_norm_prox(0.5);
  for (int i = 0; i < 1000; ++i) {
    const Signal v = Signal::vector(random_vec(rng, 16, 3.0));
    l1_box = std::max(l1_box, moreau_check(l1, box, v));
    quad = std::max(quad, moreau_check(sq, sq_conj, v));
  }
  // TV: prox_f from an independent ADMM solver, prox_{f*} from the library.
  const double weight = 0.1;
  const int rows = 16, cols = 16;
  double tv = 0.0;
  for (int t = 0; t < 3; ++t) {
    Signal v({rows, cols});
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform() + 0.2 * rng.normal();
    const Vec p = oracle::tv_prox_admm(v.values(), rows, cols, weight, 3000);
    TvOptions opts;
    opts.tol = 1e-14;
    opts.max_iter = 2000000;
    const Signal q = tv_conjugate_prox(weight, opts)(v, 1.0);
    tv = std::max(tv, (p + q.values() - v.values()).cwiseAbs().maxCoeff());
  }
  const bool pass = l1_box <= 1e-10 && quad <= 1e-10 && tv <= 1e-5;
  return {pass, "l1/box " + sci(l1_box) + ", quadratic " + sci(quad) + " (tol 1e-10); TV " + sci(tv) + " (tol 1e-5)"};
}

double worst_pgd_ratio(const Vec& h, const Vec& c) {
  const SmoothTerm f = diagonal_quadratic(h, c);
  const RegSlot reg = RegSlot::prox(l1_prox(1.0));
  const Vec xstar = oracle::separable_l1_minimizer(h, c);
  const Signal x0 = Signal::vector((Vec(2) << 5.0, -3.0).finished());
  SolverConfig cfg;
  cfg.step = 0.1;
  cfg.tol = 0.0;
  std::vector<double> dist{(x0.values() - xstar).norm()};
  for (int k = 1; k <= 80; ++k) {
    cfg.max_iter = k;
    dist.push_back((run_pgd(f, reg, cfg, x0).x.values() - xstar).norm());
  }
  double worst = 0.0;
  for (std::size_t k = 5; k + 1 < dist.size(); ++k)
    if (dist[k] > 0) worst = std::max(worst, dist[k + 1] / dist[k]);
  return worst;
}

Outcome pgd_rate() {
  const Vec h = (Vec(2) << 1.0, 10.0).finished();
  const double plain = worst_pgd_ratio(h, Vec::Zero(2));
  const double shifted = worst_pgd_ratio(h, (Vec(2) << 3.0, -2.0).finished());
  return {std::max(plain, shifted) <= 0.91,
          "worst ratio " + sci(plain) + " (minimizer 0), " + sci(shifted) + " (shifted) (tol 0.91)"};
}

Outcome drsdiff() {
  const Shape shape{8, 8};
  Rng rng(5);
  Vec kd(64);
  for (Eigen::Index i = 0; i < 64; ++i) kd[i] = 1.0 + 0.5 * rng.uniform();
  const LinearOp k = make_diagonal(kd, shape);
  const Signal y(shape, random_vec(rng, 64, 1.0));
  std::string detail;
  bool pass = true;
  for (double eps : {0.05, 0.1, 0.2}) {
    SpectralDenoiserFamily fam;
    const Denoiser d = linear_spectral_denoiser(fam, eps / (1.0 - eps));
    const double tau = 2.0 * eps / ((1.0 + eps - 2.0 * eps * eps) * 1.0);
    const FixedPointProblem t = pnp_drsdiff_operator(k, y, d, 0.1, tau);
    SolverConfig cfg;
    cfg.tol = 1e-13;
    cfg.max_iter = 20000;
    const FixedPointResult a = run_fixed_point(t, cfg, Signal(shape));
    const FixedPointResult b = run_fixed_point(t, cfg, Signal(shape, random_vec(rng, 64, 5.0)));
    const double gap = (a.x.values() - b.x.values()).norm();
    const double factor = std::max(a.contraction, b.contraction);
    pass = pass && factor < 1.0 && gap <= 1e-8;
    detail += "eps " + sci(eps) + ": factor " + sci(factor) + ", init gap " + sci(gap) + "; ";
  }
  return {pass, detail + "(factor < 1, gap <= 1e-8)"};
}

Outcome gs_pnp_objective() {
  const DeblurInstance d = deblur_instance();
  SolverConfig cfg;
  cfg.step = 0.9;
  cfg.max_iter = 500;
  cfg.tol = 0.0;
  const SolverResult res = run_gs_pnp(d.k, d.y, d.gs, 0.03, 1.0, cfg, d.k.adjoint(d.y));
  const auto& rows = res.trace.rows;
  double worst_rise = -INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) worst_rise = std::max(worst_rise, rows[i].objective - rows[i - 1].objective);
  double running_min = INFINITY, at25 = NAN, worst_ratio = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    running_min = std::min(running_min, rows[i].step_residual);
    const int k = rows[i].iter;
    if (k == 25) at25 = running_min * std::sqrt(25.0);
    if (k >= 25) worst_ratio = std::max(worst_ratio, running_min * std::sqrt(static_cast<double>(k)) / at25);
  }
  const bool pass = rows.size() == 501 && worst_rise <= 1e-12 && worst_ratio <= 1.2;
  return {pass, "max objective rise " + sci(worst_rise) + " (slack 1e-12), worst min-residual*sqrt(k) ratio " +
                    sci(worst_ratio) + " (tol 1.2), iterations " + std::to_string(res.iterations)};
}

Outcome apgd_lyapunov() {
  const DeblurInstance d = deblur_instance();
  const SmoothTerm f = quadratic_fidelity(d.k, d.y);
  SolverConfig cfg;
  cfg.alpha = 0.5;
  // λ < min(1/(αL_f), α/M) with L_f = ‖K‖² and M = 0 for the convex potential.
  cfg.step = 0.9 / (cfg.alpha * f.lipschitz);
  cfg.max_iter = 500;
  cfg.tol = 0.0;
  const Signal x0 = d.k.adjoint(d.y);
  const SolverResult res = run_apgd(f, RegSlot::denoiser(d.gs, 0.03), cfg, x0, x0);
  double worst_rise = -INFINITY;
  for (std::size_t i = 1; i < res.extra.size(); ++i) worst_rise = std::max(worst_rise, res.extra[i] - res.extra[i - 1]);
  const bool pass = res.extra.size() == 501 && worst_rise <= 1e-10;
  return {pass, "max Lyapunov rise " + sci(worst_rise) + " (slack 1e-10), lambda " + sci(cfg.step) +
                    ", final value " + sci(res.extra.back())};
}

Outcome drs_rate() {
  Rng rng(3);
  const int m = 30, n = 60;
  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal() / std::sqrt(static_cast<double>(m));
  const Vec b = random_vec(rng, m, 1.0);
  const double mu = 0.1;
  const LinearOp k = make_dense(a);
  CgOptions cg;
  cg.rel_tol = 1e-14;
  SolverConfig cfg;
  cfg.step = 1.0;
  cfg.max_iter = 1000;
  cfg.tol = 0.0;
  const SolverResult res = run_drs(RegSlot::prox(quadratic_fidelity_prox(k, Signal::vector(b), cg)),
                                   RegSlot::prox(l1_prox(mu)), cfg, Signal::vector(Vec::Zero(n)));
  const auto& rows = res.trace.rows;
  const double at10 = 10.0 * rows[10].fp_residual * rows[10].fp_residual;
  double worst = 0.0;
  for (std::size_t i = 10; i < rows.size(); ++i) {
    const double k_e2 = rows[i].iter * rows[i].fp_residual * rows[i].fp_residual;
    worst = std::max(worst, k_e2 / at10);
  }
  const Vec lasso = oracle::lasso_coordinate_descent(a, b, mu, 20000);
  const double err = (res.x.values() - lasso).norm();
  return {worst <= 1.5, "worst k|e_k|^2 relative to k=10: " + sci(worst) + " (tol 1.5); distance to lasso oracle " +
                            sci(err)};
}

Outcome red_fixed_point() {
  const Shape shape{8, 8};
  Signal kernel({3, 3});
  const double w1[3] = {0.25, 0.5, 0.25};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) kernel[i * 3 + j] = w1[i] * w1[j];
  const LinearOp k = make_blur(kernel, shape);
  Rng rng(8);
  const Signal y(shape, random_vec(rng, 64, 1.0));
  SpectralDenoiserFamily fam;
  fam.rule = ShrinkRule::Frequency;
  const Denoiser d = linear_spectral_denoiser(fam, 1.0);
  const double lambda = 0.5, sigma = 1.0;

  const Eigen::MatrixXd km = oracle::matrix_of([&](const Signal& e) { return k.apply(e); }, shape, 64);
  const Eigen::MatrixXd dm = oracle::matrix_of([&](const Signal& e) { return d(e, sigma); }, shape, 64);
  const Vec closed = oracle::red_closed_form(km, dm, y.values(), lambda);
  auto fc = [&](const Signal& x) {
    return (km.transpose() * (km * x.values() - y.values()) + lambda * (x.values() - dm * x.values())).norm();
  };

  SolverConfig cfg;
  cfg.tol = 1e-14;
  cfg.max_iter = 200000;
  cfg.track_objective = false;
  const Signal x0 = k.adjoint(y);
  const double eta = 1.0 / (1.0 + lambda);
  const SolverResult gd = run_red_gd(k, y, d, lambda, sigma, eta, cfg, x0);
  const SolverResult pg = run_red_pg(k, y, d, sigma, lambda, 2.0, cfg, x0);
  const double fc_gd = fc(gd.x), fc_pg = fc(pg.x);
  const double err_gd = (gd.x.values() - closed).norm(), err_pg = (pg.x.values() - closed).norm();
  const bool pass = fc_gd <= 1e-8 && fc_pg <= 1e-8 && err_gd <= 1e-7 && err_pg <= 1e-7;
  return {pass, "RED-GD fc " + sci(fc_gd) + ", closed-form gap " + sci(err_gd) + "; RED-PG fc " + sci(fc_pg) +
                    ", closed-form gap " + sci(err_pg) + " (tol 1e-8 / 1e-7)"};
}

Outcome ula() {
  const int n = 16;
  Signal kernel({3});
  kernel[0] = 0.25;
  kernel[1] = 0.5;
  kernel[2] = 0.25;
  const LinearOp k = make_blur(kernel, {n});
  const double gamma = 0.5;
  UlaConfig cfg;
  cfg.step = 1e-3;
  cfg.sigma = 0.5;
  cfg.sigma_w = 0.5;
  cfg.kept = 100000;
  cfg.thinning = 20;
  cfg.burn_in = 20000;
  cfg.seed = 0;
  Rng rng(1);
  const Signal xtrue({n}, random_vec(rng, n, gamma));
  const Signal y = add_gaussian_noise(k.apply(xtrue), cfg.sigma_w, rng);
  const UlaResult res =
      run_pnp_ula(k, y, mmse_gmm_denoiser(single_gaussian(Vec::Zero(n), gamma * gamma)), cfg, k.adjoint(y));

  const Eigen::MatrixXd km = oracle::matrix_of([&](const Signal& e) { return k.apply(e); }, {n}, n);
  Eigen::MatrixXd precision = km.transpose() * km / (cfg.sigma_w * cfg.sigma_w);
  precision.diagonal().array() += 1.0 / (gamma * gamma + cfg.sigma * cfg.sigma);
  const Eigen::MatrixXd cov = precision.fullPivLu().inverse();
  const Vec mean = cov * km.transpose() * y.values() / (cfg.sigma_w * cfg.sigma_w);

  double worst_mean = 0.0, worst_var = 0.0;
  bool mean_ok = true;
  for (int i = 0; i < n; ++i) {
    const double se = std::sqrt(res.stats.variance[i] / res.stats.ess[i]);
    const double gap = std::abs(res.stats.mean[i] - mean[i]);
    mean_ok = mean_ok && gap <= std::max(3.0 * se, 2.0 * cfg.step);
    worst_mean = std::max(worst_mean, gap / std::max(3.0 * se, 2.0 * cfg.step));
    worst_var = std::max(worst_var, std::abs(res.stats.variance[i] / cov(i, i) - 1.0));
  }
  return {mean_ok && worst_var <= 0.1, "worst mean gap / allowance " + sci(worst_mean) + " (tol 1), worst variance error " +
                                           sci(worst_var) + " (tol 0.1), min ESS " + sci(res.stats.min_ess)};
}

Outcome sweep() {
  const auto rows = cli::run_sweep(cli::Json{{"task", "sweep"}}, cli::Context{});
  const bool decreasing = cli::sweep_strictly_decreasing(rows);
  const double ratio = rows.back().error / rows.front().error;
  std::string errors;
  for (const auto& r : rows) errors += sci(r.error) + " ";
  return {decreasing && ratio <= 0.05, std::string("strictly decreasing: ") + (decreasing ? "yes" : "no") +
                                           ", final/initial " + sci(ratio) + " (tol 0.05); errors " + errors};
}

Outcome deblur_compare() {
  const cli::Json config = {
      {"images", {"shapes"}},
      {"operator", {{"type", "blur"}, {"kernel", "uniform"}, {"size", 9}}},
      {"noise", {{"percent", 3}}},
      {"denoiser", {{"type", "tv"}, {"c", 20}}},
      {"solvers",
       {{{"algo", "pnp-pgd"}, {"name", "pnp-pgd-tv"}, {"max_iter", 200}},
        {{"algo", "pnp-pgd"}, {"name", "pnp-pgd-gs"}, {"max_iter", 200}, {"denoiser", {{"type", "gs"}}}},
        {{"algo", "gs-pnp"}, {"name", "gs-pnp"}, {"max_iter", 200}, {"denoiser", {{"type", "gs"}}}},
        {{"algo", "hqs"},
         {"name", "hqs-decreasing"},
         {"max_iter", 200},
         {"hqs", {{"sigma_start", 0.2}, {"iterations", 8}}}}}}};
  const cli::Context ctx{};
  const auto rows = cli::run_compare(config, ctx);
  const Signal x = builtin_image("shapes", 64);
  const LinearOp k = make_blur(uniform_kernel(9), x.shape());
  Rng rng(ctx.seed);
  const double input = psnr(add_gaussian_noise(k.apply(x), 0.03, rng), x);
  const double gain = rows[0].final_psnr - input;
  bool provable = true;
  std::string detail = "input " + sci(input) + " dB, PnP-PGD/TV gain " + sci(gain) + " dB (tol 2); ";
  for (const auto& r : rows) {
    if (r.solver != "hqs-decreasing") provable = provable && r.converged;
    detail += r.solver + " psnr " + sci(r.final_psnr) + " slope " + sci(r.residual_slope) +
              (r.converged ? " converged" : " not converged") + "; ";
  }
  return {gain >= 2.0 && provable, detail};
}

double relative_adjoint_gap(const LinearOp& op, Rng& rng) {
  const Signal x(op.in_shape(), rng.normal_vector(static_cast<Eigen::Index>(shape_size(op.in_shape()))));
  const Signal y(op.out_shape(), rng.normal_vector(static_cast<Eigen::Index>(shape_size(op.out_shape()))));
  const double lhs = op.apply(x).values().dot(y.values());
  const double rhs = x.values().dot(op.adjoint(y).values());
  return std::abs(lhs - rhs) / std::max(1e-300, op.apply(x).values().norm() * y.values().norm());
}

// Reference loops written out with the same arithmetic as the library drivers.
Signal ista_reference(const LinearOp& k, const Signal& y, const ProxMap& p, double lambda, int iters, Signal x) {
  for (int i = 0; i < iters; ++i) {
    Signal r = k.apply(x);
    r.values() -= y.values();
    const Signal g = k.adjoint(r);
    x = p(x.with_values(x.values() - lambda * g.values()), lambda);
  }
  return x;
}

Signal drs_reference(const ProxMap& a, const ProxMap& b, double lambda, int iters, Signal x) {
  Signal y = a(x, lambda);
  for (int i = 0; i < iters; ++i) {
    const Signal z = b(y.with_values(2.0 * y.values() - x.values()), lambda);
    x = x.with_values(x.values() + z.values() - y.values());
    y = a(x, lambda);
  }
  return y;
}

Signal admm_reference(const LinearOp& k, const Signal& y, const ProxMap& p, double rho, int iters, Signal x) {
  const Signal kty = k.adjoint(y);
  Signal z = x, u = x.with_values(Vec::Zero(x.size()));
  for (int i = 0; i < iters; ++i) {
    x = solve_shifted_normal(k, rho, kty.with_values(kty.values() + rho * (z.values() - u.values())));
    z = p(x.with_values(x.values() + u.values()), 1.0 / rho);
    u.values() += x.values() - z.values();
  }
  return x;
}

Signal hqs_reference(const LinearOp& k, const Signal& y, const ProxMap& p, double rho, int iters, Signal z) {
  for (int i = 0; i < iters; ++i) z = p(prox_quadratic_fidelity(z, 1.0 / rho, k, y), 1.0 / rho);
  return z;
}

bool identical(const Signal& a, const Signal& b) {
  return a.shape() == b.shape() && std::memcmp(a.values().data(), b.values().data(), sizeof(double) * a.size()) == 0;
}

Outcome consistency() {
  Rng rng(12);
  std::vector<LinearOp> ops;
  Eigen::MatrixXd dense(7, 5);
  for (Eigen::Index i = 0; i < dense.size(); ++i) dense.data()[i] = rng.normal();
  ops.push_back(make_dense(dense));
  ops.push_back(make_diagonal(rng.normal_vector(24), {4, 6}));
  Signal mask({16, 16});
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  ops.push_back(make_mask(mask));
  ops.push_back(make_blur(uniform_kernel(9), {64, 64}));
  ops.push_back(make_blur(gaussian_kernel(1.5), {32, 24}));
  ops.push_back(make_blur(gaussian_kernel(1.0), {16, 16, 3}));
  Signal k1({5});
  for (Eigen::Index i = 0; i < 5; ++i) k1[i] = rng.uniform();
  ops.push_back(make_blur(k1, {31}));
  ops.push_back(compose(make_mask(mask), make_blur(gaussian_kernel(1.0), {16, 16})));
  ops.push_back(make_identity({3, 3}));
  double worst_adjoint = 0.0;
  for (const LinearOp& op : ops) worst_adjoint = std::max(worst_adjoint, relative_adjoint_gap(op, rng));

  // Exact-prox solvers against their classical loops, slot and adapter forms.
  Eigen::MatrixXd a(12, 10);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal() / 3.0;
  const LinearOp k = make_dense(a);
  const Signal y = Signal::vector(rng.normal_vector(12));
  const Signal x0 = Signal::vector(Vec::Zero(10));
  const ProxMap l1 = l1_prox(0.05);
  const int iters = 50;
  SolverConfig cfg;
  cfg.step = 0.5;
  cfg.max_iter = iters;
  cfg.tol = 0.0;
  const RegSlot as_prox = RegSlot::prox(l1);
  const RegSlot as_denoiser = RegSlot::denoiser(prox_denoiser(l1, cfg.step), 0.0);
  bool bitwise = true;
  std::string mismatched;
  auto expect = [&](const char* name, bool ok) {
    if (!ok) mismatched += std::string(" ") + name;
    bitwise = bitwise && ok;
  };

  const SmoothTerm f = quadratic_fidelity(k, y);
  const Signal ista = ista_reference(k, y, l1, cfg.step, iters, x0);
  expect("pgd", identical(run_pgd(f, as_prox, cfg, x0).x, ista));
  expect("pgd-adapter", identical(run_pgd(f, as_denoiser, cfg, x0).x, ista));

  const ProxMap fid = quadratic_fidelity_prox(k, y);
  const Signal drs = drs_reference(fid, l1, cfg.step, iters, x0);
  expect("drs", identical(run_drs(RegSlot::prox(fid), as_prox, cfg, x0).x, drs));
  expect("drs-adapter", identical(run_drs(RegSlot::prox(fid), as_denoiser, cfg, x0).x, drs));

  SolverConfig admm_cfg = cfg;
  admm_cfg.rho = 2.0;
  const RegSlot admm_adapter = RegSlot::denoiser(prox_denoiser(l1, 1.0 / admm_cfg.rho), 0.0);
  const Signal admm = admm_reference(k, y, l1, admm_cfg.rho, iters, x0);
  const Signal zero = x0.with_values(Vec::Zero(10));
  expect("admm", identical(run_admm(k, y, as_prox, admm_cfg, x0, x0, zero).x, admm));
  expect("admm-adapter", identical(run_admm(k, y, admm_adapter, admm_cfg, x0, x0, zero).x, admm));

  const Signal hqs = hqs_reference(k, y, l1, admm_cfg.rho, iters, x0);
  expect("hqs", identical(run_hqs(k, y, as_prox, HqsSchedule::constant(admm_cfg.rho, 0.0, 1), admm_cfg, x0).x, hqs));

  // Residual Lipschitz estimates against the SVD of the dense residual map.
  double worst_lip = 0.0;
  struct Case {
    Denoiser d;
    Shape shape;
  };
  std::vector<Case> cases;
  SpectralDenoiserFamily dct_uniform;
  SpectralDenoiserFamily dct_freq;
  dct_freq.rule = ShrinkRule::Frequency;
  SpectralDenoiserFamily haar_freq;
  haar_freq.transform = TransformKind::Haar;
  haar_freq.rule = ShrinkRule::Frequency;
  haar_freq.levels = 2;
  cases.push_back({linear_spectral_denoiser(dct_uniform, 0.3), {16, 16}});
  cases.push_back({linear_spectral_denoiser(dct_freq, 0.5), {16, 16}});
  cases.push_back({linear_spectral_denoiser(haar_freq, 1.0), {16, 16}});
  cases.push_back({linear_denoiser(make_blur(gaussian_kernel(1.0), {16, 16}), "gaussian"), {16, 16}});
  cases.push_back({linear_spectral_denoiser(dct_freq, 0.5), {32, 32}});
  cases.push_back({linear_denoiser(make_blur(gaussian_kernel(1.0), {32, 32}), "gaussian"), {32, 32}});
  for (const Case& c : cases) {
    const auto n = static_cast<Eigen::Index>(shape_size(c.shape));
    Eigen::MatrixXd r = oracle::matrix_of([&](const Signal& e) { return c.d(e, 0.1); }, c.shape, n);
    r -= Eigen::MatrixXd::Identity(n, n);
    const double exact = Eigen::BDCSVD<Eigen::MatrixXd>(r).singularValues()[0];
    Signal center(c.shape);
    for (Eigen::Index i = 0; i < n; ++i) center[i] = rng.uniform();
    const LipschitzEstimate est = estimate_residual_lipschitz(c.d, center, 0.1, rng);
    worst_lip = std::max(worst_lip, std::abs(est.epsilon - exact) / exact);
  }
  const bool pass = worst_adjoint <= 1e-10 && bitwise && worst_lip <= 1e-3;
  return {pass, "worst adjoint gap " + sci(worst_adjoint) + " (tol 1e-10); bit-for-bit " +
                    (bitwise ? std::string("all match") : "mismatch:" + mismatched) +
                    "; worst Lipschitz relative error " + sci(worst_lip) + " (tol 1e-3)"};
}

}  // namespace

int main() {
  run(1, "tweedie-identity", 5, tweedie);
  run(2, "moreau-identity", 10, moreau);
  run(3, "pgd-linear-rate", 1, pgd_rate);
  run(4, "drsdiff-contraction", 2, drsdiff);
  run(5, "gs-pnp-objective", 30, gs_pnp_objective);
  run(6, "apgd-lyapunov", 30, apgd_lyapunov);
  run(7, "drs-residual-rate", 5, drs_rate);
  run(8, "red-fixed-point", 2, red_fixed_point);
  run(9, "ula-gaussian-oracle", 60, ula);
  run(10, "regularization-sweep", 5, sweep);
  run(11, "deblur-desk-scale", 120, deblur_compare);
  run(12, "adjoint-and-consistency", 30, consistency);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
