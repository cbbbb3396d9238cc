#include "pnpkit/diagnostics.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace pnpkit {

namespace {

constexpr double kTiny = 1e-300;

Signal checked(const Denoiser& d, const Signal& x, double sigma) {
  Signal out = d(x, sigma);
  if (!out.all_finite()) throw Error("denoiser '" + d.id + "' returned non-finite values");
  return out;
}

// Largest singular value of J(D − id) at x by power iteration.
double power_residual_norm(const Denoiser& d, const Signal& x, double sigma, double h, Rng& rng,
                           const LipschitzOptions& opts) {
  Signal v = x.with_values(rng.normal_vector(x.size()));
  v.values().normalize();
  double estimate = 0.0;
  for (int it = 0; it < opts.power_iterations; ++it) {
    Signal jv = jacobian_vector_product(d, x, v, sigma, h);
    jv.values() -= v.values();
    double next;
    if (d.symmetric_jacobian) {
      Signal jjv = jacobian_vector_product(d, x, jv, sigma, h);
      jjv.values() -= jv.values();
      next = std::sqrt(std::abs(v.values().dot(jjv.values())));
      const double nrm = jjv.values().norm();
      if (nrm == 0.0) return 0.0;
      v.values() = jjv.values() / nrm;
    } else {
      next = jv.values().norm();
      if (next == 0.0) return 0.0;
      v.values() = jv.values() / next;
    }
    if (std::abs(next - estimate) <= opts.power_tol * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

double default_fd_step(const Signal& x) { return 1e-4 * (1.0 + x.values().lpNorm<Eigen::Infinity>()); }

Signal jacobian_vector_product(const Denoiser& d, const Signal& x, const Signal& v, double sigma, double fd_step) {
  require_same_shape(x, v, "jacobian_vector_product");
  const Signal plus = checked(d, x.with_values(x.values() + fd_step * v.values()), sigma);
  const Signal minus = checked(d, x.with_values(x.values() - fd_step * v.values()), sigma);
  return x.with_values((plus.values() - minus.values()) / (2.0 * fd_step));
}

Eigen::MatrixXd finite_difference_jacobian(const Denoiser& d, const Signal& x, double sigma, double fd_step) {
  if (!(fd_step > 0)) throw InvalidArgument("finite-difference step must be positive");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd j(n, n);
  Signal probe = x;
  for (Eigen::Index col = 0; col < n; ++col) {
    probe[col] = x[col] + fd_step;
    const Signal plus = checked(d, probe, sigma);
    probe[col] = x[col] - fd_step;
    const Signal minus = checked(d, probe, sigma);
    probe[col] = x[col];
    j.col(col) = (plus.values() - minus.values()) / (2.0 * fd_step);
  }
  return j;
}

LipschitzEstimate estimate_residual_lipschitz(const Denoiser& d, const Signal& center, double sigma, Rng& rng,
                                              const LipschitzOptions& opts) {
  if (opts.probes < 1) throw InvalidArgument("need at least one probe");
  const Eigen::Index n = center.size();
  const bool dense = n <= opts.dense_limit;
  LipschitzEstimate result;
  result.method = dense ? "dense-svd" : (d.symmetric_jacobian ? "power-symmetric" : "power-spectral-radius");
  for (int p = 0; p < opts.probes; ++p) {
    Signal x = center;
    if (p > 0) x.values() += opts.probe_spread * rng.normal_vector(n);
    const double h = opts.fd_step > 0 ? opts.fd_step : default_fd_step(x);
    result.fd_step = std::max(result.fd_step, h);
    double eps;
    if (dense) {
      Eigen::MatrixXd j = finite_difference_jacobian(d, x, sigma, h);
      j.diagonal().array() -= 1.0;
      Eigen::BDCSVD<Eigen::MatrixXd> svd(j);
      eps = svd.singularValues()[0];
    } else {
      eps = power_residual_norm(d, x, sigma, h, rng, opts);
    }
    result.epsilon = std::max(result.epsilon, eps);
  }
  return result;
}

double jacobian_asymmetry(const Denoiser& d, const Signal& x, double sigma, double fd_step) {
  if (x.size() > 4096) throw Unsupported("jacobian_asymmetry is limited to 4096 unknowns");
  const double h = fd_step > 0 ? fd_step : default_fd_step(x);
  const Eigen::MatrixXd j = finite_difference_jacobian(d, x, sigma, h);
  return (j - j.transpose()).norm() / std::max(j.norm(), kTiny);
}

double homogeneity_defect(const Denoiser& d, const Signal& x, double sigma, double delta) {
  if (delta == 0.0) return 0.0;
  const Signal dx = checked(d, x, sigma);
  const Signal dscaled = checked(d, x.with_values((1.0 + delta) * x.values()), sigma);
  const double num = (dscaled.values() - (1.0 + delta) * dx.values()).norm();
  return num / (std::abs(delta) * dx.values().norm() + kTiny);
}

double drsdiff_tau_min(double epsilon, double mu) {
  if (!(mu > 0)) throw InvalidArgument("strong convexity modulus must be positive");
  if (!(epsilon >= 0)) throw InvalidArgument("epsilon must be non-negative");
  if (epsilon >= 1.0) return std::numeric_limits<double>::quiet_NaN();
  return epsilon / ((1.0 + epsilon - 2.0 * epsilon * epsilon) * mu);
}

}  // namespace pnpkit
