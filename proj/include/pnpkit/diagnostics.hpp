#pragma once

#include <string>

#include "pnpkit/denoisers.hpp"

namespace pnpkit {

/// 1e−4·(1 + ‖x‖∞).
double default_fd_step(const Signal& x);

/// Dense Jacobian of D_σ at x by central differences, one column per unit
/// vector. Throws Error if the denoiser returns non-finite values.
Eigen::MatrixXd finite_difference_jacobian(const Denoiser& d, const Signal& x, double sigma, double fd_step);

/// J(x)·v by central differences.
Signal jacobian_vector_product(const Denoiser& d, const Signal& x, const Signal& v, double sigma, double fd_step);

struct LipschitzEstimate {
  double epsilon = 0.0;
  double fd_step = 0.0;
  /// "dense-svd", "power-symmetric" or "power-spectral-radius".
  std::string method;
};

struct LipschitzOptions {
  int probes = 4;
  /// Non-positive means default_fd_step at each probe point.
  double fd_step = -1.0;
  /// Dense Jacobian plus SVD up to this many unknowns; power iteration above.
  Eigen::Index dense_limit = 256;
  int power_iterations = 200;
  double power_tol = 1e-9;
  /// Spread of the random probe points around the centre.
  double probe_spread = 0.1;
};

/// max over probe points of ‖J(D − id)(x)‖₂. The first probe is `center`; the
/// rest are centre + spread·N(0, I).
LipschitzEstimate estimate_residual_lipschitz(const Denoiser& d, const Signal& center, double sigma, Rng& rng,
                                              const LipschitzOptions& opts = {});

/// ‖J − Jᵀ‖_F / max(‖J‖_F, tiny) with J the dense finite-difference Jacobian.
/// Limited to n ≤ 4096.
double jacobian_asymmetry(const Denoiser& d, const Signal& x, double sigma, double fd_step = -1.0);

/// ‖D((1+δ)x) − (1+δ)D(x)‖ / (δ‖D(x)‖ + tiny); 0 when δ = 0.
double homogeneity_defect(const Denoiser& d, const Signal& x, double sigma, double delta = 1e-3);

/// ε/((1 + ε − 2ε²)μ): the smallest step for which the PnP-DRSdiff operator
/// is a contraction. Returns NaN when ε ≥ 1.
double drsdiff_tau_min(double epsilon, double mu);

}  // namespace pnpkit
