#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pnpkit/core.hpp"
#include "pnpkit/operators.hpp"
#include "pnpkit/proximal.hpp"
#include "pnpkit/transforms.hpp"

namespace pnpkit {

struct GmmPrior;

/// σ-parameterized denoiser x ↦ D_σ(x).
struct Denoiser {
  std::string id;
  std::function<Signal(const Signal& x, double sigma)> apply;
  bool linear = false;
  /// The Jacobian is symmetric everywhere (linear symmetric maps, gradient fields).
  bool symmetric_jacobian = false;

  /// Gradient-step denoisers: D = id − ∇g with g evaluable.
  std::function<double(const Signal& x, double sigma)> potential;
  std::function<Signal(const Signal& x, double sigma)> potential_gradient;
  /// Lipschitz constant of ∇g.
  double potential_lipschitz = std::numeric_limits<double>::quiet_NaN();

  /// φ with D = prox_φ, when D is the prox of a known function.
  std::function<double(const Signal& x, double sigma)> prox_potential;
  /// Weak-convexity constant of φ (0 when convex).
  double prox_potential_weak_convexity = 0.0;

  /// Exact Lipschitz constant of D − id when known in closed form.
  std::optional<double> residual_lipschitz;

  Signal operator()(const Signal& x, double sigma) const { return apply(x, sigma); }
};

Denoiser identity_denoiser();
/// D = s·id.
Denoiser scaling_denoiser(double s);
/// Any linear operator with equal in/out shapes used as a denoiser.
Denoiser linear_denoiser(LinearOp a, std::string id = "linear");
/// Wraps a prox: D_σ(x) = prox_{λg}(x) with fixed λ.
Denoiser prox_denoiser(ProxMap p, double lambda);

/// Periodic convolution with a normalized Gaussian truncated at radius ⌈3σ_k⌉.
Denoiser gaussian_filter_denoiser(double kernel_sigma);
Signal gaussian_filter(const Signal& x, double kernel_sigma);

/// Non-local means with periodic indexing and unnormalized patch SSD:
/// w_ij ∝ exp(−‖P_i − P_j‖²/h²) over the (2·window_radius+1)^d search window.
Denoiser nlm_denoiser(int patch_radius, int window_radius, double h);
Signal nlm_filter(const Signal& x, int patch_radius, int window_radius, double h);

/// prox_tv with λ = c·σ².
Denoiser tv_denoiser(double c = 1.0, TvOptions opts = {});

/// Haar soft thresholding at τ = σ√(2 log n).
Denoiser wavelet_denoiser(int levels);

enum class ShrinkRule {
  /// φ = 1/(1+λ) on every coefficient.
  Uniform,
  /// φ_i = 1/(1+λ(1+w_i)) with w_i the normalized frequency.
  Frequency,
};

struct SpectralDenoiserFamily {
  TransformKind transform = TransformKind::Dct;
  ShrinkRule rule = ShrinkRule::Uniform;
  int levels = 1;  // Haar only
  double lambda_max = 1e6;

  /// Shrinkage factors for the given coefficient layout.
  Vec factors(const Shape& shape, double lambda) const;
  /// max(1 − φ_λ) over all coefficients.
  double residual_norm(double lambda) const;
};

ShrinkRule parse_shrink_rule(const std::string& name);

/// x ↦ Wᵀ diag(φ_λ) W x.
Denoiser linear_spectral_denoiser(const SpectralDenoiserFamily& family, double lambda);

/// D = id − ∇g with g(x) = (w/2)‖(I − A)x‖² for a symmetric smoother A.
Denoiser gs_denoiser(const LinearOp& smoother, double lambda_weight = 1.0);

/// Exact posterior mean E[x | x_σ] under a Gaussian-mixture prior.
Denoiser mmse_gmm_denoiser(const GmmPrior& prior);

}  // namespace pnpkit
