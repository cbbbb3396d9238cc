#pragma once

#include <functional>
#include <string>

#include "pnpkit/core.hpp"
#include "pnpkit/operators.hpp"

namespace pnpkit {

/// prox_{λg}(v) = argmin_x g(x) + ‖x − v‖²/(2λ), with optional extras.
struct ProxMap {
  std::string id;
  std::function<Signal(const Signal& v, double lambda)> evaluate;
  /// g(x); empty when g is not evaluable.
  std::function<double(const Signal& x)> objective;
  /// Separable maps only: per-coordinate parameters λ_i.
  std::function<Signal(const Signal& v, const Vec& lambdas)> evaluate_weighted;

  Signal operator()(const Signal& v, double lambda) const { return evaluate(v, lambda); }
  bool has_objective() const { return static_cast<bool>(objective); }
  bool separable() const { return static_cast<bool>(evaluate_weighted); }
};

Signal soft_threshold(const Signal& v, double tau);
/// Componentwise shrinkage with thresholds tau_i.
Signal soft_threshold(const Signal& v, const Vec& tau);

/// W⁻¹ soft(W v, τ) with W the orthonormal Haar transform.
Signal prox_wavelet_l1(const Signal& v, double tau, int levels);

struct TvOptions {
  /// Duality-gap target; non-positive means 1e−6·n.
  double tol = -1.0;
  int max_iter = 100000;
};

struct TvResult {
  Signal x;
  /// ∇ᵀp for the final dual iterate: the projection of v onto {∇ᵀp : |p|∞ ≤ λ}.
  Signal conjugate;
  double gap = 0.0;
  int iterations = 0;
};

/// argmin_x ½‖x − v‖² + λ‖∇x‖₁ with anisotropic forward differences and
/// Neumann boundary. Rank 3 signals are treated channel by channel.
/// Throws ConvergenceError carrying the gap if max_iter is reached.
TvResult prox_tv_solve(const Signal& v, double lambda, const TvOptions& opts = {});
Signal prox_tv(const Signal& v, double lambda, const TvOptions& opts = {});

/// λ‖∇x‖₁ with the same discretization.
double tv_norm(const Signal& x);
/// Forward differences, stacked as [axis][entry]; the last difference along
/// each axis is zero.
Vec tv_gradient(const Signal& x);
/// Adjoint of tv_gradient.
Signal tv_divergence_adjoint(const Vec& p, const Shape& shape);

/// (I + λKᵀK)⁻¹(v + λKᵀy): the prox of ½‖Kx − y‖².
Signal prox_quadratic_fidelity(const Signal& v, double lambda, const LinearOp& k, const Signal& y,
                               const CgOptions& cg = {});

Signal prox_box(const Signal& v, double lo, double hi);

/// ‖prox_f(v) + prox_{f*}(v) − v‖∞ with both maps evaluated at λ = 1.
double moreau_check(const ProxMap& p, const ProxMap& p_conj, const Signal& v);

ProxMap zero_prox();
ProxMap l1_prox(double weight = 1.0);
ProxMap box_prox(double lo, double hi);
/// g(x) = (w/2)‖x‖².
ProxMap squared_norm_prox(double weight = 1.0);
ProxMap wavelet_l1_prox(int levels, double weight = 1.0);
ProxMap tv_prox(double weight = 1.0, TvOptions opts = {});
/// Conjugate of weight·TV: the projection onto {∇ᵀp : |p|∞ ≤ weight}.
ProxMap tv_conjugate_prox(double weight = 1.0, TvOptions opts = {});
ProxMap quadratic_fidelity_prox(LinearOp k, Signal y, CgOptions cg = {});

}  // namespace pnpkit
