#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pnpkit/core.hpp"
#include "pnpkit/denoisers.hpp"
#include "pnpkit/operators.hpp"
#include "pnpkit/proximal.hpp"

namespace pnpkit {

/// Smooth data term f with its gradient.
struct SmoothTerm {
  std::function<Signal(const Signal& x)> gradient;
  /// f(x); empty when not evaluable.
  std::function<double(const Signal& x)> value;
  double lipschitz = std::numeric_limits<double>::quiet_NaN();
};

/// f(x) = ½‖Kx − y‖², L_f = ‖K‖².
SmoothTerm quadratic_fidelity(const LinearOp& k, const Signal& y);
/// f(x) = ½ Σ h_i (x_i − c_i)².
SmoothTerm diagonal_quadratic(Vec h, Vec c);

/// The regularization slot: an exact prox or a denoiser at level σ.
class RegSlot {
 public:
  static RegSlot prox(ProxMap p);
  static RegSlot denoiser(Denoiser d, double sigma);

  bool is_prox() const { return std::holds_alternative<ProxMap>(slot_); }
  const ProxMap& prox_map() const { return std::get<ProxMap>(slot_); }
  const Denoiser& denoiser_map() const { return std::get<Denoiser>(slot_); }
  double sigma() const { return sigma_; }
  std::string describe() const;

  /// prox_{λg}(v), or D_σ(v) with λ ignored.
  Signal apply(const Signal& v, double lambda) const;

  /// g in F = f + g when it can be evaluated: the prox objective, or φ/λ for
  /// a denoiser with D = prox_φ. Empty otherwise.
  std::function<double(const Signal&)> objective(double lambda) const;

 private:
  std::variant<ProxMap, Denoiser> slot_;
  double sigma_ = 0.0;
};

struct SolverConfig {
  /// λ or τ.
  double step = 1.0;
  /// Relaxation α ∈ (0,1) for αPGD.
  double alpha = 0.5;
  /// Penalty ρ for ADMM and HQS.
  double rho = 1.0;
  int max_iter = 100;
  /// Stop when the step residual falls to this value.
  double tol = 1e-9;
  bool track_objective = true;
  std::uint64_t seed = 0;
  /// PSNR is recorded against this signal when present.
  std::optional<Signal> reference;
  double psnr_peak = 1.0;
  /// Wall-clock seconds per row; off keeps traces byte-reproducible.
  bool record_time = false;

  void validate() const;
};

struct SolverResult {
  Signal x;
  Trace trace;
  std::string stop_reason;
  int iterations = 0;
  /// Scheme-specific auxiliary sequence per row (αPGD Lyapunov value, ...).
  std::vector<double> extra;
  /// Scheme-specific companion iterate (DRS governing sequence, ADMM z, ...).
  Signal aux;
};

/// x_{k+1} = reg(x_k − λ∇f(x_k)).
SolverResult run_pgd(const SmoothTerm& f, const RegSlot& reg, const SolverConfig& cfg, const Signal& x0);

/// x_{k+1} = prox_g^B(x_k − B⁻¹∇f(x_k)) for a fixed positive diagonal B.
/// Non-scalar B needs a separable prox.
SolverResult run_pgd_preconditioned(const SmoothTerm& f, const ProxMap& reg, const Vec& b, const SolverConfig& cfg,
                                    const Signal& x0);

/// Relaxed PGD; extra[k] is F(x_k) + (α/2)(1 − 1/α)²‖x_k − x_{k−1}‖².
SolverResult run_apgd(const SmoothTerm& f, const RegSlot& reg, const SolverConfig& cfg, const Signal& x0,
                      const Signal& y0);

/// Douglas–Rachford: y = A(x), z = B(2y − x), x ← x + z − y, with A and B each
/// a prox or denoiser slot at step λ. The result is the y-sequence limit; aux
/// holds the governing x.
SolverResult run_drs(const RegSlot& map_a, const RegSlot& map_b, const SolverConfig& cfg, const Signal& x0,
                     const std::function<double(const Signal&)>& objective = {});

/// PnP-DRS for f = ½‖Kx − y‖²: the denoiser slot first, then prox_{λf}.
SolverResult run_pnp_drs(const LinearOp& k, const Signal& y, const RegSlot& reg, const SolverConfig& cfg,
                         const Signal& x0);
/// PnP-DRSdiff: prox_{λf} first, then the denoiser slot.
SolverResult run_pnp_drsdiff(const LinearOp& k, const Signal& y, const RegSlot& reg, const SolverConfig& cfg,
                             const Signal& x0);

/// ADMM for ½‖Kx − y‖² + g; fp_residual is ‖x_k − z_k‖ and aux is z.
SolverResult run_admm(const LinearOp& k, const Signal& y, const RegSlot& reg, const SolverConfig& cfg,
                      const Signal& x0, const Signal& z0, const Signal& u0);

struct HqsSchedule {
  std::vector<double> rho;
  std::vector<double> sigma;

  /// Constant ρ and σ.
  static HqsSchedule constant(double rho, double sigma, int iterations);
  /// σ_k log-spaced from sigma_start to sigma_end over `iterations`, with
  /// ρ_k = weight·σ_noise²/σ_k².
  static HqsSchedule decreasing(double sigma_noise, double sigma_start, double sigma_end, int iterations,
                                double weight);
};

/// Half-quadratic splitting: x = prox_{f/ρ}(z), z = reg(x) at λ = 1/ρ (or the
/// denoiser at the scheduled σ). The last schedule entry repeats.
SolverResult run_hqs(const LinearOp& k, const Signal& y, const RegSlot& reg, const HqsSchedule& schedule,
                     const SolverConfig& cfg, const Signal& x0);

/// x ← x − η[Kᵀ(Kx − y) + (λ/σ²)(x − D(x))]; fp_residual is the norm of the
/// same bracket at x_k.
SolverResult run_red_gd(const LinearOp& k, const Signal& y, const Denoiser& d, double lambda, double sigma,
                        double eta, const SolverConfig& cfg, const Signal& x0);

/// RED proximal gradient: x_k = argmin f + (λL/2)‖x − v_{k−1}‖², then
/// v_k = (1/L)D(x_k) − ((1 − L)/L)x_k. fp_residual is ‖Kᵀ(Kx − y) + λ(x − D(x))‖.
SolverResult run_red_pg(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma, double lambda, double l,
                        const SolverConfig& cfg, const Signal& v0);

/// Accelerated RED-PG with Nesterov momentum; extra holds t_k.
SolverResult run_red_apg(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma, double lambda,
                         double l, const SolverConfig& cfg, const Signal& v0);

/// t_0 = 1, t_k = (1 + √(1 + 4t_{k−1}²))/2.
std::vector<double> nesterov_sequence(int count);

struct BacktrackingOptions {
  bool enabled = false;
  /// Sufficient-decrease constant γ in F(x) − F(Tx) ≥ (γ/τ)‖Tx − x‖², tested
  /// with an allowance of 16ε|F(x)| for round-off.
  double gamma = 0.25;
  int max_halvings = 60;
};

/// GS-PnP: x ← prox_{τf}(x − τλ∇g(x)), F = f + λg with f = ½‖Kx − y‖².
/// With backtracking, τ is halved until the descent test holds and the reduced
/// value is kept for later iterations.
SolverResult run_gs_pnp(const LinearOp& k, const Signal& y, const Denoiser& gs, double sigma, double lambda,
                        const SolverConfig& cfg, const Signal& x0, const BacktrackingOptions& bt = {});

class BacktrackingError : public Error {
 public:
  BacktrackingError(const std::string& what, std::vector<double> objectives)
      : Error(what), objectives_(std::move(objectives)) {}
  const std::vector<double>& objectives() const noexcept { return objectives_; }

 private:
  std::vector<double> objectives_;
};

struct FixedPointProblem {
  std::function<Signal(const Signal&)> apply;
};

/// T = ½id + ½(2D − id)(2prox_{τf} − id) for f = ½‖Kx − y‖².
FixedPointProblem pnp_drsdiff_operator(const LinearOp& k, const Signal& y, const Denoiser& d, double sigma,
                                       double tau);
/// Same operator for a general prox of f.
FixedPointProblem pnp_drsdiff_operator(const ProxMap& f, const Denoiser& d, double sigma, double tau);

struct FixedPointResult {
  Signal x;
  Trace trace;
  std::string stop_reason;
  int iterations = 0;
  /// sup_k ‖x_{k+1} − x*‖/‖x_k − x*‖ with x* the final iterate.
  double contraction = std::numeric_limits<double>::quiet_NaN();
};

/// Iterates are excluded from the contraction estimate in the last
/// kContractionTail steps and wherever ‖x_k − x*‖ is within 1e3 times the
/// final step residual.
inline constexpr int kContractionTail = 5;

class FixedPointError : public ConvergenceError {
 public:
  FixedPointError(const std::string& what, double residual, double contraction)
      : ConvergenceError(what + ", contraction estimate " + std::to_string(contraction), residual),
        contraction_(contraction) {}
  double contraction() const noexcept { return contraction_; }

 private:
  double contraction_;
};

/// x_{k+1} = T(x_k). Throws FixedPointError if tol is not reached.
FixedPointResult run_fixed_point(const FixedPointProblem& t, const SolverConfig& cfg, const Signal& x0);

/// Contraction estimate from a stored iterate sequence.
double estimate_contraction(const std::vector<Signal>& iterates, double final_step);

}  // namespace pnpkit
