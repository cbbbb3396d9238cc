#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pnpkit/core.hpp"

namespace pnpkit {

/// Mixture of isotropic Gaussians N(μ_j, γ_j² I).
struct GmmPrior {
  Vec weights;
  std::vector<Vec> means;
  Vec variances;

  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  int components() const { return static_cast<int>(weights.size()); }
  /// Throws InvalidArgument unless weights are positive and sum to 1 within
  /// 1e−12, variances are positive and all means share a dimension ≤ 64.
  void validate() const;
};

inline constexpr int kMaxGmmDim = 64;

GmmPrior single_gaussian(Vec mean, double variance);

/// {"weights":[...],"means":[[...]],"variances":[...]}
GmmPrior parse_gmm_json(const std::string& text);
GmmPrior load_gmm_json(const std::filesystem::path& path);
std::string gmm_to_json(const GmmPrior& prior);

/// log p_σ(x) with component variances γ_j² + σ².
double smoothed_logpdf(const GmmPrior& prior, const Signal& x, double sigma);

/// ∇ log p_σ(x). σ = 0 is rejected unless `allow_unsmoothed` is set, in which
/// case the score of the prior itself is returned.
Signal smoothed_score(const GmmPrior& prior, const Signal& x, double sigma, bool allow_unsmoothed = false);

/// E[x | x_σ] = Σ_j r_j(x_σ) m_j(x_σ); identity at σ = 0.
Signal gmm_posterior_mean(const GmmPrior& prior, const Signal& x, double sigma);

/// Draws x ~ p_σ.
Signal sample_smoothed(const GmmPrior& prior, double sigma, Rng& rng);

/// max over `num_points` draws from p_σ of
/// ‖(E[x|x_σ] − x_σ) − σ²∇log p_σ(x_σ)‖∞.
double tweedie_check(const GmmPrior& prior, double sigma, int num_points, Rng& rng);

}  // namespace pnpkit
