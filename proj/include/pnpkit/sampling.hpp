#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "pnpkit/core.hpp"
#include "pnpkit/denoisers.hpp"
#include "pnpkit/operators.hpp"

namespace pnpkit {

struct UlaConfig {
  double step = 1e-3;   // δ
  double sigma = 0.5;   // denoiser level
  double sigma_w = 0.5; // likelihood noise
  /// Raw steps discarded before sampling; negative means the kept count.
  long burn_in = -1;
  long kept = 1000;
  int thinning = 1;
  std::uint64_t seed = 0;
  /// Noise variance per step is diffusion·δ. The default 2 makes the chain
  /// target the posterior; 1 gives the √δ·ϵ variant, whose stationary
  /// covariance is half the posterior covariance in the Gaussian case.
  double diffusion = 2.0;
  /// Drops the noise term (deterministic drift iteration).
  bool zero_noise = false;
  /// Coordinates whose full trace is kept for the ESS estimate.
  int ess_coordinates = 16;
  /// Keep every thinned sample in memory.
  bool keep_samples = false;

  void validate() const;
  long effective_burn_in() const { return burn_in < 0 ? kept : burn_in; }
};

struct SampleStats {
  Vec mean;
  Vec variance;
  /// Effective sample size of each tracked coordinate.
  Vec ess;
  std::vector<int> ess_coordinates;
  double min_ess = 0.0;
  long count = 0;
};

/// One-pass mean and variance plus traces of a few coordinates for ESS.
class StatsAccumulator {
 public:
  StatsAccumulator(Eigen::Index dim, int tracked_coordinates);
  void add(const Vec& sample);
  SampleStats finish() const;

 private:
  Eigen::Index dim_;
  long count_ = 0;
  Vec mean_;
  Vec m2_;
  std::vector<int> tracked_;
  std::vector<std::vector<double>> traces_;
};

/// Welford mean/variance (unbiased) and autocorrelation-based ESS of every
/// coordinate up to the first 16. Needs at least two samples.
SampleStats sample_stats(const std::vector<Vec>& samples);

/// ESS of a scalar chain using FFT autocorrelations truncated by Geyer's
/// initial monotone sequence.
double effective_sample_size(const std::vector<double>& chain);

struct UlaResult {
  SampleStats stats;
  std::vector<Vec> samples;
  /// δ·(1/σ² + ‖K‖²/σ_w²); values ≥ 2 flag a likely unstable step.
  double stability = 0.0;
  long total_steps = 0;
};

/// x ← x + δ[(D_σ(x) − x)/σ² + Kᵀ(y − Kx)/σ_w²] + √(cδ) ϵ with c the diffusion
/// factor. Streams kept samples to `stream` (raw format, shape
/// [kept, ...]) when given.
UlaResult run_pnp_ula(const LinearOp& k, const Signal& y, const Denoiser& d, const UlaConfig& cfg, const Signal& x0,
                      const std::optional<std::filesystem::path>& stream = std::nullopt);

struct GaussianPosterior {
  Vec mean;
  Eigen::MatrixXd covariance;
  double condition_number = 0.0;
};

/// Posterior under the smoothed prior N(0, (γ² + σ²)I) and Gaussian likelihood
/// with noise σ_w. Dense algebra, n ≤ 256.
GaussianPosterior gaussian_posterior_oracle(const LinearOp& k, const Signal& y, double gamma, double sigma,
                                            double sigma_w);

}  // namespace pnpkit
