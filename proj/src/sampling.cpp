#include "pnpkit/sampling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>

#include "fft.hpp"
#include "pnpkit/io.hpp"

namespace pnpkit {

void UlaConfig::validate() const {
  if (!(step > 0)) throw InvalidArgument("ULA step must be positive");
  if (!(sigma > 0)) throw InvalidArgument("ULA denoiser sigma must be positive");
  if (!(sigma_w > 0)) throw InvalidArgument("ULA likelihood sigma_w must be positive");
  if (kept < 1) throw InvalidArgument("ULA needs at least one kept sample");
  if (thinning < 1) throw InvalidArgument("ULA thinning must be at least 1");
  if (!(diffusion > 0)) throw InvalidArgument("ULA diffusion must be positive");
}

double effective_sample_size(const std::vector<double>& chain) {
  const std::size_t n = chain.size();
  if (n < 2) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= static_cast<double>(n);
  detail::FftPlan plan({static_cast<int>(2 * n)});
  std::vector<detail::Complex> buf(2 * n, detail::Complex(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) buf[i] = chain[i] - mean;
  plan.forward(buf);
  for (auto& c : buf) c = std::norm(c);
  plan.backward(buf);
  const double c0 = buf[0].real();
  if (!(c0 > 0)) return static_cast<double>(n);
  // Geyer: pair sums Γ_m = ρ_{2m} + ρ_{2m+1}, kept while positive and
  // forced non-increasing.
  double tau = -1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double gamma = (buf[2 * m].real() + buf[2 * m + 1].real()) / c0;
    if (!(gamma > 0)) break;
    gamma = std::min(gamma, prev);
    prev = gamma;
    tau += 2.0 * gamma;
  }
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

StatsAccumulator::StatsAccumulator(Eigen::Index dim, int tracked_coordinates)
    : dim_(dim), mean_(Vec::Zero(dim)), m2_(Vec::Zero(dim)) {
  const int tracked = static_cast<int>(std::min<Eigen::Index>(std::max(tracked_coordinates, 0), dim));
  for (int i = 0; i < tracked; ++i) {
    tracked_.push_back(static_cast<int>((static_cast<Eigen::Index>(i) * dim) / tracked));
  }
  traces_.resize(tracked_.size());
}

void StatsAccumulator::add(const Vec& sample) {
  if (sample.size() != dim_) throw ShapeError("sample dimension mismatch");
  ++count_;
  const Vec delta = sample - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_.array() += delta.array() * (sample - mean_).array();
  for (std::size_t i = 0; i < tracked_.size(); ++i) traces_[i].push_back(sample[tracked_[i]]);
}

SampleStats StatsAccumulator::finish() const {
  if (count_ < 2) throw InvalidArgument("sample statistics need at least two samples");
  SampleStats s;
  s.mean = mean_;
  s.variance = (m2_ / static_cast<double>(count_ - 1)).cwiseMax(0.0);
  s.count = count_;
  s.ess_coordinates = tracked_;
  s.ess = Vec(static_cast<Eigen::Index>(tracked_.size()));
  for (std::size_t i = 0; i < tracked_.size(); ++i) s.ess[static_cast<Eigen::Index>(i)] = effective_sample_size(traces_[i]);
  s.min_ess = s.ess.size() ? s.ess.minCoeff() : static_cast<double>(count_);
  return s;
}

SampleStats sample_stats(const std::vector<Vec>& samples) {
  if (samples.size() < 2) throw InvalidArgument("sample statistics need at least two samples");
  StatsAccumulator acc(samples.front().size(), 16);
  for (const Vec& s : samples) acc.add(s);
  return acc.finish();
}

UlaResult run_pnp_ula(const LinearOp& k, const Signal& y, const Denoiser& d, const UlaConfig& cfg, const Signal& x0,
                      const std::optional<std::filesystem::path>& stream) {
  cfg.validate();
  if (x0.shape() != k.in_shape()) throw ShapeError("ULA initial point does not match the operator input");
  if (y.shape() != k.out_shape()) throw ShapeError("ULA data does not match the operator output");
  const double delta = cfg.step;
  const double inv_s2 = 1.0 / (cfg.sigma * cfg.sigma);
  const double inv_w2 = 1.0 / (cfg.sigma_w * cfg.sigma_w);
  const double noise_scale = std::sqrt(cfg.diffusion * delta);
  const double knorm = operator_norm(k);

  UlaResult result;
  result.stability = delta * (inv_s2 + knorm * knorm * inv_w2);
  Rng rng(cfg.seed);
  StatsAccumulator acc(x0.size(), cfg.ess_coordinates);
  std::unique_ptr<RawRecordWriter> writer;
  if (stream) writer = std::make_unique<RawRecordWriter>(*stream, x0.shape(), static_cast<int>(cfg.kept));

  const long burn = cfg.effective_burn_in();
  const long total = burn + cfg.kept * cfg.thinning;
  Signal x = x0;
  for (long step = 1; step <= total; ++step) {
    const Signal dx = d(x, cfg.sigma);
    Signal r = k.apply(x);
    r.values() = y.values() - r.values();
    const Signal lik = k.adjoint(r);
    Vec next = x.values() + delta * (inv_s2 * (dx.values() - x.values()) + inv_w2 * lik.values());
    if (!cfg.zero_noise) next.noalias() += noise_scale * rng.normal_vector(next.size());
    if (!next.allFinite() || next.norm() > kDivergenceBound) {
      throw DivergenceError("PnP-ULA chain diverged", static_cast<int>(std::min<long>(step, INT32_MAX)), x, Trace{});
    }
    x.values() = std::move(next);
    if (step > burn && (step - burn) % cfg.thinning == 0) {
      acc.add(x.values());
      if (writer) writer->write(x.values());
      if (cfg.keep_samples) result.samples.push_back(x.values());
    }
  }
  result.total_steps = total;
  if (cfg.kept >= 2) result.stats = acc.finish();
  return result;
}

GaussianPosterior gaussian_posterior_oracle(const LinearOp& k, const Signal& y, double gamma, double sigma,
                                            double sigma_w) {
  if (!(gamma > 0) || !(sigma >= 0) || !(sigma_w > 0)) throw InvalidArgument("posterior oracle needs positive scales");
  const auto n = static_cast<Eigen::Index>(shape_size(k.in_shape()));
  if (n > 256) throw Unsupported("posterior oracle is limited to n <= 256");
  const Eigen::MatrixXd km = k.to_dense();
  Eigen::MatrixXd precision = km.transpose() * km / (sigma_w * sigma_w);
  precision.diagonal().array() += 1.0 / (gamma * gamma + sigma * sigma);
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  GaussianPosterior post;
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(n, n));
  post.mean = post.covariance * (km.transpose() * y.values()) / (sigma_w * sigma_w);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(precision, Eigen::EigenvaluesOnly);
  post.condition_number = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  return post;
}

}  // namespace pnpkit
