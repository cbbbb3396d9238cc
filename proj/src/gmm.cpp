#include "pnpkit/gmm.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

#include "pnpkit/denoisers.hpp"
#include "pnpkit/io.hpp"

namespace pnpkit {

namespace {

// Log-domain component densities under p_σ.
Vec log_terms(const GmmPrior& prior, const Vec& x, double sigma) {
  const int n = prior.dim();
  Vec out(prior.components());
  for (int j = 0; j < prior.components(); ++j) {
    const double s = prior.variances[j] + sigma * sigma;
    out[j] = std::log(prior.weights[j]) - 0.5 * n * std::log(2.0 * std::numbers::pi * s) -
             0.5 * (x - prior.means[static_cast<std::size_t>(j)]).squaredNorm() / s;
  }
  return out;
}

double log_sum_exp(const Vec& a) {
  const double m = a.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((a.array() - m).exp().sum());
}

Vec responsibilities(const GmmPrior& prior, const Vec& x, double sigma) {
  const Vec lt = log_terms(prior, x, sigma);
  return (lt.array() - log_sum_exp(lt)).exp().matrix();
}

void check_input(const GmmPrior& prior, const Signal& x) {
  prior.validate();
  if (x.size() != prior.dim()) {
    throw ShapeError("signal has " + std::to_string(x.size()) + " entries but the prior has dimension " +
                     std::to_string(prior.dim()));
  }
}

}  // namespace

void GmmPrior::validate() const {
  const int j = components();
  if (j == 0) throw InvalidArgument("GMM prior needs at least one component");
  if (static_cast<int>(means.size()) != j || variances.size() != j) {
    throw InvalidArgument("GMM weights, means and variances must have equal length");
  }
  const int n = dim();
  if (n < 1 || n > kMaxGmmDim) throw InvalidArgument("GMM dimension must be in [1, 64]");
  for (const Vec& m : means) {
    if (m.size() != n) throw InvalidArgument("GMM means must share one dimension");
    if (!m.allFinite()) throw InvalidArgument("GMM means must be finite");
  }
  if (!((weights.array() > 0).all())) throw InvalidArgument("GMM weights must be positive");
  if (!((variances.array() > 0).all()) || !variances.allFinite()) {
    throw InvalidArgument("GMM variances must be positive and finite");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw InvalidArgument("GMM weights must sum to 1");
}

GmmPrior single_gaussian(Vec mean, double variance) {
  GmmPrior p;
  p.weights = Vec::Ones(1);
  p.means = {std::move(mean)};
  p.variances = Vec::Constant(1, variance);
  p.validate();
  return p;
}

GmmPrior parse_gmm_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid GMM JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw InvalidArgument("GMM JSON must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "weights" && key != "means" && key != "variances") {
      throw InvalidArgument("unknown GMM key '" + key + "'");
    }
  }
  GmmPrior p;
  try {
    const auto w = doc.at("weights").get<std::vector<double>>();
    const auto m = doc.at("means").get<std::vector<std::vector<double>>>();
    const auto v = doc.at("variances").get<std::vector<double>>();
    p.weights = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
    p.variances = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    for (const auto& row : m) p.means.emplace_back(Eigen::Map<const Vec>(row.data(), static_cast<Eigen::Index>(row.size())));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed GMM JSON: ") + e.what());
  }
  p.validate();
  return p;
}

GmmPrior load_gmm_json(const std::filesystem::path& path) { return parse_gmm_json(read_file(path)); }

std::string gmm_to_json(const GmmPrior& prior) {
  nlohmann::json doc;
  doc["weights"] = std::vector<double>(prior.weights.data(), prior.weights.data() + prior.weights.size());
  auto& means = doc["means"] = nlohmann::json::array();
  for (const Vec& m : prior.means) means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
  doc["variances"] = std::vector<double>(prior.variances.data(), prior.variances.data() + prior.variances.size());
  return doc.dump();
}

double smoothed_logpdf(const GmmPrior& prior, const Signal& x, double sigma) {
  if (!(sigma >= 0)) throw InvalidArgument("sigma must be non-negative");
  check_input(prior, x);
  return log_sum_exp(log_terms(prior, x.values(), sigma));
}

Signal smoothed_score(const GmmPrior& prior, const Signal& x, double sigma, bool allow_unsmoothed) {
  if (!(sigma >= 0)) throw InvalidArgument("sigma must be non-negative");
  if (sigma == 0 && !allow_unsmoothed) throw InvalidArgument("smoothed score needs sigma > 0");
  check_input(prior, x);
  const Vec r = responsibilities(prior, x.values(), sigma);
  Vec score = Vec::Zero(x.size());
  for (int j = 0; j < prior.components(); ++j) {
    const double s = prior.variances[j] + sigma * sigma;
    score.noalias() += (r[j] / s) * (prior.means[static_cast<std::size_t>(j)] - x.values());
  }
  return x.with_values(std::move(score));
}

Signal gmm_posterior_mean(const GmmPrior& prior, const Signal& x, double sigma) {
  if (!(sigma >= 0)) throw InvalidArgument("sigma must be non-negative");
  check_input(prior, x);
  if (sigma == 0) return x;
  const double s2 = sigma * sigma;
  const Vec r = responsibilities(prior, x.values(), sigma);
  Vec mean = Vec::Zero(x.size());
  for (int j = 0; j < prior.components(); ++j) {
    const double g2 = prior.variances[j];
    mean.noalias() += r[j] * ((s2 * prior.means[static_cast<std::size_t>(j)] + g2 * x.values()) / (g2 + s2));
  }
  return x.with_values(std::move(mean));
}

Signal sample_smoothed(const GmmPrior& prior, double sigma, Rng& rng) {
  prior.validate();
  const double u = rng.uniform();
  int j = 0;
  double acc = prior.weights[0];
  while (u > acc && j + 1 < prior.components()) acc += prior.weights[++j];
  const double sd = std::sqrt(prior.variances[j] + sigma * sigma);
  return Signal::vector(prior.means[static_cast<std::size_t>(j)] + sd * rng.normal_vector(prior.dim()));
}

double tweedie_check(const GmmPrior& prior, double sigma, int num_points, Rng& rng) {
  if (!(sigma > 0)) throw InvalidArgument("tweedie_check needs sigma > 0");
  double worst = 0.0;
  for (int i = 0; i < num_points; ++i) {
    const Signal x = sample_smoothed(prior, sigma, rng);
    const Vec lhs = gmm_posterior_mean(prior, x, sigma).values() - x.values();
    const Vec rhs = sigma * sigma * smoothed_score(prior, x, sigma).values();
    worst = std::max(worst, (lhs - rhs).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

Denoiser mmse_gmm_denoiser(const GmmPrior& prior) {
  prior.validate();
  Denoiser d;
  d.id = "mmse-gmm";
  d.symmetric_jacobian = true;
  d.apply = [prior](const Signal& x, double sigma) { return gmm_posterior_mean(prior, x, sigma); };
  d.potential = [prior](const Signal& x, double sigma) { return -sigma * sigma * smoothed_logpdf(prior, x, sigma); };
  d.potential_gradient = [prior](const Signal& x, double sigma) {
    if (sigma == 0) return x.with_values(Vec::Zero(x.size()));
    Signal g = smoothed_score(prior, x, sigma);
    g.values() *= -sigma * sigma;
    return g;
  };
  return d;
}

}  // namespace pnpkit
