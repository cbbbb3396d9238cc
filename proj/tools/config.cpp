#include "config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>

#include "pnpkit/gmm.hpp"
#include "pnpkit/images.hpp"
#include "pnpkit/io.hpp"

namespace pnpkit::cli {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

Signal kernel_from_spec(const Json& spec, int rank, const std::string& where) {
  const Json* k = find(spec, "kernel");
  if (!k || k->is_string()) {
    const std::string kind = k ? k->get<std::string>() : "uniform";
    if (kind == "uniform") return uniform_kernel(get_int(spec, "size", 9, where), rank);
    if (kind == "gaussian") {
      const double sigma = get_number(spec, "sigma", 1.0, where);
      return gaussian_kernel(sigma, rank, get_int(spec, "radius", -1, where));
    }
    throw ConfigError(where + ": unknown kernel '" + kind + "' (expected uniform, gaussian or an array)");
  }
  if (!k->is_array() || k->empty()) throw ConfigError(where + ": kernel must be a name or a non-empty array");
  if ((*k)[0].is_array()) {
    const auto rows = k->get<std::vector<std::vector<double>>>();
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows[0].size());
    Vec v(static_cast<Eigen::Index>(h) * w);
    for (int r = 0; r < h; ++r) {
      if (static_cast<int>(rows[r].size()) != w) throw ConfigError(where + ": ragged kernel rows");
      for (int c = 0; c < w; ++c) v[static_cast<Eigen::Index>(r) * w + c] = rows[r][c];
    }
    return Signal({h, w}, v);
  }
  const auto taps = k->get<std::vector<double>>();
  return Signal::vector(Eigen::Map<const Vec>(taps.data(), static_cast<Eigen::Index>(taps.size())));
}

}  // namespace

Json load_config(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError("config " + path.string() + " is not valid JSON: " + e.what(), e.byte);
  }
  require_object(doc, "config");
  return doc;
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(obj, where);
  for (const auto& item : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
    if (!ok) {
      std::vector<std::string> names(allowed.begin(), allowed.end());
      throw ConfigError(where + ": unknown key '" + item.key() + "' (allowed: " + join(names) + ")");
    }
  }
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v->get<double>();
}

int get_int(const Json& obj, const char* key, int fallback, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v->get<int>();
}

bool get_bool(const Json& obj, const char* key, bool fallback, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return v->get<bool>();
}

std::string get_string(const Json& obj, const char* key, const std::string& fallback, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v->get<std::string>();
}

std::vector<double> get_numbers(const Json& obj, const char* key, const std::string& where) {
  const Json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_array()) throw ConfigError(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const Json& e : *v) {
    if (!e.is_number()) throw ConfigError(where + "." + key + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string config_hash(const Json& config, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL;
  const std::string text = config.dump() + "#" + std::to_string(seed);
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::filesystem::path resolve(const Context& ctx, const std::string& path) {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : ctx.base_dir / p;
}

Signal load_image_spec(const Json& spec, const Context& ctx) {
  if (spec.is_string()) {
    const std::string name = spec.get<std::string>();
    if (is_builtin_image(name)) return builtin_image(name);
    return load_signal(resolve(ctx, name));
  }
  check_keys(spec, {"builtin", "size", "path", "values"}, "image");
  if (const Json* b = find(spec, "builtin")) {
    const std::string name = b->get<std::string>();
    if (!is_builtin_image(name)) {
      throw ConfigError("unknown builtin image '" + name + "' (available: " + join(builtin_image_names()) + ")");
    }
    return builtin_image(name, get_int(spec, "size", 64, "image"));
  }
  if (const Json* p = find(spec, "path")) return load_signal(resolve(ctx, p->get<std::string>()));
  const auto values = get_numbers(spec, "values", "image");
  if (values.empty()) throw ConfigError("image needs one of builtin, path or values");
  return Signal::vector(Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size())));
}

std::string image_label(const Json& spec) {
  if (spec.is_string()) return std::filesystem::path(spec.get<std::string>()).stem().string();
  if (const Json* b = find(spec, "builtin")) return b->get<std::string>();
  if (const Json* p = find(spec, "path")) return std::filesystem::path(p->get<std::string>()).stem().string();
  return "vector";
}

LinearOp build_operator(const Json& spec, const Shape& image_shape, const Context& ctx) {
  const std::string where = "operator";
  require_object(spec, where);
  const std::string type = get_string(spec, "type", "", where);
  if (type == "identity") {
    check_keys(spec, {"type"}, where);
    return make_identity(image_shape);
  }
  if (type == "blur") {
    check_keys(spec, {"type", "kernel", "size", "sigma", "radius"}, where);
    const int rank = image_shape.size() == 1 ? 1 : 2;
    return make_blur(normalize_kernel(kernel_from_spec(spec, rank, where)), image_shape);
  }
  if (type == "mask") {
    check_keys(spec, {"type", "keep", "path", "seed"}, where);
    if (const Json* p = find(spec, "path")) return make_mask(load_signal(resolve(ctx, p->get<std::string>())));
    const double keep = get_number(spec, "keep", 0.5, where);
    if (!(keep >= 0 && keep <= 1)) throw ConfigError("operator.keep must lie in [0, 1]");
    Rng rng(static_cast<std::uint64_t>(get_int(spec, "seed", 0, where)) ^ (ctx.seed * 0x9E3779B97F4A7C15ULL));
    Signal mask(image_shape);
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < keep ? 1.0 : 0.0;
    return make_mask(mask);
  }
  if (type == "diagonal") {
    check_keys(spec, {"type", "values"}, where);
    const auto values = get_numbers(spec, "values", where);
    if (values.size() != shape_size(image_shape)) throw ConfigError("operator.values must have one entry per unknown");
    return make_diagonal(Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size())), image_shape);
  }
  if (type == "dense") {
    check_keys(spec, {"type", "path"}, where);
    return load_dense_operator(resolve(ctx, get_string(spec, "path", "", where)));
  }
  throw ConfigError("unknown operator type '" + type + "' (expected identity, blur, mask, diagonal or dense)");
}

double noise_sigma(const Json& spec) {
  check_keys(spec, {"sigma", "percent"}, "noise");
  const bool has_sigma = spec.contains("sigma");
  const bool has_percent = spec.contains("percent");
  if (has_sigma && has_percent) throw ConfigError("noise takes sigma or percent, not both");
  const double s = has_percent ? get_number(spec, "percent", 0.0, "noise") / 100.0 : get_number(spec, "sigma", 0.0, "noise");
  if (!(s >= 0)) throw ConfigError("noise level must be non-negative");
  return s;
}

DenoiserSpec build_denoiser(const Json& spec, const Shape& image_shape, const Context& ctx) {
  const std::string where = "denoiser";
  require_object(spec, where);
  const std::string type = get_string(spec, "type", "", where);
  DenoiserSpec out;
  out.sigma = get_number(spec, "sigma", std::numeric_limits<double>::quiet_NaN(), where);
  if (type == "identity") {
    check_keys(spec, {"type", "sigma"}, where);
    out.denoiser = identity_denoiser();
  } else if (type == "tv") {
    check_keys(spec, {"type", "sigma", "c", "tol", "max_iter"}, where);
    TvOptions opts;
    opts.tol = get_number(spec, "tol", -1.0, where);
    opts.max_iter = get_int(spec, "max_iter", opts.max_iter, where);
    out.denoiser = tv_denoiser(get_number(spec, "c", 1.0, where), opts);
  } else if (type == "wavelet") {
    check_keys(spec, {"type", "sigma", "levels"}, where);
    out.denoiser = wavelet_denoiser(get_int(spec, "levels", 3, where));
  } else if (type == "nlm") {
    check_keys(spec, {"type", "sigma", "patch_radius", "window_radius", "h"}, where);
    out.denoiser = nlm_denoiser(get_int(spec, "patch_radius", 1, where), get_int(spec, "window_radius", 5, where),
                                get_number(spec, "h", 0.1, where));
  } else if (type == "gaussian") {
    check_keys(spec, {"type", "sigma", "kernel_sigma"}, where);
    out.denoiser = gaussian_filter_denoiser(get_number(spec, "kernel_sigma", 1.0, where));
  } else if (type == "spectral") {
    check_keys(spec, {"type", "sigma", "transform", "rule", "lambda", "levels"}, where);
    SpectralDenoiserFamily fam;
    fam.transform = parse_transform(get_string(spec, "transform", "dct", where));
    fam.rule = parse_shrink_rule(get_string(spec, "rule", "uniform", where));
    fam.levels = get_int(spec, "levels", 1, where);
    out.denoiser = linear_spectral_denoiser(fam, get_number(spec, "lambda", 0.1, where));
  } else if (type == "gs") {
    check_keys(spec, {"type", "sigma", "smoother_sigma", "weight"}, where);
    const int rank = image_shape.size() == 1 ? 1 : 2;
    const LinearOp smoother =
        make_blur(gaussian_kernel(get_number(spec, "smoother_sigma", 1.0, where), rank), image_shape);
    out.denoiser = gs_denoiser(smoother, get_number(spec, "weight", 1.0, where));
  } else if (type == "mmse-gmm") {
    check_keys(spec, {"type", "sigma", "prior", "gamma"}, where);
    if (const Json* p = find(spec, "prior")) {
      out.denoiser = mmse_gmm_denoiser(load_gmm_json(resolve(ctx, p->get<std::string>())));
    } else {
      const double gamma = get_number(spec, "gamma", 1.0, where);
      out.denoiser = mmse_gmm_denoiser(
          single_gaussian(Vec::Zero(static_cast<Eigen::Index>(shape_size(image_shape))), gamma * gamma));
    }
  } else {
    throw ConfigError("unknown denoiser type '" + type +
                      "' (expected identity, tv, wavelet, nlm, gaussian, spectral, gs or mmse-gmm)");
  }
  return out;
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"pnp-pgd", "pnp-apgd", "pnp-drs", "pnp-drsdiff", "pnp-admm",
                                              "hqs",     "red-gd",   "red-pg",  "red-apg",     "gs-pnp"};
  return names;
}

SolverSpec parse_solver(const Json& spec) {
  const std::string where = "solver";
  check_keys(spec,
             {"algo", "name", "step", "alpha", "rho", "max_iter", "tol", "lambda", "eta", "L", "backtracking",
              "gamma", "hqs", "denoiser", "timing"},
             where);
  SolverSpec s;
  s.algo = get_string(spec, "algo", "", where);
  if (s.algo == "apgd") s.algo = "pnp-apgd";
  const auto& names = algorithm_names();
  if (std::find(names.begin(), names.end(), s.algo) == names.end()) {
    throw ConfigError("unknown algo '" + s.algo + "' (valid: " + join(names) + ")");
  }
  s.label = get_string(spec, "name", s.algo, where);
  s.cfg.step = get_number(spec, "step", 1.0, where);
  s.cfg.alpha = get_number(spec, "alpha", 0.5, where);
  s.cfg.rho = get_number(spec, "rho", 1.0, where);
  s.cfg.max_iter = get_int(spec, "max_iter", 200, where);
  s.cfg.tol = get_number(spec, "tol", 1e-9, where);
  s.cfg.record_time = get_bool(spec, "timing", false, where);
  s.lambda = get_number(spec, "lambda", 1.0, where);
  s.eta = get_number(spec, "eta", std::numeric_limits<double>::quiet_NaN(), where);
  s.l = get_number(spec, "L", 2.0, where);
  s.backtracking.enabled = get_bool(spec, "backtracking", false, where);
  s.backtracking.gamma = get_number(spec, "gamma", s.backtracking.gamma, where);
  if (spec.contains("hqs")) {
    s.hqs = spec.at("hqs");
    check_keys(s.hqs, {"sigma_start", "sigma_end", "iterations", "weight"}, "solver.hqs");
  }
  if (spec.contains("denoiser")) s.denoiser = spec.at("denoiser");
  try {
    s.cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  return s;
}

SolverResult run_algorithm(const SolverSpec& spec, const LinearOp& k, const Signal& y, const DenoiserSpec& den,
                           double noise) {
  const double sigma = std::isnan(den.sigma) ? noise : den.sigma;
  const Denoiser& d = den.denoiser;
  const Signal x0 = k.adjoint(y);
  const RegSlot slot = RegSlot::denoiser(d, sigma);
  const std::string& a = spec.algo;
  if (a == "pnp-pgd") return run_pgd(quadratic_fidelity(k, y), slot, spec.cfg, x0);
  if (a == "pnp-apgd") return run_apgd(quadratic_fidelity(k, y), slot, spec.cfg, x0, x0);
  if (a == "pnp-drs") return run_pnp_drs(k, y, slot, spec.cfg, x0);
  if (a == "pnp-drsdiff") return run_pnp_drsdiff(k, y, slot, spec.cfg, x0);
  if (a == "pnp-admm") return run_admm(k, y, slot, spec.cfg, x0, x0, x0.with_values(Vec::Zero(x0.size())));
  if (a == "hqs") {
    HqsSchedule schedule;
    if (spec.hqs.is_object()) {
      const double noise_level = noise > 0 ? noise : 0.01;
      schedule = HqsSchedule::decreasing(noise_level, get_number(spec.hqs, "sigma_start", 0.2, "solver.hqs"),
                                         get_number(spec.hqs, "sigma_end", noise_level, "solver.hqs"),
                                         get_int(spec.hqs, "iterations", 8, "solver.hqs"),
                                         get_number(spec.hqs, "weight", 0.23, "solver.hqs"));
    } else {
      schedule = HqsSchedule::constant(spec.cfg.rho, sigma, 1);
    }
    return run_hqs(k, y, slot, schedule, spec.cfg, x0);
  }
  if (a == "red-gd") {
    const double knorm = operator_norm(k);
    const double eta = std::isnan(spec.eta) ? 1.0 / (knorm * knorm + 2.0 * spec.lambda / (sigma * sigma)) : spec.eta;
    return run_red_gd(k, y, d, spec.lambda, sigma, eta, spec.cfg, x0);
  }
  if (a == "red-pg") return run_red_pg(k, y, d, sigma, spec.lambda, spec.l, spec.cfg, x0);
  if (a == "red-apg") return run_red_apg(k, y, d, sigma, spec.lambda, spec.l, spec.cfg, x0);
  if (a == "gs-pnp") return run_gs_pnp(k, y, d, sigma, spec.lambda, spec.cfg, x0, spec.backtracking);
  throw ConfigError("unknown algo '" + a + "'");
}

}  // namespace pnpkit::cli
