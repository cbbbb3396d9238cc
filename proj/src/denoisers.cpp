#include "pnpkit/denoisers.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace pnpkit {

namespace {

struct Grid {
  int rows = 1;
  int cols = 1;
  int channels = 1;
  int dims = 1;
};

Grid grid_of(const Shape& shape) {
  Grid g;
  g.rows = shape[0];
  if (shape.size() >= 2) {
    g.cols = shape[1];
    g.dims = 2;
  }
  if (shape.size() == 3) g.channels = shape[2];
  return g;
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

inline Eigen::Index at(const Grid& g, int r, int c, int ch) {
  return (static_cast<Eigen::Index>(r) * g.cols + c) * g.channels + ch;
}

Vec convolve_axis(const Vec& x, const Grid& g, int axis, const Vec& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  Vec out = Vec::Zero(x.size());
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      for (int ch = 0; ch < g.channels; ++ch) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int rr = axis == 0 ? wrap(r + t, g.rows) : r;
          const int cc = axis == 1 ? wrap(c + t, g.cols) : c;
          acc += taps[t + radius] * x[at(g, rr, cc, ch)];
        }
        out[at(g, r, c, ch)] = acc;
      }
    }
  }
  return out;
}

bool probe_symmetric(const LinearOp& a, double rel_tol) {
  Rng rng(0x51a7);
  for (int probe = 0; probe < 3; ++probe) {
    Signal x(a.in_shape(), rng.normal_vector(static_cast<Eigen::Index>(shape_size(a.in_shape()))));
    const Vec ax = a.apply(x).values();
    const Vec atx = a.adjoint(x).values();
    if ((ax - atx).norm() > rel_tol * std::max(ax.norm(), 1e-300)) return false;
  }
  return true;
}

double quadratic_form(const LinearOp& m, const Signal& x) { return 0.5 * x.values().dot(m.apply(x).values()); }

}  // namespace

Denoiser identity_denoiser() {
  Denoiser d;
  d.id = "identity";
  d.apply = [](const Signal& x, double) { return x; };
  d.linear = true;
  d.symmetric_jacobian = true;
  d.potential = [](const Signal&, double) { return 0.0; };
  d.potential_gradient = [](const Signal& x, double) { return x.with_values(Vec::Zero(x.size())); };
  d.potential_lipschitz = 0.0;
  d.prox_potential = [](const Signal&, double) { return 0.0; };
  d.residual_lipschitz = 0.0;
  return d;
}

Denoiser scaling_denoiser(double s) {
  if (!std::isfinite(s)) throw InvalidArgument("scaling denoiser needs a finite factor");
  Denoiser d;
  d.id = "scale";
  d.apply = [s](const Signal& x, double) { return x.with_values(s * x.values()); };
  d.linear = true;
  d.symmetric_jacobian = true;
  d.residual_lipschitz = std::abs(s - 1.0);
  if (s > 0 && s <= 1) {
    d.prox_potential = [s](const Signal& x, double) { return 0.5 * (1.0 / s - 1.0) * x.values().squaredNorm(); };
  }
  return d;
}

Denoiser linear_denoiser(LinearOp a, std::string id) {
  if (a.in_shape() != a.out_shape()) throw ShapeError("a linear denoiser must map a shape to itself");
  Denoiser d;
  d.id = std::move(id);
  d.linear = true;
  d.symmetric_jacobian = probe_symmetric(a, 1e-10);
  d.apply = [a](const Signal& x, double) { return a.apply(x); };
  return d;
}

Denoiser prox_denoiser(ProxMap p, double lambda) {
  if (!(lambda > 0)) throw InvalidArgument("prox denoiser needs lambda > 0");
  Denoiser d;
  d.id = "prox-" + p.id;
  d.apply = [p, lambda](const Signal& x, double) { return p(x, lambda); };
  d.symmetric_jacobian = true;
  if (p.has_objective()) {
    d.prox_potential = [p, lambda](const Signal& x, double) { return lambda * p.objective(x); };
  }
  return d;
}

Signal gaussian_filter(const Signal& x, double kernel_sigma) {
  const Vec taps = gaussian_kernel(kernel_sigma, 1).values();
  const Grid g = grid_of(x.shape());
  Vec out = convolve_axis(x.values(), g, 0, taps);
  if (g.dims == 2) out = convolve_axis(out, g, 1, taps);
  return x.with_values(std::move(out));
}

Denoiser gaussian_filter_denoiser(double kernel_sigma) {
  if (!(kernel_sigma > 0)) throw InvalidArgument("gaussian filter needs kernel_sigma > 0");
  Denoiser d;
  d.id = "gaussian";
  d.apply = [kernel_sigma](const Signal& x, double) { return gaussian_filter(x, kernel_sigma); };
  d.linear = true;
  d.symmetric_jacobian = true;
  return d;
}

Signal nlm_filter(const Signal& x, int patch_radius, int window_radius, double h) {
  if (!(h > 0)) throw InvalidArgument("NLM needs h > 0");
  if (patch_radius < 0 || window_radius < 0) throw InvalidArgument("NLM radii must be non-negative");
  const Grid g = grid_of(x.shape());
  const Vec& v = x.values();
  const int pixels = g.rows * g.cols;
  const int wr_cols = g.dims == 2 ? window_radius : 0;
  const int pr_cols = g.dims == 2 ? patch_radius : 0;
  const double inv_h2 = 1.0 / (h * h);

  Vec weight_sum = Vec::Zero(pixels);
  Vec acc = Vec::Zero(v.size());
  Vec diff(pixels);
  for (int dr = -window_radius; dr <= window_radius; ++dr) {
    for (int dc = -wr_cols; dc <= wr_cols; ++dc) {
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
          double s = 0.0;
          const int r2 = wrap(r + dr, g.rows);
          const int c2 = wrap(c + dc, g.cols);
          for (int ch = 0; ch < g.channels; ++ch) {
            const double e = v[at(g, r, c, ch)] - v[at(g, r2, c2, ch)];
            s += e * e;
          }
          diff[r * g.cols + c] = s;
        }
      }
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
          double ssd = 0.0;
          for (int pr = -patch_radius; pr <= patch_radius; ++pr)
            for (int pc = -pr_cols; pc <= pr_cols; ++pc)
              ssd += diff[wrap(r + pr, g.rows) * g.cols + wrap(c + pc, g.cols)];
          const double w = std::exp(-ssd * inv_h2);
          weight_sum[r * g.cols + c] += w;
          const int r2 = wrap(r + dr, g.rows);
          const int c2 = wrap(c + dc, g.cols);
          for (int ch = 0; ch < g.channels; ++ch) acc[at(g, r, c, ch)] += w * v[at(g, r2, c2, ch)];
        }
      }
    }
  }
  for (int p = 0; p < pixels; ++p)
    for (int ch = 0; ch < g.channels; ++ch) acc[static_cast<Eigen::Index>(p) * g.channels + ch] /= weight_sum[p];
  return x.with_values(std::move(acc));
}

Denoiser nlm_denoiser(int patch_radius, int window_radius, double h) {
  if (!(h > 0)) throw InvalidArgument("NLM needs h > 0");
  Denoiser d;
  d.id = "nlm";
  d.apply = [=](const Signal& x, double) { return nlm_filter(x, patch_radius, window_radius, h); };
  return d;
}

Denoiser tv_denoiser(double c, TvOptions opts) {
  if (!(c > 0)) throw InvalidArgument("TV denoiser needs c > 0");
  Denoiser d;
  d.id = "tv";
  d.apply = [c, opts](const Signal& x, double sigma) {
    if (!(sigma >= 0)) throw InvalidArgument("denoiser sigma must be non-negative");
    return prox_tv(x, c * sigma * sigma, opts);
  };
  d.symmetric_jacobian = true;
  d.prox_potential = [c](const Signal& x, double sigma) { return c * sigma * sigma * tv_norm(x); };
  return d;
}

Denoiser wavelet_denoiser(int levels) {
  Denoiser d;
  d.id = "wavelet";
  auto threshold = [](const Signal& x, double sigma) {
    if (!(sigma >= 0)) throw InvalidArgument("denoiser sigma must be non-negative");
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(x.size())));
  };
  d.apply = [levels, threshold](const Signal& x, double sigma) {
    return prox_wavelet_l1(x, threshold(x, sigma), levels);
  };
  d.symmetric_jacobian = true;
  d.prox_potential = [levels, threshold](const Signal& x, double sigma) {
    return threshold(x, sigma) * haar_forward(x, levels).values().lpNorm<1>();
  };
  return d;
}

ShrinkRule parse_shrink_rule(const std::string& name) {
  if (name == "uniform") return ShrinkRule::Uniform;
  if (name == "frequency") return ShrinkRule::Frequency;
  throw InvalidArgument("unknown shrink rule '" + name + "' (expected uniform or frequency)");
}

Vec SpectralDenoiserFamily::factors(const Shape& shape, double lambda) const {
  const auto n = static_cast<Eigen::Index>(shape_size(shape));
  if (rule == ShrinkRule::Uniform) return Vec::Constant(n, 1.0 / (1.0 + lambda));
  const Vec w = normalized_frequency(transform, shape, levels);
  return (1.0 + lambda * (1.0 + w.array())).inverse().matrix();
}

double SpectralDenoiserFamily::residual_norm(double lambda) const {
  const double scale = rule == ShrinkRule::Uniform ? 1.0 : 2.0;
  return scale * lambda / (1.0 + scale * lambda);
}

Denoiser linear_spectral_denoiser(const SpectralDenoiserFamily& family, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0 || lambda > family.lambda_max) {
    throw InvalidArgument("spectral denoiser lambda " + std::to_string(lambda) + " outside [0, " +
                          std::to_string(family.lambda_max) + "]");
  }
  if (family.transform == TransformKind::Haar && family.levels < 1) {
    throw InvalidArgument("Haar spectral family needs at least one level");
  }
  Denoiser d;
  d.id = std::string("spectral-") + to_string(family.transform);
  d.linear = true;
  d.symmetric_jacobian = true;
  d.residual_lipschitz = family.residual_norm(lambda);
  d.apply = [family, lambda](const Signal& x, double) {
    Signal c = transform_forward(family.transform, x, family.levels);
    c.values().array() *= family.factors(x.shape(), lambda).array();
    return transform_inverse(family.transform, c, family.levels);
  };
  d.prox_potential = [family, lambda](const Signal& x, double) {
    const Signal c = transform_forward(family.transform, x, family.levels);
    const Vec phi = family.factors(x.shape(), lambda);
    return 0.5 * (c.values().array().square() * (phi.array().inverse() - 1.0)).sum();
  };
  return d;
}

Denoiser gs_denoiser(const LinearOp& smoother, double lambda_weight) {
  if (smoother.in_shape() != smoother.out_shape()) throw ShapeError("GS smoother must map a shape to itself");
  if (!(lambda_weight >= 0)) throw InvalidArgument("GS weight must be non-negative");
  if (!probe_symmetric(smoother, 1e-10)) throw InvalidArgument("GS smoother must be symmetric");
  const double w = lambda_weight;
  const LinearOp a = smoother;

  // Spectrum of A where it is cheap: gives L_g exactly and the quadratic φ
  // with D = prox_φ.
  std::optional<LinearOp> phi_op;
  double lg = std::numeric_limits<double>::quiet_NaN();
  auto build_from_eigen = [&](const Vec& eig, auto&& make_phi) {
    const Vec res = (1.0 - eig.array()).square();
    lg = w * res.maxCoeff();
    const Vec dvals = 1.0 - w * res.array();
    if (dvals.minCoeff() > 0) phi_op = make_phi(Vec(dvals.array().inverse() - 1.0));
  };
  switch (a.kind()) {
    case OpKind::Circulant: {
      const auto& resp = a.frequency_response();
      Vec eig(static_cast<Eigen::Index>(resp.size()));
      for (std::size_t i = 0; i < resp.size(); ++i) eig[static_cast<Eigen::Index>(i)] = resp[i].real();
      build_from_eigen(eig, [&](const Vec& m) {
        std::vector<std::complex<double>> r(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i) r[static_cast<std::size_t>(i)] = m[i];
        return make_circulant(std::move(r), a.in_shape());
      });
      break;
    }
    case OpKind::Diagonal:
    case OpKind::Mask:
      build_from_eigen(a.diagonal(), [&](const Vec& m) { return make_diagonal(m, a.in_shape()); });
      break;
    case OpKind::Dense: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a.matrix() + a.matrix().transpose()));
      const Eigen::MatrixXd v = eig.eigenvectors();
      build_from_eigen(eig.eigenvalues(), [&](const Vec& m) {
        return make_dense(v * m.asDiagonal() * v.transpose(), a.in_shape(), a.in_shape());
      });
      break;
    }
    case OpKind::Composite: {
      Rng rng(0x6a5);
      Signal x(a.in_shape(), rng.normal_vector(static_cast<Eigen::Index>(shape_size(a.in_shape()))));
      double est = 0.0;
      for (int it = 0; it < 500; ++it) {
        Signal r = x.with_values(x.values() - a.apply(x).values());
        r.values() -= a.apply(r).values();
        const double nr = r.values().norm();
        if (nr == 0.0) break;
        est = nr / x.values().norm();
        x.values() = r.values() / nr;
      }
      lg = w * est;
      break;
    }
  }

  auto residual = [a](const Signal& x) { return x.with_values(x.values() - a.apply(x).values()); };
  auto grad = [a, w, residual](const Signal& x) {
    Signal r = residual(x);
    r.values() -= a.apply(r).values();
    r.values() *= w;
    return r;
  };

  Denoiser d;
  d.id = "gs";
  d.linear = true;
  d.symmetric_jacobian = true;
  d.apply = [grad](const Signal& x, double) { return x.with_values(x.values() - grad(x).values()); };
  d.potential = [residual, w](const Signal& x, double) { return 0.5 * w * residual(x).values().squaredNorm(); };
  d.potential_gradient = [grad](const Signal& x, double) { return grad(x); };
  d.potential_lipschitz = lg;
  if (std::isfinite(lg)) d.residual_lipschitz = lg;
  if (phi_op) {
    const LinearOp m = *phi_op;
    d.prox_potential = [m](const Signal& x, double) { return quadratic_form(m, x); };
  }
  return d;
}

}  // namespace pnpkit
