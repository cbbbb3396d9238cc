#include "pnpkit/proximal.hpp"

#include <algorithm>
#include <cmath>

#include "pnpkit/transforms.hpp"

namespace pnpkit {

namespace {

// Grid geometry for the discrete gradient: rank 1 has one axis, rank 2 and 3
// have two (channels are independent).
struct TvGrid {
  int rows = 1;
  int cols = 1;
  int channels = 1;
  int axes = 1;
};

TvGrid tv_grid(const Shape& shape) {
  TvGrid g;
  g.rows = shape[0];
  if (shape.size() >= 2) {
    g.cols = shape[1];
    g.axes = 2;
  }
  if (shape.size() == 3) g.channels = shape[2];
  return g;
}

inline Eigen::Index flat(const TvGrid& g, int r, int c, int ch) {
  return (static_cast<Eigen::Index>(r) * g.cols + c) * g.channels + ch;
}

void gradient_into(const Vec& x, const TvGrid& g, Vec& out) {
  const Eigen::Index n = x.size();
  out.setZero(g.axes * n);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      for (int ch = 0; ch < g.channels; ++ch) {
        const Eigen::Index i = flat(g, r, c, ch);
        if (r + 1 < g.rows) out[i] = x[flat(g, r + 1, c, ch)] - x[i];
        if (g.axes == 2 && c + 1 < g.cols) out[n + i] = x[flat(g, r, c + 1, ch)] - x[i];
      }
    }
  }
}

void adjoint_into(const Vec& p, const TvGrid& g, Vec& out) {
  const Eigen::Index n = p.size() / g.axes;
  out.setZero(n);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      for (int ch = 0; ch < g.channels; ++ch) {
        const Eigen::Index i = flat(g, r, c, ch);
        double v = 0.0;
        if (r + 1 < g.rows) v -= p[i];
        if (r > 0) v += p[flat(g, r - 1, c, ch)];
        if (g.axes == 2) {
          if (c + 1 < g.cols) v -= p[n + i];
          if (c > 0) v += p[n + flat(g, r, c - 1, ch)];
        }
        out[i] = v;
      }
    }
  }
}

Signal box_weighted(const Signal& v, double lo, double hi) { return prox_box(v, lo, hi); }

}  // namespace

Signal soft_threshold(const Signal& v, double tau) {
  if (!(tau >= 0)) throw InvalidArgument("soft threshold needs tau >= 0");
  return v.with_values(v.values().unaryExpr([tau](double u) {
    const double m = std::abs(u) - tau;
    return m > 0 ? std::copysign(m, u) : 0.0;
  }));
}

Signal soft_threshold(const Signal& v, const Vec& tau) {
  if (tau.size() != v.size()) throw ShapeError("soft threshold: threshold vector size mismatch");
  if ((tau.array() < 0).any()) throw InvalidArgument("soft threshold needs tau >= 0");
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]) - tau[i];
    out[i] = m > 0 ? std::copysign(m, v[i]) : 0.0;
  }
  return v.with_values(std::move(out));
}

Signal prox_wavelet_l1(const Signal& v, double tau, int levels) {
  return haar_inverse(soft_threshold(haar_forward(v, levels), tau), levels);
}

Vec tv_gradient(const Signal& x) {
  Vec out;
  gradient_into(x.values(), tv_grid(x.shape()), out);
  return out;
}

Signal tv_divergence_adjoint(const Vec& p, const Shape& shape) {
  const TvGrid g = tv_grid(shape);
  if (static_cast<std::size_t>(p.size()) != g.axes * shape_size(shape)) {
    throw ShapeError("dual field size does not match " + shape_string(shape));
  }
  Vec out;
  adjoint_into(p, g, out);
  return Signal(shape, std::move(out));
}

double tv_norm(const Signal& x) { return tv_gradient(x).lpNorm<1>(); }

TvResult prox_tv_solve(const Signal& v, double lambda, const TvOptions& opts) {
  if (!(lambda >= 0)) throw InvalidArgument("prox_tv needs lambda >= 0");
  const Eigen::Index n = v.size();
  const TvGrid g = tv_grid(v.shape());
  if (lambda == 0.0) return TvResult{v, v.with_values(Vec::Zero(n)), 0.0, 0};

  const double gap_tol = opts.tol > 0 ? opts.tol : 1e-6 * static_cast<double>(n);
  const double step = g.axes == 2 ? 1.0 / 8.0 : 1.0 / 4.0;
  const Vec& vv = v.values();

  // Fast projected gradient on the dual with gradient-based restarts.
  Vec p = Vec::Zero(g.axes * n);
  Vec q = p;
  Vec p_prev = p;
  Vec x(n);
  Vec grad;
  Vec div;
  double t = 1.0;
  double gap = std::numeric_limits<double>::infinity();

  auto gap_at = [&](const Vec& dual) {
    adjoint_into(dual, g, div);
    Vec primal = vv - div;
    gradient_into(primal, g, grad);
    const double pobj = 0.5 * div.squaredNorm() + lambda * grad.lpNorm<1>();
    const double dobj = 0.5 * vv.squaredNorm() - 0.5 * primal.squaredNorm();
    return std::max(0.0, pobj - dobj);
  };

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (it % 5 == 0) {
      gap = gap_at(p);
      if (gap <= gap_tol) break;
    }
    adjoint_into(q, g, div);
    x = vv - div;
    gradient_into(x, g, grad);
    p_prev = p;
    p = (q + step * grad).cwiseMax(-lambda).cwiseMin(lambda);
    if ((q - p).dot(p - p_prev) > 0) {
      t = 1.0;
      q = p;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    q = p + ((t - 1.0) / t_next) * (p - p_prev);
    t = t_next;
  }
  if (it == opts.max_iter) {
    gap = gap_at(p);
    if (gap > gap_tol) throw ConvergenceError("prox_tv reached max_iter", gap);
  }
  adjoint_into(p, g, div);
  return TvResult{v.with_values(vv - div), v.with_values(div), gap, it};
}

Signal prox_tv(const Signal& v, double lambda, const TvOptions& opts) { return prox_tv_solve(v, lambda, opts).x; }

Signal prox_quadratic_fidelity(const Signal& v, double lambda, const LinearOp& k, const Signal& y,
                               const CgOptions& cg) {
  if (!(lambda > 0)) throw InvalidArgument("prox_quadratic_fidelity needs lambda > 0");
  require_same_shape(v, Signal(k.in_shape()), "prox_quadratic_fidelity");
  Signal rhs = k.adjoint(y);
  rhs.values() += v.values() / lambda;
  return solve_shifted_normal(k, 1.0 / lambda, rhs, cg);
}

Signal prox_box(const Signal& v, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("prox_box needs lo <= hi");
  return v.with_values(v.values().cwiseMax(lo).cwiseMin(hi));
}

double moreau_check(const ProxMap& p, const ProxMap& p_conj, const Signal& v) {
  const Signal a = p(v, 1.0);
  const Signal b = p_conj(v, 1.0);
  return (a.values() + b.values() - v.values()).lpNorm<Eigen::Infinity>();
}

ProxMap zero_prox() {
  ProxMap p;
  p.id = "zero";
  p.evaluate = [](const Signal& v, double) { return v; };
  p.objective = [](const Signal&) { return 0.0; };
  p.evaluate_weighted = [](const Signal& v, const Vec&) { return v; };
  return p;
}

ProxMap l1_prox(double weight) {
  if (!(weight >= 0)) throw InvalidArgument("l1 weight must be non-negative");
  ProxMap p;
  p.id = "l1";
  p.evaluate = [weight](const Signal& v, double lambda) { return soft_threshold(v, weight * lambda); };
  p.objective = [weight](const Signal& x) { return weight * x.values().lpNorm<1>(); };
  p.evaluate_weighted = [weight](const Signal& v, const Vec& lambdas) {
    return soft_threshold(v, Vec(weight * lambdas));
  };
  return p;
}

ProxMap box_prox(double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("box needs lo <= hi");
  ProxMap p;
  p.id = "box";
  p.evaluate = [lo, hi](const Signal& v, double) { return prox_box(v, lo, hi); };
  p.objective = [lo, hi](const Signal& x) {
    const bool inside = (x.values().array() >= lo).all() && (x.values().array() <= hi).all();
    return inside ? 0.0 : std::numeric_limits<double>::infinity();
  };
  p.evaluate_weighted = [lo, hi](const Signal& v, const Vec&) { return box_weighted(v, lo, hi); };
  return p;
}

ProxMap squared_norm_prox(double weight) {
  if (!(weight >= 0)) throw InvalidArgument("squared norm weight must be non-negative");
  ProxMap p;
  p.id = "sqnorm";
  p.evaluate = [weight](const Signal& v, double lambda) { return v.with_values(v.values() / (1.0 + weight * lambda)); };
  p.objective = [weight](const Signal& x) { return 0.5 * weight * x.values().squaredNorm(); };
  p.evaluate_weighted = [weight](const Signal& v, const Vec& lambdas) {
    return v.with_values(v.values().array() / (1.0 + weight * lambdas.array()));
  };
  return p;
}

ProxMap wavelet_l1_prox(int levels, double weight) {
  ProxMap p;
  p.id = "wavelet-l1";
  p.evaluate = [levels, weight](const Signal& v, double lambda) { return prox_wavelet_l1(v, weight * lambda, levels); };
  p.objective = [levels, weight](const Signal& x) {
    return weight * haar_forward(x, levels).values().lpNorm<1>();
  };
  return p;
}

ProxMap tv_prox(double weight, TvOptions opts) {
  ProxMap p;
  p.id = "tv";
  p.evaluate = [weight, opts](const Signal& v, double lambda) { return prox_tv(v, weight * lambda, opts); };
  p.objective = [weight](const Signal& x) { return weight * tv_norm(x); };
  return p;
}

ProxMap tv_conjugate_prox(double weight, TvOptions opts) {
  ProxMap p;
  p.id = "tv-conjugate";
  // The conjugate is an indicator, so its prox ignores λ.
  p.evaluate = [weight, opts](const Signal& v, double) { return prox_tv_solve(v, weight, opts).conjugate; };
  return p;
}

ProxMap quadratic_fidelity_prox(LinearOp k, Signal y, CgOptions cg) {
  ProxMap p;
  p.id = "quadratic-fidelity";
  p.evaluate = [k, y, cg](const Signal& v, double lambda) { return prox_quadratic_fidelity(v, lambda, k, y, cg); };
  p.objective = [k, y](const Signal& x) { return 0.5 * (k.apply(x).values() - y.values()).squaredNorm(); };
  return p;
}

}  // namespace pnpkit
