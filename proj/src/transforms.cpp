#include "pnpkit/transforms.hpp"

#include <cmath>
#include <numbers>

namespace pnpkit {

namespace {

struct Layout {
  int rows = 1;
  int cols = 1;
  int channels = 1;
  bool one_d = false;
};

Layout layout_of(const Shape& shape) {
  Layout l;
  if (shape.size() == 1) {
    l.rows = shape[0];
    l.one_d = true;
  } else {
    l.rows = shape[0];
    l.cols = shape[1];
    if (shape.size() == 3) l.channels = shape[2];
  }
  return l;
}

Eigen::MatrixXd extract_plane(const Vec& v, const Layout& l, int channel) {
  Eigen::MatrixXd m(l.rows, l.cols);
  for (int r = 0; r < l.rows; ++r)
    for (int c = 0; c < l.cols; ++c)
      m(r, c) = v[(static_cast<Eigen::Index>(r) * l.cols + c) * l.channels + channel];
  return m;
}

void store_plane(Vec& v, const Layout& l, int channel, const Eigen::MatrixXd& m) {
  for (int r = 0; r < l.rows; ++r)
    for (int c = 0; c < l.cols; ++c)
      v[(static_cast<Eigen::Index>(r) * l.cols + c) * l.channels + channel] = m(r, c);
}

template <typename F>
Signal per_plane(const Signal& x, F&& fn) {
  const Layout l = layout_of(x.shape());
  Vec out(x.size());
  for (int ch = 0; ch < l.channels; ++ch) {
    Eigen::MatrixXd plane = extract_plane(x.values(), l, ch);
    fn(plane, l);
    store_plane(out, l, ch, plane);
  }
  return x.with_values(std::move(out));
}

// One Haar analysis step on the leading `len` entries of every column (axis 0)
// or row (axis 1) restricted to the leading `other` entries of the other axis.
void haar_step(Eigen::MatrixXd& m, int axis, int len, int other, bool inverse) {
  const double s = std::numbers::sqrt2 / 2.0;
  const int half = len / 2;
  Eigen::VectorXd tmp(len);
  for (int o = 0; o < other; ++o) {
    auto at = [&](int i) -> double& { return axis == 0 ? m(i, o) : m(o, i); };
    if (!inverse) {
      for (int i = 0; i < half; ++i) {
        const double a = at(2 * i);
        const double b = at(2 * i + 1);
        tmp[i] = s * (a + b);
        tmp[half + i] = s * (a - b);
      }
    } else {
      for (int i = 0; i < half; ++i) {
        const double a = at(i);
        const double d = at(half + i);
        tmp[2 * i] = s * (a + d);
        tmp[2 * i + 1] = s * (a - d);
      }
    }
    for (int i = 0; i < len; ++i) at(i) = tmp[i];
  }
}

void check_haar(const Shape& shape, int levels) {
  if (levels < 0) throw InvalidArgument("Haar level count must be non-negative");
  if (levels > max_haar_levels(shape)) {
    throw ShapeError("shape " + shape_string(shape) + " is not divisible by 2^" + std::to_string(levels));
  }
}

int max_levels_1d(int n) {
  int levels = 0;
  while (n % 2 == 0 && n > 1) {
    n /= 2;
    ++levels;
  }
  return levels;
}

// Detail level of index i in a length-n axis after `levels` steps; levels + 1
// marks the approximation band.
int haar_level(int i, int n, int levels) {
  for (int l = levels; l >= 1; --l) {
    if (i < (n >> l)) return l + 1;
  }
  return 1;
}

}  // namespace

const char* to_string(TransformKind kind) { return kind == TransformKind::Haar ? "haar" : "dct"; }

TransformKind parse_transform(const std::string& name) {
  if (name == "haar") return TransformKind::Haar;
  if (name == "dct") return TransformKind::Dct;
  throw InvalidArgument("unknown transform '" + name + "' (expected haar or dct)");
}

int max_haar_levels(const Shape& shape) {
  const Layout l = layout_of(shape);
  return l.one_d ? max_levels_1d(l.rows) : std::min(max_levels_1d(l.rows), max_levels_1d(l.cols));
}

Signal haar_forward(const Signal& x, int levels) {
  check_haar(x.shape(), levels);
  return per_plane(x, [levels](Eigen::MatrixXd& m, const Layout& l) {
    int rows = l.rows;
    int cols = l.cols;
    for (int lev = 0; lev < levels; ++lev) {
      haar_step(m, 0, rows, cols, false);
      if (!l.one_d) haar_step(m, 1, cols, rows, false);
      rows /= 2;
      if (!l.one_d) cols /= 2;
    }
  });
}

Signal haar_inverse(const Signal& coeffs, int levels) {
  check_haar(coeffs.shape(), levels);
  return per_plane(coeffs, [levels](Eigen::MatrixXd& m, const Layout& l) {
    for (int lev = levels - 1; lev >= 0; --lev) {
      const int rows = l.rows >> lev;
      const int cols = l.one_d ? 1 : (l.cols >> lev);
      if (!l.one_d) haar_step(m, 1, cols, rows, true);
      haar_step(m, 0, rows, cols, true);
    }
  });
}

Eigen::MatrixXd dct_matrix(int n) {
  if (n <= 0) throw InvalidArgument("DCT size must be positive");
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) d(k, i) = scale * std::cos(std::numbers::pi * (i + 0.5) * k / n);
  }
  return d;
}

Signal dct_forward(const Signal& x) {
  const Layout l = layout_of(x.shape());
  const Eigen::MatrixXd dr = dct_matrix(l.rows);
  const Eigen::MatrixXd dc = l.one_d ? Eigen::MatrixXd::Identity(1, 1) : dct_matrix(l.cols);
  return per_plane(x, [&](Eigen::MatrixXd& m, const Layout&) { m = dr * m * dc.transpose(); });
}

Signal dct_inverse(const Signal& coeffs) {
  const Layout l = layout_of(coeffs.shape());
  const Eigen::MatrixXd dr = dct_matrix(l.rows);
  const Eigen::MatrixXd dc = l.one_d ? Eigen::MatrixXd::Identity(1, 1) : dct_matrix(l.cols);
  return per_plane(coeffs, [&](Eigen::MatrixXd& m, const Layout&) { m = dr.transpose() * m * dc; });
}

Signal transform_forward(TransformKind kind, const Signal& x, int levels) {
  return kind == TransformKind::Haar ? haar_forward(x, levels) : dct_forward(x);
}

Signal transform_inverse(TransformKind kind, const Signal& coeffs, int levels) {
  return kind == TransformKind::Haar ? haar_inverse(coeffs, levels) : dct_inverse(coeffs);
}

Vec normalized_frequency(TransformKind kind, const Shape& shape, int levels) {
  const Layout l = layout_of(shape);
  if (kind == TransformKind::Haar) check_haar(shape, levels);
  Vec w(static_cast<Eigen::Index>(shape_size(shape)));
  for (int r = 0; r < l.rows; ++r) {
    for (int c = 0; c < l.cols; ++c) {
      double value = 0.0;
      if (kind == TransformKind::Dct) {
        const double span = (l.rows - 1) + (l.one_d ? 0 : l.cols - 1);
        value = span > 0 ? (r + c) / span : 0.0;
      } else if (levels > 0) {
        int level = haar_level(r, l.rows, levels);
        if (!l.one_d) level = std::min(level, haar_level(c, l.cols, levels));
        value = level == levels + 1 ? 0.0 : static_cast<double>(levels - level + 1) / levels;
      }
      for (int ch = 0; ch < l.channels; ++ch)
        w[(static_cast<Eigen::Index>(r) * l.cols + c) * l.channels + ch] = value;
    }
  }
  return w;
}

}  // namespace pnpkit
