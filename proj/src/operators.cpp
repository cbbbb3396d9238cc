#include "pnpkit/operators.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <sstream>

#include "fft.hpp"
#include "pnpkit/io.hpp"

namespace pnpkit {

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Dense: return "dense";
    case OpKind::Circulant: return "circulant-conv";
    case OpKind::Diagonal: return "diagonal";
    case OpKind::Mask: return "mask";
    case OpKind::Composite: return "composite";
  }
  return "unknown";
}

struct LinearOp::Impl {
  Shape in_shape;
  Shape out_shape;

  Impl(Shape in, Shape out) : in_shape(std::move(in)), out_shape(std::move(out)) {}
  virtual ~Impl() = default;
  virtual OpKind kind() const = 0;
  virtual Vec apply(const Vec& x) const = 0;
  virtual Vec adjoint(const Vec& y) const = 0;
  virtual std::string describe() const = 0;
};

namespace {

using detail::Complex;

struct DenseImpl final : LinearOp::Impl {
  Eigen::MatrixXd m;
  DenseImpl(Eigen::MatrixXd matrix, Shape in, Shape out)
      : Impl(std::move(in), std::move(out)), m(std::move(matrix)) {}
  OpKind kind() const override { return OpKind::Dense; }
  Vec apply(const Vec& x) const override { return m * x; }
  Vec adjoint(const Vec& y) const override { return m.transpose() * y; }
  std::string describe() const override {
    return "dense " + std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  }
};

struct DiagonalImpl final : LinearOp::Impl {
  Vec d;
  bool is_mask;
  DiagonalImpl(Vec diag, Shape shape, bool mask) : Impl(shape, shape), d(std::move(diag)), is_mask(mask) {}
  OpKind kind() const override { return is_mask ? OpKind::Mask : OpKind::Diagonal; }
  Vec apply(const Vec& x) const override { return d.cwiseProduct(x); }
  Vec adjoint(const Vec& y) const override { return d.cwiseProduct(y); }
  std::string describe() const override {
    return std::string(is_mask ? "mask " : "diagonal ") + shape_string(in_shape);
  }
};

struct CirculantImpl final : LinearOp::Impl {
  std::vector<Complex> response;
  std::shared_ptr<detail::FftPlan> plan;
  int channels = 1;

  CirculantImpl(std::vector<Complex> resp, const Shape& image_shape)
      : Impl(image_shape, image_shape), response(std::move(resp)) {
    Shape grid = image_shape;
    if (grid.size() == 3) {
      channels = grid[2];
      grid.pop_back();
    }
    plan = std::make_shared<detail::FftPlan>(grid);
    if (response.size() != plan->size()) throw ShapeError("frequency response size mismatch");
  }

  OpKind kind() const override { return OpKind::Circulant; }

  Vec filter(const Vec& x, bool conjugate) const {
    const std::size_t n = plan->size();
    const double scale = 1.0 / static_cast<double>(n);
    Vec out(x.size());
    std::vector<Complex> buf(n);
    for (int c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = Complex(x[static_cast<Eigen::Index>(i * channels + c)], 0.0);
      plan->forward(buf);
      for (std::size_t i = 0; i < n; ++i) buf[i] *= conjugate ? std::conj(response[i]) : response[i];
      plan->backward(buf);
      for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i * channels + c)] = buf[i].real() * scale;
    }
    return out;
  }

  Vec apply(const Vec& x) const override { return filter(x, false); }
  Vec adjoint(const Vec& y) const override { return filter(y, true); }
  std::string describe() const override { return "circulant " + shape_string(in_shape); }
};

struct CompositeImpl final : LinearOp::Impl {
  LinearOp outer;
  LinearOp inner;
  CompositeImpl(LinearOp o, LinearOp i)
      : Impl(i.in_shape(), o.out_shape()), outer(std::move(o)), inner(std::move(i)) {}
  OpKind kind() const override { return OpKind::Composite; }
  Vec apply(const Vec& x) const override {
    return outer.apply(inner.apply(Signal(inner.in_shape(), x))).values();
  }
  Vec adjoint(const Vec& y) const override {
    return inner.adjoint(outer.adjoint(Signal(outer.out_shape(), y))).values();
  }
  std::string describe() const override { return "(" + outer.describe() + ") o (" + inner.describe() + ")"; }
};

// Grid part of an image shape: drops a trailing channel axis for rank 3.
Shape grid_of(const Shape& image_shape) {
  Shape grid = image_shape;
  if (grid.size() == 3) grid.pop_back();
  return grid;
}

Vec conjugate_gradient(const std::function<Vec(const Vec&)>& apply_a, const Vec& b, const CgOptions& opts) {
  const Eigen::Index n = b.size();
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n);
  const double bnorm = b.norm();
  Vec x = Vec::Zero(n);
  if (bnorm == 0.0) return x;
  Vec r = b;
  Vec p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= opts.rel_tol * bnorm) return x;
    const Vec ap = apply_a(p);
    const double pap = p.dot(ap);
    if (!(pap > 0)) break;
    const double step = rr / pap;
    x.noalias() += step * p;
    r.noalias() -= step * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  // Recompute the true residual before giving up; the recursive one drifts.
  const double true_res = (b - apply_a(x)).norm() / bnorm;
  if (true_res <= opts.rel_tol) return x;
  throw ConvergenceError("conjugate gradient did not reach tolerance", true_res);
}

}  // namespace

LinearOp::LinearOp(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Signal LinearOp::apply(const Signal& x) const {
  if (x.shape() != impl_->in_shape) {
    throw ShapeError("operator input shape " + shape_string(impl_->in_shape) + " vs signal " +
                     shape_string(x.shape()));
  }
  return Signal(impl_->out_shape, impl_->apply(x.values()));
}

Signal LinearOp::adjoint(const Signal& y) const {
  if (y.shape() != impl_->out_shape) {
    throw ShapeError("operator output shape " + shape_string(impl_->out_shape) + " vs signal " +
                     shape_string(y.shape()));
  }
  return Signal(impl_->in_shape, impl_->adjoint(y.values()));
}

const Shape& LinearOp::in_shape() const { return impl_->in_shape; }
const Shape& LinearOp::out_shape() const { return impl_->out_shape; }
OpKind LinearOp::kind() const { return impl_->kind(); }
std::string LinearOp::describe() const { return impl_->describe(); }

const Eigen::MatrixXd& LinearOp::matrix() const {
  const auto* dense = dynamic_cast<const DenseImpl*>(impl_.get());
  if (!dense) throw Unsupported("matrix() requires a dense operator, got " + describe());
  return dense->m;
}

const Vec& LinearOp::diagonal() const {
  const auto* diag = dynamic_cast<const DiagonalImpl*>(impl_.get());
  if (!diag) throw Unsupported("diagonal() requires a diagonal or mask operator, got " + describe());
  return diag->d;
}

const std::vector<std::complex<double>>& LinearOp::frequency_response() const {
  const auto* circ = dynamic_cast<const CirculantImpl*>(impl_.get());
  if (!circ) throw Unsupported("frequency_response() requires a circulant operator, got " + describe());
  return circ->response;
}

Eigen::MatrixXd LinearOp::to_dense() const {
  if (kind() == OpKind::Dense) return matrix();
  const auto n = static_cast<Eigen::Index>(shape_size(in_shape()));
  const auto m = static_cast<Eigen::Index>(shape_size(out_shape()));
  if (n > 8192) throw Unsupported("to_dense() limited to 8192 columns");
  Eigen::MatrixXd out(m, n);
  Vec e = Vec::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    out.col(j) = impl_->apply(e);
    e[j] = 0.0;
  }
  return out;
}

LinearOp make_dense(Eigen::MatrixXd matrix) {
  Shape in{static_cast<int>(matrix.cols())};
  Shape out{static_cast<int>(matrix.rows())};
  return make_dense(std::move(matrix), std::move(in), std::move(out));
}

LinearOp make_dense(Eigen::MatrixXd matrix, Shape in_shape, Shape out_shape) {
  if (static_cast<std::size_t>(matrix.cols()) != shape_size(in_shape) ||
      static_cast<std::size_t>(matrix.rows()) != shape_size(out_shape)) {
    throw ShapeError("dense matrix size does not match operator shapes");
  }
  if (!matrix.allFinite()) throw InvalidArgument("dense matrix has non-finite entries");
  return LinearOp(std::make_shared<DenseImpl>(std::move(matrix), std::move(in_shape), std::move(out_shape)));
}

LinearOp make_diagonal(Vec diagonal, Shape shape) {
  if (static_cast<std::size_t>(diagonal.size()) != shape_size(shape)) throw ShapeError("diagonal size mismatch");
  return LinearOp(std::make_shared<DiagonalImpl>(std::move(diagonal), std::move(shape), false));
}

LinearOp make_identity(const Shape& shape) {
  return make_diagonal(Vec::Ones(static_cast<Eigen::Index>(shape_size(shape))), shape);
}

LinearOp make_zero(const Shape& shape) {
  return make_diagonal(Vec::Zero(static_cast<Eigen::Index>(shape_size(shape))), shape);
}

LinearOp make_mask(const Signal& mask) {
  Vec d = (mask.values().array() != 0.0).cast<double>();
  return LinearOp(std::make_shared<DiagonalImpl>(std::move(d), mask.shape(), true));
}

LinearOp make_circulant(std::vector<std::complex<double>> response, const Shape& image_shape) {
  if (image_shape.empty() || image_shape.size() > 3) throw ShapeError("circulant operators need rank 1-3 images");
  return LinearOp(std::make_shared<CirculantImpl>(std::move(response), image_shape));
}

LinearOp make_blur(const Signal& kernel, const Shape& image_shape) {
  const Shape grid = grid_of(image_shape);
  if (kernel.rank() != static_cast<int>(grid.size())) {
    throw ShapeError("kernel rank " + std::to_string(kernel.rank()) + " does not match image " +
                     shape_string(image_shape));
  }
  for (int side : kernel.shape()) {
    if (side % 2 == 0) throw InvalidArgument("blur kernel sides must be odd, got " + shape_string(kernel.shape()));
  }
  // Place the kernel with its centre at the origin, wrapping periodically.
  const std::size_t n = shape_size(grid);
  std::vector<Complex> psf(n, Complex(0.0, 0.0));
  if (grid.size() == 1) {
    const int len = kernel.shape()[0];
    const int c = len / 2;
    for (int i = 0; i < len; ++i) {
      const int pos = ((i - c) % grid[0] + grid[0]) % grid[0];
      psf[static_cast<std::size_t>(pos)] += kernel[i];
    }
  } else {
    const int kh = kernel.shape()[0];
    const int kw = kernel.shape()[1];
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j) {
        const int r = ((i - kh / 2) % grid[0] + grid[0]) % grid[0];
        const int c = ((j - kw / 2) % grid[1] + grid[1]) % grid[1];
        psf[static_cast<std::size_t>(r) * grid[1] + c] += kernel[i * kw + j];
      }
    }
  }
  detail::FftPlan plan(grid);
  plan.forward(psf);
  return make_circulant(std::move(psf), image_shape);
}

LinearOp compose(const LinearOp& outer, const LinearOp& inner) {
  if (outer.in_shape() != inner.out_shape()) throw ShapeError("compose: inner output does not feed outer input");
  return LinearOp(std::make_shared<CompositeImpl>(outer, inner));
}

LinearOp load_dense_operator(const std::filesystem::path& path) {
  const Signal s = load_signal(path);
  if (s.rank() != 2) throw ShapeError("dense operator file must have shape [m, n]");
  const int m = s.shape()[0];
  const int n = s.shape()[1];
  Eigen::MatrixXd mat(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) mat(i, j) = s[static_cast<Eigen::Index>(i) * n + j];
  return make_dense(std::move(mat));
}

Signal uniform_kernel(int size, int rank) {
  if (size <= 0 || size % 2 == 0) throw InvalidArgument("uniform kernel size must be odd and positive");
  Shape shape = rank == 1 ? Shape{size} : Shape{size, size};
  const double total = static_cast<double>(shape_size(shape));
  return Signal::filled(shape, 1.0 / total);
}

Signal gaussian_kernel(double sigma, int rank, int radius) {
  if (!(sigma > 0)) throw InvalidArgument("gaussian kernel sigma must be positive");
  if (radius < 0) radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int size = 2 * radius + 1;
  Vec taps(size);
  for (int i = 0; i < size; ++i) {
    const double t = i - radius;
    taps[i] = std::exp(-0.5 * t * t / (sigma * sigma));
  }
  if (rank == 1) return normalize_kernel(Signal({size}, taps));
  Vec k(size * size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) k[i * size + j] = taps[i] * taps[j];
  return normalize_kernel(Signal({size, size}, k));
}

Signal normalize_kernel(const Signal& kernel) {
  const double total = kernel.values().sum();
  if (total == 0.0) throw InvalidArgument("kernel sums to zero");
  return kernel.with_values(kernel.values() / total);
}

double operator_norm(const LinearOp& op, int max_iter, double tol) {
  switch (op.kind()) {
    case OpKind::Diagonal:
    case OpKind::Mask:
      return op.diagonal().size() ? op.diagonal().cwiseAbs().maxCoeff() : 0.0;
    case OpKind::Circulant: {
      double best = 0.0;
      for (const auto& h : op.frequency_response()) best = std::max(best, std::abs(h));
      return best;
    }
    case OpKind::Dense:
      if (op.matrix().cols() <= kMaxSvdSize) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(op.matrix());
        return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
      }
      break;
    case OpKind::Composite:
      break;
  }
  Rng rng(0x5eed);
  Signal v(op.in_shape(), rng.normal_vector(static_cast<Eigen::Index>(shape_size(op.in_shape()))));
  v.values().normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Signal w = op.normal(v);
    const double next = std::sqrt(std::max(0.0, v.values().dot(w.values())));
    const double wn = w.values().norm();
    if (wn == 0.0) return 0.0;
    v.values() = w.values() / wn;
    if (std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

SvdFactors compute_svd(const LinearOp& op) {
  if (op.kind() != OpKind::Dense && op.kind() != OpKind::Diagonal && op.kind() != OpKind::Mask) {
    throw Unsupported("SVD is limited to dense operators, got " + op.describe());
  }
  const Eigen::MatrixXd mat = op.to_dense();
  if (mat.cols() > kMaxSvdSize || mat.rows() > kMaxSvdSize) {
    throw Unsupported("SVD is limited to " + std::to_string(kMaxSvdSize) + " unknowns");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdFactors{svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

Signal naive_svd_solve(const LinearOp& op, const Signal& y, double tolerance) {
  if (y.shape() != op.out_shape()) throw ShapeError("naive_svd_solve: data shape mismatch");
  const SvdFactors f = compute_svd(op);
  Vec x = Vec::Zero(f.right.rows());
  for (Eigen::Index m = 0; m < f.singular_values.size(); ++m) {
    const double s = f.singular_values[m];
    if (!(s > tolerance) || s == 0.0) continue;
    x.noalias() += (f.left.col(m).dot(y.values()) / s) * f.right.col(m);
  }
  return Signal(op.in_shape(), std::move(x));
}

Signal solve_shifted_normal(const LinearOp& op, double rho, const Signal& b, const CgOptions& cg) {
  if (!(rho > 0)) throw InvalidArgument("solve_shifted_normal needs rho > 0");
  if (b.shape() != op.in_shape()) throw ShapeError("solve_shifted_normal: right-hand side shape mismatch");
  switch (op.kind()) {
    case OpKind::Diagonal:
    case OpKind::Mask: {
      const Vec& d = op.diagonal();
      return b.with_values(b.values().array() / (d.array().square() + rho));
    }
    case OpKind::Circulant: {
      const auto& resp = op.frequency_response();
      std::vector<std::complex<double>> shifted(resp.size());
      for (std::size_t i = 0; i < resp.size(); ++i) shifted[i] = 1.0 / (std::norm(resp[i]) + rho);
      return make_circulant(std::move(shifted), op.in_shape()).apply(b);
    }
    case OpKind::Dense: {
      const Eigen::MatrixXd& k = op.matrix();
      auto apply_a = [&](const Vec& v) -> Vec { return k.transpose() * (k * v) + rho * v; };
      return b.with_values(conjugate_gradient(apply_a, b.values(), cg));
    }
    case OpKind::Composite:
      break;
  }
  const Shape in = op.in_shape();
  auto apply_a = [&](const Vec& v) -> Vec { return op.normal(Signal(in, v)).values() + rho * v; };
  return b.with_values(conjugate_gradient(apply_a, b.values(), cg));
}

Signal tikhonov_solve(const LinearOp& op, const Signal& y, double alpha, const CgOptions& cg) {
  if (!(alpha > 0)) throw InvalidArgument("tikhonov_solve needs alpha > 0");
  return solve_shifted_normal(op, alpha, op.adjoint(y), cg);
}

double adjoint_mismatch(const LinearOp& op, const Signal& x, const Signal& y) {
  const double lhs = op.apply(x).values().dot(y.values());
  const double rhs = x.values().dot(op.adjoint(y).values());
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace pnpkit
