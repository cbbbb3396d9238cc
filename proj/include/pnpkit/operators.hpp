#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pnpkit/core.hpp"

namespace pnpkit {

enum class OpKind { Dense, Circulant, Diagonal, Mask, Composite };

const char* to_string(OpKind kind);

/// Immutable linear operator with its adjoint. Copies share the underlying
/// implementation, so operators are cheap to pass around and safe to use from
/// several threads.
class LinearOp {
 public:
  struct Impl;

  LinearOp() = default;
  explicit LinearOp(std::shared_ptr<const Impl> impl);

  Signal apply(const Signal& x) const;
  Signal adjoint(const Signal& y) const;
  /// KᵀK x without reshaping through the output space twice.
  Signal normal(const Signal& x) const { return adjoint(apply(x)); }

  const Shape& in_shape() const;
  const Shape& out_shape() const;
  OpKind kind() const;
  std::string describe() const;

  /// Dense kind only.
  const Eigen::MatrixXd& matrix() const;
  /// Diagonal and mask kinds only.
  const Vec& diagonal() const;
  /// Circulant kind only: eigenvalues in FFT order over the image grid.
  const std::vector<std::complex<double>>& frequency_response() const;

  /// Materializes the operator by applying it to unit vectors.
  Eigen::MatrixXd to_dense() const;

  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  std::shared_ptr<const Impl> impl_;
};

LinearOp make_dense(Eigen::MatrixXd matrix);
LinearOp make_dense(Eigen::MatrixXd matrix, Shape in_shape, Shape out_shape);
LinearOp make_diagonal(Vec diagonal, Shape shape);
LinearOp make_identity(const Shape& shape);
LinearOp make_zero(const Shape& shape);
/// Keeps entries where `mask` is nonzero and zeroes the rest.
LinearOp make_mask(const Signal& mask);
/// Periodic convolution with a centred odd-sized kernel. The kernel rank must
/// match the image rank; a rank-2 kernel also applies channel-wise to
/// [rows, cols, channels] images.
LinearOp make_blur(const Signal& kernel, const Shape& image_shape);
/// Circulant operator given directly by its frequency response.
LinearOp make_circulant(std::vector<std::complex<double>> response, const Shape& image_shape);
/// outer ∘ inner.
LinearOp compose(const LinearOp& outer, const LinearOp& inner);

/// Loads a dense matrix stored as a raw signal of shape [m, n].
LinearOp load_dense_operator(const std::filesystem::path& path);

Signal uniform_kernel(int size, int rank = 2);
/// Normalized Gaussian kernel truncated at ±radius (default ⌈3σ⌉).
Signal gaussian_kernel(double sigma, int rank = 2, int radius = -1);
Signal normalize_kernel(const Signal& kernel);

/// ‖K‖₂. Exact for diagonal, mask and circulant kinds; SVD for small dense
/// operators; power iteration otherwise.
double operator_norm(const LinearOp& op, int max_iter = 2000, double tol = 1e-12);

struct SvdFactors {
  Vec singular_values;  // descending
  Eigen::MatrixXd left;   // m×r
  Eigen::MatrixXd right;  // n×r
};

inline constexpr Eigen::Index kMaxSvdSize = 512;

/// Thin SVD of a dense (or diagonal) operator with at most kMaxSvdSize columns.
SvdFactors compute_svd(const LinearOp& op);

/// Σ ⟨y, u_m⟩/σ_m v_m over singular values above `tolerance`.
Signal naive_svd_solve(const LinearOp& op, const Signal& y, double tolerance = 0.0);

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = -1;  // -1 means 10·n
};

/// (KᵀK + ρI)⁻¹ b. Frequency-domain division for circulant operators, direct
/// division for diagonal and mask kinds, conjugate gradients otherwise.
Signal solve_shifted_normal(const LinearOp& op, double rho, const Signal& b, const CgOptions& cg = {});

/// x_α = (KᵀK + αI)⁻¹ Kᵀ y.
Signal tikhonov_solve(const LinearOp& op, const Signal& y, double alpha, const CgOptions& cg = {});

/// Relative ⟨Kx, y⟩ − ⟨x, Kᵀy⟩ mismatch on one probe pair.
double adjoint_mismatch(const LinearOp& op, const Signal& x, const Signal& y);

}  // namespace pnpkit
