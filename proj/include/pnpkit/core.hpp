#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pnpkit/errors.hpp"

namespace pnpkit {

using Vec = Eigen::VectorXd;
using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Real-valued signal stored flat in row-major order.
///
/// Rank 1 is a plain vector, rank 2 a grayscale image (rows, cols) and rank 3
/// a multichannel image (rows, cols, channels). Intensities follow the [0,1]
/// convention, so PSNR uses peak 1 unless told otherwise.
class Signal {
 public:
  Signal() = default;
  /// Zero signal of the given shape.
  explicit Signal(Shape shape);
  Signal(Shape shape, Vec values);

  static Signal vector(Vec values);
  static Signal filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return static_cast<int>(shape_.size()); }
  Eigen::Index size() const noexcept { return values_.size(); }

  const Vec& values() const noexcept { return values_; }
  Vec& values() noexcept { return values_; }

  double operator[](Eigen::Index i) const { return values_[i]; }
  double& operator[](Eigen::Index i) { return values_[i]; }

  /// Same shape, new values.
  Signal with_values(Vec values) const;

  bool all_finite() const;
  bool same_shape(const Signal& other) const { return shape_ == other.shape_; }

  std::optional<std::array<double, 2>> range_hint;

 private:
  Shape shape_;
  Vec values_;
};

/// Throws ShapeError unless the two signals have identical shapes.
void require_same_shape(const Signal& a, const Signal& b, const char* what);

/// Counter-based generator: output k is a SplitMix64 hash of seed + k·γ, so a
/// given (seed, counter) pair yields the same bits on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via Box–Muller.
  double normal();
  Vec normal_vector(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_;
};

/// One solver iteration. Missing quantities are NaN.
struct TraceRow {
  int iter = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double step_residual = std::numeric_limits<double>::quiet_NaN();
  double fp_residual = std::numeric_limits<double>::quiet_NaN();
  double psnr = std::numeric_limits<double>::quiet_NaN();
  double seconds = std::numeric_limits<double>::quiet_NaN();
};

struct Trace {
  std::vector<TraceRow> rows;

  /// Rows must arrive with strictly increasing iteration index.
  void push(const TraceRow& row);
  bool empty() const { return rows.empty(); }
  std::size_t size() const { return rows.size(); }
};

inline constexpr double kPsnrCap = 300.0;

/// 10·log10(peak²/MSE), capped at kPsnrCap when the signals coincide.
double psnr(const Signal& a, const Signal& b, double peak = 1.0);

/// x + σ·w with w drawn i.i.d. standard normal from rng.
Signal add_gaussian_noise(const Signal& x, double sigma, Rng& rng);

/// A solver iterate became non-finite or exceeded the divergence bound.
/// Carries the last finite iterate and the trace recorded so far.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int step, Signal last_finite, Trace trace)
      : Error(what + " at step " + std::to_string(step)),
        step_(step),
        last_finite_(std::move(last_finite)),
        trace_(std::move(trace)) {}

  int step() const noexcept { return step_; }
  const Signal& last_finite() const noexcept { return last_finite_; }
  const Trace& trace() const noexcept { return trace_; }

 private:
  int step_;
  Signal last_finite_;
  Trace trace_;
};

inline constexpr double kDivergenceBound = 1e12;

}  // namespace pnpkit
