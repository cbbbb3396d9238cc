#pragma once

#include <complex>
#include <vector>

#include "pnpkit/core.hpp"

namespace pnpkit::detail {

using Complex = std::complex<double>;

/// Multi-dimensional complex FFT of a fixed shape. Plans are created under a
/// global lock; execution uses caller-owned buffers and is thread-safe.
class FftPlan {
 public:
  explicit FftPlan(const Shape& dims);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  const Shape& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return size_; }

  /// Unnormalized forward transform (sign −1), in place.
  void forward(std::vector<Complex>& data) const;
  /// Unnormalized inverse transform (sign +1), in place.
  void backward(std::vector<Complex>& data) const;

 private:
  Shape dims_;
  std::size_t size_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace pnpkit::detail
