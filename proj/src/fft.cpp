#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace pnpkit::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftPlan::FftPlan(const Shape& dims) : dims_(dims), size_(shape_size(dims)) {
  std::vector<Complex> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const int rank = static_cast<int>(dims_.size());
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft(rank, dims_.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_plan_ = fftw_plan_dft(rank, dims_.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!forward_plan_ || !backward_plan_) throw Error("FFTW planning failed for " + shape_string(dims_));
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void FftPlan::forward(std::vector<Complex>& data) const {
  if (data.size() != size_) throw ShapeError("FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), buf, buf);
}

void FftPlan::backward(std::vector<Complex>& data) const {
  if (data.size() != size_) throw ShapeError("FFT buffer size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), buf, buf);
}

}  // namespace pnpkit::detail
