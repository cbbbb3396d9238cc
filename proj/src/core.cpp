#include "pnpkit/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pnpkit {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("shape dimensions must be positive, got " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

Signal::Signal(Shape shape) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 3) throw ShapeError("signal rank must be 1, 2 or 3");
  values_ = Vec::Zero(static_cast<Eigen::Index>(shape_size(shape_)));
}

Signal::Signal(Shape shape, Vec values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.empty() || shape_.size() > 3) throw ShapeError("signal rank must be 1, 2 or 3");
  if (shape_size(shape_) != static_cast<std::size_t>(values_.size())) {
    throw ShapeError("shape " + shape_string(shape_) + " does not match " +
                     std::to_string(values_.size()) + " values");
  }
}

Signal Signal::vector(Vec values) {
  const int n = static_cast<int>(values.size());
  return Signal({n}, std::move(values));
}

Signal Signal::filled(Shape shape, double value) {
  Signal s(std::move(shape));
  s.values_.setConstant(value);
  return s;
}

Signal Signal::with_values(Vec values) const {
  Signal s(shape_, std::move(values));
  s.range_hint = range_hint;
  return s;
}

bool Signal::all_finite() const { return values_.allFinite(); }

void require_same_shape(const Signal& a, const Signal& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = seed_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

Vec Rng::normal_vector(Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

void Trace::push(const TraceRow& row) {
  if (!rows.empty() && row.iter <= rows.back().iter) {
    throw InvalidArgument("trace iteration indices must be strictly increasing");
  }
  rows.push_back(row);
}

double psnr(const Signal& a, const Signal& b, double peak) {
  require_same_shape(a, b, "psnr");
  if (!(peak > 0)) throw InvalidArgument("psnr peak must be positive");
  if (a.size() == 0) return kPsnrCap;
  const double mse = (a.values() - b.values()).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

Signal add_gaussian_noise(const Signal& x, double sigma, Rng& rng) {
  if (!(sigma >= 0)) throw InvalidArgument("noise sigma must be non-negative");
  if (sigma == 0.0) return x;
  return x.with_values(x.values() + sigma * rng.normal_vector(x.size()));
}

}  // namespace pnpkit
