#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>

#include "pnpkit/core.hpp"
#include "pnpkit/images.hpp"
#include "pnpkit/io.hpp"

using namespace pnpkit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pnpkit_core_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("signal construction checks the shape") {
  CHECK_THROWS_AS(Signal({2, 2}, Vec::Zero(3)), ShapeError);
  CHECK_THROWS_AS(Signal(Shape{}), ShapeError);
  CHECK_THROWS_AS(Signal(Shape{1, 1, 1, 1}), ShapeError);
  CHECK_THROWS_AS(Signal(Shape{0, 3}), ShapeError);
  const Signal s = Signal::filled({2, 3}, 0.5);
  CHECK(s.size() == 6);
  CHECK(s.rank() == 2);
  CHECK(s[5] == 0.5);
  CHECK(s.all_finite());
  Signal t = s;
  t[0] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("rng streams are reproducible and seed dependent") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
  Rng u(1);
  double lo = 1, hi = 0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("normal draws have unit variance") {
  Rng rng(5);
  const Vec v = rng.normal_vector(1000000);
  CHECK(std::abs(v.mean()) < 5e-3);
  CHECK((v.array() - v.mean()).square().mean() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("trace rows must have increasing iteration indices") {
  Trace t;
  t.push({0});
  t.push({1});
  CHECK_THROWS_AS(t.push({1}), InvalidArgument);
  CHECK_THROWS_AS(t.push({0}), InvalidArgument);
  CHECK(t.size() == 2);
}

TEST_CASE("psnr examples") {
  const Signal a = Signal::filled({4}, 0.3);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(psnr(Signal::filled({10}, 0.0), Signal::filled({10}, 0.1)) == doctest::Approx(20.0));
  Rng rng(9);
  const Signal x({8, 8}, rng.normal_vector(64));
  const Signal y({8, 8}, rng.normal_vector(64));
  double mse = 0;
  for (int i = 0; i < 64; ++i) mse += (x[i] - y[i]) * (x[i] - y[i]);
  mse /= 64;
  CHECK(psnr(x, y, 2.0) == doctest::Approx(10 * std::log10(4.0 / mse)).epsilon(1e-12));
  CHECK(psnr(x, y) == psnr(y, x));
  CHECK_THROWS_AS(psnr(x, Signal::filled({4}, 0.0)), ShapeError);
}

TEST_CASE("gaussian noise") {
  const Signal x = Signal::filled({1000, 1000}, 0.5);
  Rng r0(3);
  CHECK(add_gaussian_noise(x, 0.0, r0).values() == x.values());
  Rng r1(3), r2(3);
  const Signal n1 = add_gaussian_noise(x, 0.1, r1);
  CHECK(n1.values() == add_gaussian_noise(x, 0.1, r2).values());
  CHECK((n1.values() - x.values()).squaredNorm() / 1e6 == doctest::Approx(0.01).epsilon(0.01));
  const Signal n2 = add_gaussian_noise(n1, 0.2, r1);
  CHECK((n2.values() - x.values()).squaredNorm() / 1e6 == doctest::Approx(0.05).epsilon(0.01));
  CHECK_THROWS_AS(add_gaussian_noise(x, -1.0, r1), InvalidArgument);
}

TEST_CASE("raw files round-trip bit for bit") {
  const fs::path dir = temp_dir("raw");
  Rng rng(1);
  const Signal x({3, 4, 2}, rng.normal_vector(24));
  save_signal(x, dir / "x.pnpk");
  const Signal y = load_signal(dir / "x.pnpk");
  CHECK(y.shape() == x.shape());
  CHECK(std::memcmp(x.values().data(), y.values().data(), 24 * sizeof(double)) == 0);
}

TEST_CASE("truncated raw file is a parse error") {
  const std::string bytes = encode_raw(Signal::filled({4, 4}, 1.0));
  CHECK_THROWS_AS(parse_raw(bytes.substr(0, bytes.size() - 3)), ParseError);
  CHECK_THROWS_AS(parse_raw("garbage"), ParseError);
  try {
    parse_raw(bytes.substr(0, bytes.size() - 3));
  } catch (const ParseError& e) {
    CHECK(e.offset() == bytes.size() - 3);
  }
}

TEST_CASE("ascii pgm parses and scales") {
  const Signal s = parse_netpbm("P2\n2 2\n255\n0 255 128 64\n");
  CHECK(s.shape() == Shape{2, 2});
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 1.0);
  CHECK(s[2] == doctest::Approx(128.0 / 255.0));
  CHECK(s[3] == doctest::Approx(64.0 / 255.0));
  CHECK_THROWS_AS(parse_netpbm("P2\n2 2\n255\n0 255 128\n"), ParseError);
  CHECK_THROWS_AS(parse_netpbm("P2\n2 2\n255\n0 255 300 1\n"), ParseError);
}

TEST_CASE("binary pgm and ppm round-trip at 8 and 16 bits") {
  const fs::path dir = temp_dir("pnm");
  const Signal img = builtin_image("rings", 16);
  save_signal(img, dir / "a.pgm");
  CHECK((load_signal(dir / "a.pgm").values() - img.values()).cwiseAbs().maxCoeff() <= 0.5 / 255 + 1e-12);
  SaveOptions wide;
  wide.maxval = 65535;
  save_signal(img, dir / "b.pgm", wide);
  CHECK((load_signal(dir / "b.pgm").values() - img.values()).cwiseAbs().maxCoeff() <= 0.5 / 65535 + 1e-12);
  Signal rgb({4, 5, 3});
  for (Eigen::Index i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<double>(i % 7) / 6.0;
  save_signal(rgb, dir / "c.ppm");
  const Signal back = load_signal(dir / "c.ppm");
  CHECK(back.shape() == rgb.shape());
  CHECK((back.values() - rgb.values()).cwiseAbs().maxCoeff() <= 0.5 / 255 + 1e-12);
  CHECK_THROWS_AS(save_signal(Signal::filled({4}, 0.0), dir / "d.pgm"), ShapeError);
}

TEST_CASE("trace csv round-trip") {
  const fs::path dir = temp_dir("trace");
  Trace empty;
  write_trace(empty, dir / "empty.csv");
  CHECK(read_file(dir / "empty.csv") == std::string(kTraceHeader) + "\n");
  Trace t;
  t.push({0, 1.5, NAN, NAN, 20.0, NAN});
  t.push({1, 1.25, 0.125, 0.25, 21.0, NAN});
  t.push({2, 1.0 / 3.0, 1e-17, 3e-300, NAN, 0.5});
  write_trace(t, dir / "t.csv");
  const std::string text = read_file(dir / "t.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  const Trace back = read_trace(dir / "t.csv");
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
    CHECK(back.rows[i].iter == t.rows[i].iter);
    CHECK(same(back.rows[i].objective, t.rows[i].objective));
    CHECK(same(back.rows[i].step_residual, t.rows[i].step_residual));
    CHECK(same(back.rows[i].fp_residual, t.rows[i].fp_residual));
    CHECK(same(back.rows[i].psnr, t.rows[i].psnr));
    CHECK(same(back.rows[i].seconds, t.rows[i].seconds));
  }
  CHECK_THROWS_AS(parse_trace("iter,objective\n1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_trace(std::string(kTraceHeader) + "\n1,2,3\n"), ParseError);
}

TEST_CASE("record writer streams a stacked raw file") {
  const fs::path dir = temp_dir("records");
  {
    RawRecordWriter w(dir / "s.pnpk", {2, 2}, 3);
    for (int i = 0; i < 3; ++i) w.write(Vec::Constant(4, i));
    CHECK_THROWS_AS(w.write(Vec::Zero(4)), InvalidArgument);
  }
  const Signal s = load_signal(dir / "s.pnpk");
  CHECK(s.shape() == Shape{3, 2, 2});
  CHECK(s[11] == 2.0);
}

TEST_CASE("builtin images lie in the unit range") {
  for (const auto& name : builtin_image_names()) {
    const Signal img = builtin_image(name, 64);
    CHECK(img.shape() == Shape{64, 64});
    CHECK(img.values().minCoeff() >= 0.0);
    CHECK(img.values().maxCoeff() <= 1.0);
    CHECK(img.values().maxCoeff() - img.values().minCoeff() > 0.3);
  }
  CHECK_FALSE(is_builtin_image("lena"));
  CHECK_THROWS(builtin_image("lena"));
}
