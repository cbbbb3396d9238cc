#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "pnpkit/io.hpp"

using namespace pnpkit;
using pnpkit::cli::Json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pnpkit_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const Json& config) {
  const fs::path p = dir / name;
  write_file(p, config.dump(2));
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "pnpkit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

Json read_json(const fs::path& p) { return Json::parse(read_file(p)); }

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

Json small_image() { return Json{{"builtin", "shapes"}, {"size", 32}}; }

}  // namespace

TEST_CASE("solve writes its outputs and improves on the observation") {
  const fs::path dir = fresh_dir("solve");
  const fs::path cfg = write_config(dir, "c.json",
                                    Json{{"task", "deblur"},
                                         {"image", small_image()},
                                         {"operator", {{"type", "blur"}, {"kernel", "uniform"}, {"size", 5}}},
                                         {"denoiser", {{"type", "tv"}, {"c", 20}}},
                                         {"solver", {{"algo", "pnp-pgd"}, {"max_iter", 100}}}});
  REQUIRE(run({"solve", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
  for (const char* f : {"observed.pnpk", "reconstruction.pnpk", "reconstruction.pgm", "trace.csv", "summary.json"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  const Json summary = read_json(dir / "a" / "summary.json");
  CHECK(summary.at("final_psnr").get<double>() > summary.at("input_psnr").get<double>());
  CHECK(summary.at("seed").get<int>() == 0);
  CHECK(summary.at("iters").get<int>() >= 1);

  REQUIRE(run({"solve", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "7"}) == 0);
  REQUIRE(run({"solve", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "7"}) == 0);
  for (const char* f : {"observed.pnpk", "reconstruction.pnpk", "trace.csv", "summary.json"}) {
    CHECK(read_file(dir / "b" / f) == read_file(dir / "c" / f));
  }
  CHECK(read_file(dir / "a" / "observed.pnpk") != read_file(dir / "b" / "observed.pnpk"));
}

TEST_CASE("usage and config errors exit 2") {
  const fs::path dir = fresh_dir("errors");
  const fs::path bad_algo =
      write_config(dir, "algo.json", Json{{"task", "deblur"}, {"image", small_image()}, {"solver", {{"algo", "fista"}}}});
  CHECK(run({"solve", "--config", bad_algo.string(), "--out", dir.string()}) == 2);
  const fs::path bad_key = write_config(
      dir, "key.json",
      Json{{"task", "deblur"}, {"image", small_image()}, {"solver", {{"algo", "pnp-pgd"}}}, {"stepsize", 1}});
  CHECK(run({"solve", "--config", bad_key.string(), "--out", dir.string()}) == 2);
  CHECK(run({"solve", "--config", (dir / "missing.json").string()}) == 2);
  CHECK(run({"frobnicate", "--config", bad_key.string()}) == 2);
  CHECK(run({"solve"}) == 2);
  const fs::path wrong_task = write_config(dir, "task.json", Json{{"task", "sample"}});
  CHECK(run({"solve", "--config", wrong_task.string(), "--out", dir.string()}) == 2);
  const fs::path one_solver = write_config(
      dir, "one.json", Json{{"task", "compare"}, {"images", {small_image()}}, {"solvers", {{{"algo", "pnp-pgd"}}}}});
  CHECK(run({"compare", "--config", one_solver.string(), "--out", dir.string()}) == 2);
  const fs::path empty = write_config(dir, "empty.json",
                                      Json{{"task", "compare"}, {"images", {small_image()}}, {"solvers", Json::array()}});
  CHECK(run({"compare", "--config", empty.string(), "--out", dir.string()}) == 2);
}

TEST_CASE("the installed binary maps exit codes and names valid algorithms") {
  const char* bin = std::getenv("PNPKIT_BIN");
  if (!bin) return;
  const fs::path dir = fresh_dir("binary");
  const fs::path bad_algo =
      write_config(dir, "algo.json", Json{{"task", "deblur"}, {"image", small_image()}, {"solver", {{"algo", "fista"}}}});
  const std::string cmd = std::string(bin) + " solve --config " + bad_algo.string() + " --out " + dir.string() +
                          " > " + (dir / "out.txt").string() + " 2> " + (dir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
  const std::string err = read_file(dir / "err.txt");
  for (const char* algo : {"pnp-pgd", "pnp-drs", "pnp-drsdiff", "gs-pnp", "hqs", "red-gd"}) {
    CHECK(err.find(algo) != std::string::npos);
  }

  const fs::path diverge = write_config(dir, "div.json",
                                        Json{{"task", "deblur"},
                                             {"image", small_image()},
                                             {"denoiser", {{"type", "identity"}}},
                                             {"solver", {{"algo", "pnp-pgd"}, {"step", 5.0}, {"max_iter", 5000}}}});
  const int div = std::system((std::string(bin) + " solve --config " + diverge.string() + " --out " +
                               (dir / "div").string() + " > /dev/null 2>&1")
                                  .c_str());
  REQUIRE(WIFEXITED(div));
  CHECK(WEXITSTATUS(div) == 4);
  CHECK(read_json(dir / "div" / "summary.json").at("stop_reason") == "diverged");
}

TEST_CASE("compare with the gradient-step denoiser converges for the provable methods") {
  const fs::path dir = fresh_dir("compare");
  const Json gs = {{"type", "gs"}};
  const Json config = {{"task", "compare"},
                       {"images", {small_image()}},
                       {"operator", {{"type", "blur"}, {"kernel", "uniform"}, {"size", 5}}},
                       {"denoiser", gs},
                       {"solvers",
                        {{{"algo", "pnp-pgd"}, {"max_iter", 300}},
                         {{"algo", "pnp-drs"}, {"max_iter", 300}},
                         {{"algo", "pnp-drsdiff"}, {"max_iter", 300}},
                         {{"algo", "gs-pnp"}, {"max_iter", 300}},
                         {{"algo", "apgd"}, {"max_iter", 300}},
                         {{"algo", "hqs"},
                          {"name", "hqs-decreasing"},
                          {"max_iter", 50},
                          {"denoiser", {{"type", "tv"}}},
                          {"hqs", {{"sigma_start", 0.2}, {"iterations", 8}}}}}}};
  const fs::path cfg = write_config(dir, "c.json", config);
  REQUIRE(run({"compare", "--config", cfg.string(), "--out", (dir / "a").string(), "--assert"}) == 0);
  const std::string table = read_file(dir / "a" / "compare.csv");
  CHECK(table.rfind("solver,image,final_psnr,min_residual,residual_slope,converged\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);
  const auto rows = cli::run_compare(config, cli::Context{dir, 0});
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < 5; ++i) {
    INFO(rows[i].solver);
    CHECK(rows[i].converged);
    CHECK(fs::exists(dir / "a" / ("trace_" + rows[i].solver + "_" + rows[i].image + ".csv")));
  }
  CHECK(rows[5].trace.size() >= 2);

  REQUIRE(run({"compare", "--config", cfg.string(), "--out", (dir / "b").string(), "--assert"}) == 0);
  CHECK(read_file(dir / "a" / "compare.csv") == read_file(dir / "b" / "compare.csv"));
}

TEST_CASE("residual slope and convergence flag") {
  Trace t;
  for (int k = 0; k <= 1000; ++k) t.push({k, NAN, k ? 1.0 / std::sqrt(double(k)) : NAN, NAN, NAN, NAN});
  CHECK(cli::residual_slope(t) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(cli::summarize_run("s", "i", t, "max_iter", false).converged);
  CHECK_FALSE(cli::summarize_run("s", "i", t, "max_iter", true).converged);
  Trace flat;
  for (int k = 0; k <= 100; ++k) flat.push({k, NAN, 0.3, NAN, NAN, NAN});
  CHECK(cli::residual_slope(flat) == doctest::Approx(0.0));
  CHECK_FALSE(cli::summarize_run("s", "i", flat, "max_iter", false).converged);
  CHECK(cli::summarize_run("s", "i", flat, "tolerance", false).converged);
  CHECK(cli::summarize_run("s", "i", t, "max_iter", false).min_residual == doctest::Approx(1.0 / std::sqrt(1000.0)));
}

TEST_CASE("sweep") {
  const fs::path dir = fresh_dir("sweep");
  const fs::path def = write_config(dir, "default.json", Json{{"task", "sweep"}});
  REQUIRE(run({"sweep", "--config", def.string(), "--out", (dir / "a").string(), "--assert"}) == 0);
  const std::string csv = read_file(dir / "a" / "sweep.csv");
  CHECK(csv.rfind("delta,lambda,error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

  const auto exact = cli::run_sweep(Json{{"task", "sweep"}, {"deltas", {0.0}}}, cli::Context{});
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].lambda == 0.0);
  CHECK(exact[0].error <= 1e-10);

  // Fixed δ and shrinking λ approach the unregularized error at that noise level.
  const auto floor = cli::run_sweep(Json{{"task", "sweep"}, {"deltas", {0.1}}, {"lambda_rule", {{"c", 0.0}}}},
                                    cli::Context{});
  double prev = INFINITY;
  for (double c : {1.0, 0.1, 0.01, 1e-4}) {
    const auto r = cli::run_sweep(Json{{"task", "sweep"}, {"deltas", {0.1}}, {"lambda_rule", {{"c", c}}}},
                                  cli::Context{});
    const double gap = std::abs(r[0].error - floor[0].error);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev <= 1e-3);

  const fs::path rising = write_config(dir, "rising.json", Json{{"task", "sweep"}, {"deltas", {0.01, 0.5}}});
  CHECK(run({"sweep", "--config", rising.string(), "--out", (dir / "b").string(), "--assert"}) == 3);
  CHECK(run({"sweep", "--config", rising.string(), "--out", (dir / "c").string()}) == 0);
}

TEST_CASE("diagnose") {
  const cli::Context ctx{};
  const Json spectral = cli::run_diagnose(
      Json{{"task", "diagnose"}, {"denoiser", {{"type", "spectral"}, {"lambda", 0.1}}}}, ctx);
  CHECK(std::abs(spectral.at("epsilon_hat").get<double>() - 0.1 / 1.1) <= 1e-4);
  CHECK(spectral.at("asymmetry").get<double>() <= 1e-6);
  const double tau = spectral.at("theorem_gate").at("pnp_drsdiff_tau_min").get<double>();
  const double eps = spectral.at("epsilon_hat").get<double>();
  CHECK(tau == doctest::Approx(eps / (1 + eps - 2 * eps * eps)));

  const Json gauss = cli::run_diagnose(
      Json{{"task", "diagnose"}, {"denoiser", {{"type", "gaussian"}, {"kernel_sigma", 1.0}}}}, ctx);
  CHECK(gauss.at("asymmetry").get<double>() <= 1e-6);

  const Json nlm = cli::run_diagnose(
      Json{{"task", "diagnose"}, {"denoiser", {{"type", "nlm"}, {"h", 0.3}}}, {"probe", {{"shape", {8, 8}}}}}, ctx);
  CHECK(nlm.at("asymmetry").get<double>() > 0.0);

  const fs::path dir = fresh_dir("diagnose");
  const fs::path cfg = write_config(
      dir, "tv.json", Json{{"task", "diagnose"}, {"denoiser", {{"type", "tv"}}}, {"probe", {{"shape", {8, 8}}}}});
  REQUIRE(run({"diagnose", "--config", cfg.string(), "--out", dir.string()}) == 0);
  const Json report = read_json(dir / "diagnose.json");
  if (report.at("epsilon_hat").get<double>() >= 1.0) {
    CHECK(report.at("theorem_gate").at("pnp_drsdiff_tau_min") == "not applicable");
  }
  for (const char* key : {"epsilon_hat", "asymmetry", "homogeneity_defect", "theorem_gate"}) CHECK(report.contains(key));
}

TEST_CASE("sample") {
  const fs::path dir = fresh_dir("sample");
  const Json gaussian = {{"task", "sample"},
                         {"signal", {{"values", {0.5, -0.2, 0.1, 0.8}}}},
                         {"prior", {{"type", "gaussian"}, {"gamma", 0.5}}},
                         {"ula", {{"step", 1e-3}, {"sigma", 0.3}, {"sigma_w", 0.4}, {"kept", 100000}}}};
  const fs::path cfg = write_config(dir, "g.json", gaussian);
  REQUIRE(run({"sample", "--config", cfg.string(), "--out", (dir / "g").string(), "--assert"}) == 0);
  const Json summary = read_json(dir / "g" / "summary.json");
  CHECK(summary.at("seed").get<int>() == 0);
  CHECK(summary.at("count").get<int>() == 100000);
  const Json gap = read_json(dir / "g" / "oracle_gap.json");
  CHECK(gap.at("mean_within_tolerance").get<bool>());
  CHECK(gap.at("variance_within_tolerance").get<bool>());
  const std::string stats = read_file(dir / "g" / "stats.csv");
  CHECK(stats.rfind("coordinate,mean,variance\n", 0) == 0);
  CHECK(std::count(stats.begin(), stats.end(), '\n') == 5);

  write_file(dir / "prior.json", R"({"weights":[0.5,0.5],"means":[[-1,-1],[1,1]],"variances":[0.2,0.2]})");
  const Json mixture = {{"task", "sample"},
                        {"signal", {{"values", {0.3, 0.4}}}},
                        {"prior", {{"type", "gmm"}, {"path", "prior.json"}}},
                        {"ula", {{"kept", 500}}},
                        {"stream_samples", true},
                        {"seed", 5}};
  const fs::path mcfg = write_config(dir, "m.json", mixture);
  REQUIRE(run({"sample", "--config", mcfg.string(), "--out", (dir / "m").string()}) == 0);
  CHECK(fs::exists(dir / "m" / "stats.csv"));
  CHECK_FALSE(fs::exists(dir / "m" / "oracle_gap.json"));
  CHECK(read_json(dir / "m" / "summary.json").at("seed").get<int>() == 5);
  CHECK(load_signal(dir / "m" / "samples.pnpk").shape() == Shape{500, 2});
}

TEST_CASE("plot") {
  const fs::path dir = fresh_dir("plot");
  Trace t;
  for (int k = 0; k < 20; ++k) t.push({k, NAN, k ? 1.0 / k : NAN, NAN, 20.0 + 0.1 * k, NAN});
  Json traces = Json::array();
  for (int i = 0; i < 10; ++i) {
    const fs::path p = dir / ("t" + std::to_string(i) + ".csv");
    write_trace(t, p);
    traces.push_back(p.string());
  }
  const fs::path one = write_config(dir, "one.json", Json{{"task", "plot"}, {"traces", {traces[0]}}});
  REQUIRE(run({"plot", "--config", one.string(), "--out", (dir / "one").string()}) == 0);
  CHECK(count_of(read_file(dir / "one" / "plot.svg"), "<polyline class=\"trace\"") == 2);
  const fs::path ten = write_config(dir, "ten.json", Json{{"task", "plot"}, {"traces", traces}});
  REQUIRE(run({"plot", "--config", ten.string(), "--out", (dir / "ten").string()}) == 0);
  const std::string svg = read_file(dir / "ten" / "plot.svg");
  CHECK(count_of(svg, "<polyline class=\"trace\"") == 20);
  CHECK(svg.find("<svg") != std::string::npos);
  REQUIRE(run({"plot", "--config", ten.string(), "--out", (dir / "again").string()}) == 0);
  CHECK(read_file(dir / "again" / "plot.svg") == svg);

  write_trace(Trace{}, dir / "empty.csv");
  const fs::path empty = write_config(dir, "empty.json", Json{{"task", "plot"}, {"traces", {"empty.csv"}}});
  CHECK(run({"plot", "--config", empty.string(), "--out", (dir / "e").string()}) == 2);
  write_file(dir / "bad.csv", "iter,objective\n1,2\n");
  const fs::path bad = write_config(dir, "bad.json", Json{{"task", "plot"}, {"traces", {"bad.csv"}}});
  CHECK(run({"plot", "--config", bad.string(), "--out", (dir / "b").string()}) == 2);
}

TEST_CASE("config hash depends on content and seed") {
  const Json a = {{"task", "sweep"}};
  CHECK(cli::config_hash(a, 0) == cli::config_hash(Json::parse(a.dump()), 0));
  CHECK(cli::config_hash(a, 0) != cli::config_hash(a, 1));
  CHECK(cli::config_hash(a, 0).size() == 16);
}
