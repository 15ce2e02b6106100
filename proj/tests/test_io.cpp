#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "krf/families.hpp"
#include "krf/io.hpp"

using namespace krf;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path p;
  TempDir() {
    p = fs::temp_directory_path() / ("krf_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(p);
  }
  ~TempDir() { fs::remove_all(p); }
};
}  // namespace

TEST_CASE("config parsing: key = value with comments and overrides") {
  auto kv = io::parse_config_text(
      "# a comment\n"
      "manifold = CP1\n"
      "n_points = 256   # trailing comment\n"
      "dt = 0.02\n"
      "t_end = 1.0\n"
      "init.family = bump\n"
      "init.amplitude = 0.05\n");
  auto cfg = io::flow_config_from_map(kv);
  CHECK(cfg.manifold == Manifold::CP1);
  CHECK(cfg.n_points == 256);
  CHECK(cfg.dt == doctest::Approx(0.02));
  CHECK(cfg.init_family == "bump");
}

TEST_CASE("config errors name the offending key") {
  auto kv = io::parse_config_text("manifold = CP1\ndt = -0.1\n");
  try {
    io::flow_config_from_map(kv);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dt") != std::string::npos);
  }
  auto kv2 = io::parse_config_text("manifold = CP3\n");
  CHECK_THROWS_AS(io::flow_config_from_map(kv2), ConfigError);
  auto kv3 = io::parse_config_text("n_points = many\n");
  CHECK_THROWS_AS(io::flow_config_from_map(kv3), ConfigError);
}

TEST_CASE("environment variables override config keys") {
  setenv("KRF_INIT_AMPLITUDE", "0.125", 1);
  auto kv = io::parse_config_text("manifold = CP1\ninit.amplitude = 0.05\n");
  unsetenv("KRF_INIT_AMPLITUDE");
  CHECK(kv["init.amplitude"] == "0.125");
}

TEST_CASE("state round-trip is bit identical") {
  TempDir td;
  std::mt19937_64 rng(61);
  auto ref = build_reference(Manifold::CP2, 256, 12.0);
  auto st = random_analytic_state(ref, rng, 2, 0.1);
  const std::string path = (td.p / "state.csv").string();
  io::save_state(st, path);
  auto back = io::load_state(path);
  REQUIRE(back.grid().n_points == 256);
  CHECK(back.grid().manifold == Manifold::CP2);
  for (int i = 0; i < 256; ++i) {
    // phi samples reload exactly (17 significant digits round-trip)
    CHECK(back.phi()[i] == st.phi()[i]);
  }
}

TEST_CASE("corrupt state file is rejected") {
  TempDir td;
  const std::string path = (td.p / "bad.csv").string();
  std::ofstream(path) << "not a state file\n1,2,3\n";
  CHECK_THROWS_AS(io::load_state(path), ConfigError);
}

TEST_CASE("trace CSV has the pinned column layout") {
  FlowConfig cfg;
  cfg.manifold = Manifold::CP1;
  cfg.n_points = 128;
  cfg.L = 10.0;
  cfg.dt = 0.05;
  cfg.t_end = 0.5;
  cfg.init_family = "bump";
  cfg.init_amplitude = 0.03;
  auto tr = run_flow(cfg);
  TempDir td;
  const std::string path = (td.p / "trace.csv").string();
  io::save_trace_csv(tr, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,c,eps,mu,mu_1,mu_2,R_max,R_min,min_bisec,J,F,nu,E_0,E_1,I,ImJ,"
        "harnack_margin,rr2_accum");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(tr.samples.size()));
}

TEST_CASE("deterministic: identical config + seed give identical traces") {
  FlowConfig cfg;
  cfg.manifold = Manifold::CP1;
  cfg.n_points = 128;
  cfg.L = 10.0;
  cfg.dt = 0.05;
  cfg.t_end = 0.5;
  cfg.init_family = "sech";
  cfg.init_amplitude = 0.05;
  cfg.init_mode = 2;
  cfg.seed = 31337;
  auto t1 = run_flow(cfg);
  auto t2 = run_flow(cfg);
  REQUIRE(t1.samples.size() == t2.samples.size());
  for (size_t i = 0; i < t1.samples.size(); ++i) {
    CHECK(t1.samples[i].c == t2.samples[i].c);
    CHECK(t1.samples[i].ledger.nu == t2.samples[i].ledger.nu);
  }
}

TEST_CASE("format_double survives parse round-trip") {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("audit json reports the ledger and invariant flags") {
  std::mt19937_64 rng(63);
  auto ref = build_reference(Manifold::CP1, 256, 12.0);
  auto st = random_analytic_state(ref, rng, 2, 0.1);
  auto j = io::audit_json(ref, st);
  CHECK(j.find("\"J\"") != std::string::npos);
  CHECK(j.find("\"Im_k\"") != std::string::npos);
  CHECK(j.find("\"sandwich\": true") != std::string::npos);
}

TEST_CASE("svg plot writer emits a parseable file") {
  TempDir td;
  const std::string path = (td.p / "p.svg").string();
  io::write_svg_plot(path, "demo", {0, 1, 2, 3}, {{"y", {1.0, 0.5, 0.25, 0.125}}}, true);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  CHECK(all.find("<svg") != std::string::npos);
  CHECK(all.find("polyline") != std::string::npos);
}
