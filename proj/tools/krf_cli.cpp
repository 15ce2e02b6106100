// krf: numerical laboratory for the Kaehler Ricci flow on CP1/CP2.
//
// Subcommands:
//   simulate --config <file> --out <dir>   run the flow, write trace/summary
//   audit    <state.csv>                   one-shot functional + invariant audit
//   spectrum <state.csv> [--count k]       invariant Laplacian eigenvalues
//   verify   --suite <name>                property suites, exit 0 iff all pass
//   report   --trace <trace.csv> --out <dir>  SVG plots from a trace

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "krf/invariants.hpp"
#include "krf/io.hpp"
#include "krf/spectrum.hpp"
#include "krf/verify.hpp"

namespace fs = std::filesystem;
using namespace krf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  std::map<std::string, std::string> kv;
  FlowConfig cfg;
  try {
    kv = io::load_config(config_path);
    cfg = io::flow_config_from_map(kv);
    // validate the initial potential now so config errors exit with 2
    auto g = ReducedGrid::make(cfg.manifold, cfg.n_points, cfg.L);
    auto ref = build_reference(cfg.manifold, cfg.n_points, cfg.L);
    try {
      metric_from_potential(ref, initial_potential(cfg, g));
    } catch (const PositivityError& e) {
      std::cerr << "config error: initial potential violates positivity: " << e.what()
                << "\n";
      return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    fs::create_directories(out_dir);
    const std::string started = io::iso_timestamp();
    FlowTrace tr = run_flow(cfg);
    if (cfg.normalize_c) {
      auto norm = normalize_initial_c(tr);
      std::cout << "normalize_initial_c: a = " << io::format_double(norm.a)
                << " (tail rate " << norm.tail_rate << ")\n";
    }
    const std::string trace_path = out_dir + "/trace.csv";
    io::save_trace_csv(tr, trace_path);
    const std::string summary = io::summary_json(tr);
    const std::string summary_path = out_dir + "/summary.json";
    std::ofstream(summary_path) << summary << "\n";
    // final state snapshot
    const std::string state_path = out_dir + "/final_state.csv";
    {
      auto ref = build_reference(cfg.manifold, cfg.n_points, cfg.L);
      Field phi = tr.phi_rows.back();
      io::save_state(metric_from_potential(ref, phi), state_path);
    }
    const std::string finished = io::iso_timestamp();
    const std::string manifest_path = out_dir + "/manifest.json";
    std::ofstream(manifest_path) << io::manifest_json(
                                        cfg, kv,
                                        {trace_path, summary_path, state_path,
                                         manifest_path},
                                        started, finished, summary)
                                 << "\n";
    std::cout << summary << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_audit(const std::string& state_path) {
  try {
    ReducedMetricState st = io::load_state(state_path);
    auto ref = build_reference(st.grid().manifold, st.grid().n_points, st.grid().L);
    std::cout << io::audit_json(ref, st) << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_spectrum(const std::string& state_path, int count) {
  try {
    ReducedMetricState st = io::load_state(state_path);
    auto ev = laplacian_spectrum(st, count);
    std::cout << "{ \"eigenvalues\": [";
    for (size_t i = 0; i < ev.size(); ++i)
      std::cout << (i ? ", " : "") << io::format_double(ev[i]);
    std::cout << "] }\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  std::vector<verify::PropertyResult> results;
  try {
    results = verify::run_suite(suite, seed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  int failures = 0;
  std::printf("%-12s %-36s %-6s %13s %10s  %s\n", "suite", "property", "status",
              "worst", "tol", "note");
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::printf("%-12s %-36s %-6s %13.3e %10.1e  %s\n", r.suite.c_str(), r.name.c_str(),
                r.pass ? "pass" : "FAIL", r.worst, r.tolerance, r.note.c_str());
  }
  std::printf("%zu properties, %d failed\n", results.size(), failures);
  return failures == 0 ? kExitOk : kExitFail;
}

int cmd_report(const std::string& trace_path, const std::string& out_dir) {
  try {
    std::ifstream in(trace_path);
    if (!in) throw ConfigError("cannot read trace: " + trace_path);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    {
      std::istringstream hs(header);
      std::string tok;
      while (std::getline(hs, tok, ',')) cols.push_back(tok);
    }
    std::vector<std::vector<double>> data(cols.size());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tok;
      size_t i = 0;
      while (std::getline(ls, tok, ',') && i < cols.size()) data[i++].push_back(std::stod(tok));
    }
    auto col = [&](const std::string& name) -> std::vector<double>& {
      for (size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == name) return data[i];
      throw ConfigError("trace is missing column " + name);
    };
    fs::create_directories(out_dir);
    io::write_svg_plot(out_dir + "/curvature.svg", "scalar curvature range", col("t"),
                       {{"R_max", col("R_max")}, {"R_min", col("R_min")}});
    io::write_svg_plot(out_dir + "/energies.svg", "energy functionals", col("t"),
                       {{"F", col("F")}, {"nu", col("nu")}, {"E_0", col("E_0")},
                        {"E_1", col("E_1")}});
    std::vector<double> absmu = col("mu");
    io::write_svg_plot(out_dir + "/decay.svg", "mu(t)", col("t"), {{"mu", absmu}}, true);
    std::cout << "wrote " << out_dir << "/{curvature,energies,decay}.svg\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krf: Kaehler Ricci flow laboratory on CP1/CP2"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", state_path, trace_path, suite = "all";
  int count = 6;
  std::uint64_t seed = 2026;

  auto* sim = app.add_subcommand("simulate", "run the flow from a config file");
  sim->add_option("--config", config_path, "key = value config file")->required();
  sim->add_option("--out", out_dir, "output directory");

  auto* aud = app.add_subcommand("audit", "functional ledger + invariants of a state");
  aud->add_option("state", state_path, "state file")->required();

  auto* spec = app.add_subcommand("spectrum", "invariant Laplacian eigenvalues");
  spec->add_option("state", state_path, "state file")->required();
  spec->add_option("--count", count, "number of eigenvalues");

  auto* ver = app.add_subcommand("verify", "run property suites");
  ver->add_option("--suite", suite, "algebra|geometry|functionals|invariants|flow|all");
  ver->add_option("--seed", seed, "randomized-trial seed");

  auto* rep = app.add_subcommand("report", "emit SVG plots from a trace CSV");
  rep->add_option("--trace", trace_path, "trace.csv path")->required();
  rep->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return cmd_simulate(config_path, out_dir);
  if (aud->parsed()) return cmd_audit(state_path);
  if (spec->parsed()) return cmd_spectrum(state_path, count);
  if (ver->parsed()) return cmd_verify(suite, seed);
  if (rep->parsed()) return cmd_report(trace_path, out_dir);
  return kExitConfig;
}
