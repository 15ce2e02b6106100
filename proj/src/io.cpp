#include "krf/io.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "krf/invariants.hpp"

extern char** environ;

namespace krf {
namespace io {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string env_key(const std::string& key) {
  std::string out = "KRF_";
  for (char c : key) {
    if (c == '.' || c == '-')
      out += '_';
    else
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

double to_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double dflt) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number ('" + it->second + "')");
  }
}

long to_int(const std::map<std::string, std::string>& kv, const std::string& key,
            long dflt) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  try {
    size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer ('" + it->second + "')");
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  // environment overrides
  for (auto& [key, val] : kv) {
    if (const char* e = std::getenv(env_key(key).c_str())) val = e;
  }
  // environment-only keys for the known set
  for (const char* key : {"manifold", "n_points", "L", "dt", "t_end", "integrator",
                          "init.family", "init.amplitude", "init.mode", "monitors",
                          "normalize_c", "seed", "record_stride"}) {
    if (kv.count(key)) continue;
    if (const char* e = std::getenv(env_key(key).c_str())) kv[key] = e;
  }
  return kv;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

FlowConfig flow_config_from_map(const std::map<std::string, std::string>& kv) {
  FlowConfig cfg;
  if (auto it = kv.find("manifold"); it != kv.end()) {
    if (it->second == "CP1")
      cfg.manifold = Manifold::CP1;
    else if (it->second == "CP2")
      cfg.manifold = Manifold::CP2;
    else
      throw ConfigError("manifold: expected CP1 or CP2, got '" + it->second + "'");
  }
  cfg.n_points = static_cast<int>(to_int(kv, "n_points", cfg.n_points));
  cfg.L = to_double(kv, "L", cfg.L);
  cfg.dt = to_double(kv, "dt", cfg.dt);
  cfg.t_end = to_double(kv, "t_end", cfg.t_end);
  if (auto it = kv.find("integrator"); it != kv.end()) {
    if (it->second == "rk4")
      cfg.integrator = Integrator::ExplicitRK4;
    else if (it->second == "semi-implicit" || it->second == "ros2")
      cfg.integrator = Integrator::SemiImplicit;
    else
      throw ConfigError("integrator: expected rk4 or semi-implicit");
  }
  if (auto it = kv.find("init.family"); it != kv.end()) cfg.init_family = it->second;
  cfg.init_amplitude = to_double(kv, "init.amplitude", cfg.init_amplitude);
  cfg.init_mode = static_cast<int>(to_int(kv, "init.mode", cfg.init_mode));
  cfg.seed = static_cast<std::uint64_t>(to_int(kv, "seed", static_cast<long>(cfg.seed)));
  cfg.record_stride = static_cast<int>(to_int(kv, "record_stride", cfg.record_stride));
  if (auto it = kv.find("monitors"); it != kv.end())
    cfg.monitors = it->second != "off" && it->second != "none" && it->second != "0";
  if (auto it = kv.find("normalize_c"); it != kv.end())
    cfg.normalize_c = it->second == "lemma-10.1" || it->second == "on" || it->second == "1";
  cfg.validate();
  return cfg;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_state(const ReducedMetricState& st, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write state file: " + path);
  const ReducedGrid& g = st.grid();
  out << "krfstate v1 manifold=" << manifold_name(g.manifold)
      << " n_points=" << g.n_points << " L=" << format_double(g.L) << "\n";
  out << "s,u,phi\n";
  for (int i = 0; i < g.n_points; ++i)
    out << format_double(g.s[i]) << ',' << format_double(st.u()[i]) << ','
        << format_double(st.phi()[i]) << "\n";
}

ReducedMetricState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read state file: " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("krfstate v1", 0) != 0)
    throw ConfigError("state file: bad or missing header: " + path);
  Manifold m = Manifold::CP1;
  int n_points = 0;
  double L = 0.0;
  {
    std::istringstream hs(header);
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("manifold=", 0) == 0) {
        std::string v = tok.substr(9);
        if (v == "CP1")
          m = Manifold::CP1;
        else if (v == "CP2")
          m = Manifold::CP2;
        else
          throw ConfigError("state file: unknown manifold " + v);
      } else if (tok.rfind("n_points=", 0) == 0) {
        n_points = std::stoi(tok.substr(9));
      } else if (tok.rfind("L=", 0) == 0) {
        L = std::stod(tok.substr(2));
      }
    }
  }
  if (n_points <= 0) throw ConfigError("state file: missing n_points");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("state file: truncated");
  Field phi;
  phi.reserve(n_points);
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw ConfigError("state file: bad row '" + line + "'");
    phi.push_back(std::stod(c));
  }
  if (static_cast<int>(phi.size()) != n_points)
    throw ConfigError("state file: row count mismatch");
  ReducedMetricState ref = build_reference(m, n_points, L);
  return metric_from_potential(ref, phi);
}

void save_trace_csv(const FlowTrace& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace file: " + path);
  const int n = complex_dim(tr.config.manifold);
  out << "t,c,eps,mu,mu_1,mu_2,R_max,R_min,min_bisec,J,F,nu";
  for (int k = 0; k <= n; ++k) out << ",E_" << k;
  out << ",I,ImJ,harnack_margin,rr2_accum\n";
  for (const auto& s : tr.samples) {
    out << format_double(s.t) << ',' << format_double(s.c) << ','
        << format_double(s.eps) << ',' << format_double(s.mu) << ','
        << format_double(s.mu_1) << ',' << format_double(s.mu_2) << ','
        << format_double(s.R_max) << ',' << format_double(s.R_min) << ','
        << format_double(s.min_bisec) << ',' << format_double(s.ledger.J) << ','
        << format_double(s.ledger.F) << ',' << format_double(s.ledger.nu);
    for (int k = 0; k <= n; ++k)
      out << ',' << format_double(k < static_cast<int>(s.ledger.E_k.size())
                                      ? s.ledger.E_k[k]
                                      : 0.0);
    out << ',' << format_double(s.ledger.I) << ',' << format_double(s.ledger.I_minus_J)
        << ',' << format_double(s.harnack_margin) << ',' << format_double(s.rr2_accum)
        << "\n";
  }
}

std::string summary_json(const FlowTrace& tr) {
  const int n = complex_dim(tr.config.manifold);
  json j;
  j["manifold"] = manifold_name(tr.config.manifold);
  j["t_end"] = tr.samples.back().t;
  j["steps"] = tr.step_times.size() - 1;
  j["positivity_rejections"] = tr.positivity_rejections;
  const auto& last = tr.samples.back();
  j["final_sup_R_minus_r"] = std::max(std::abs(last.R_max - n), std::abs(last.R_min - n));
  j["final_R_max"] = last.R_max;
  j["observed_R_max_bound"] = [&] {
    double m = 0.0;
    for (const auto& s : tr.samples) m = std::max(m, s.R_max);
    return m;
  }();
  j["positive_bisectional"] = tr.positive_bisectional;
  j["rr2_total"] = last.rr2_accum;
  // monotonicity violation counts (slack 1e-8 per step)
  int viol = 0;
  for (size_t i = 1; i < tr.samples.size(); ++i) {
    const auto& a = tr.samples[i - 1].ledger;
    const auto& b = tr.samples[i].ledger;
    if (b.F > a.F + 1e-8) ++viol;
    if (b.nu > a.nu + 1e-8) ++viol;
    if (!a.E_k.empty() && !b.E_k.empty()) {
      if (b.E_k[0] > a.E_k[0] + 1e-8) ++viol;
      if (n >= 1 && b.E_k.size() > 1 && b.E_k[1] > a.E_k[1] + 1e-8) ++viol;
    }
  }
  j["monotonicity_violations"] = viol;
  if (tr.normalized) {
    j["normalization_a"] = tr.a_normalization;
    double cmin = 1e300;
    for (double c : tr.c_adjusted) cmin = std::min(cmin, c);
    j["c_adjusted_min"] = cmin;
  }
  return j.dump(2);
}

std::string manifest_json(const FlowConfig& cfg,
                          const std::map<std::string, std::string>& kv,
                          const std::vector<std::string>& outputs,
                          const std::string& started, const std::string& finished,
                          const std::string& summary) {
  json j;
  j["tool"] = "krf";
  j["version"] = "1.0.0";
  j["started"] = started;
  j["finished"] = finished;
  json cfge;
  for (const auto& [k, v] : kv) cfge[k] = v;
  j["config"] = cfge;
  j["config_resolved"] = {
      {"manifold", manifold_name(cfg.manifold)}, {"n_points", cfg.n_points},
      {"L", cfg.L},           {"dt", cfg.dt},
      {"t_end", cfg.t_end},   {"init.family", cfg.init_family},
      {"init.amplitude", cfg.init_amplitude}, {"init.mode", cfg.init_mode},
      {"seed", cfg.seed},
      {"integrator", cfg.integrator == Integrator::SemiImplicit ? "semi-implicit" : "rk4"},
      {"normalize_c", cfg.normalize_c}, {"monitors", cfg.monitors}};
  j["outputs"] = outputs;
  if (!summary.empty()) j["summary"] = json::parse(summary);
  return j.dump(2);
}

std::string audit_json(const ReducedMetricState& reference,
                       const ReducedMetricState& state) {
  const int n = state.grid().dim();
  FunctionalLedger led = compute_ledger(reference, state);
  json j;
  j["manifold"] = manifold_name(state.grid().manifold);
  j["n_points"] = state.grid().n_points;
  j["L"] = state.grid().L;
  j["volume"] = state.volume();
  j["phi_mean"] = led.phi_mean;
  j["J"] = led.J;
  j["J_k"] = led.J_k;
  j["F"] = led.F;
  j["nu"] = led.nu;
  j["E0_k"] = led.E0_k;
  j["E_k"] = led.E_k;
  j["I"] = led.I;
  j["I_minus_J"] = led.I_minus_J;
  j["flags"]["J_nonnegative"] = led.J >= -1e-12;
  j["flags"]["I_nonnegative"] = led.I >= -1e-12;
  j["flags"]["sandwich"] = led.I_minus_J <= led.I + 1e-10 &&
                           led.I <= (n + 1) * led.I_minus_J + 1e-10;
  j["futaki"] = futaki(state);
  json im = json::array();
  for (int k = 0; k <= n; ++k) im.push_back(im_k(state, k));
  j["Im_k"] = im;
  j["R_max"] = *std::max_element(state.curvature().scalar.begin(),
                                 state.curvature().scalar.end());
  j["R_min"] = *std::min_element(state.curvature().scalar.begin(),
                                 state.curvature().scalar.end());
  j["min_bisectional"] = state.curvature().min_bisectional();
  return j.dump(2);
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<double>& x,
                    const std::vector<std::pair<std::string, std::vector<double>>>& series,
                    bool log_y) {
  const int W = 860, H = 500, ml = 70, mr = 20, mt = 40, mb = 45;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write plot file: " + path);
  auto tf = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const auto& [name, ys] : series)
    for (double v : ys) {
      if (!std::isfinite(tf(v))) continue;
      ymin = std::min(ymin, tf(v));
      ymax = std::max(ymax, tf(v));
    }
  if (ymax <= ymin) ymax = ymin + 1.0;
  if (xmax <= xmin) xmax = xmin + 1.0;
  auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto Y = [&](double v) {
    return H - mb - (tf(v) - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << (log_y ? " (log scale)" : "") << "</text>\n";
  out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='"
      << H - mb << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    double tx = xmin + i * (xmax - xmin) / 4;
    out << "<text x='" << X(tx) << "' y='" << H - mb + 18
        << "' text-anchor='middle' font-size='11'>" << tx << "</text>\n";
    double ty = ymin + i * (ymax - ymin) / 4;
    char lab[32];
    std::snprintf(lab, sizeof lab, "%.3g", log_y ? std::pow(10.0, ty) : ty);
    out << "<text x='" << ml - 6 << "' y='"
        << H - mb - i * double(H - mt - mb) / 4 + 4
        << "' text-anchor='end' font-size='11'>" << lab << "</text>\n";
  }
  int ci = 0;
  for (const auto& [name, ys] : series) {
    out << "<polyline fill='none' stroke='" << colors[ci % 5] << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < x.size() && i < ys.size(); ++i) {
      if (!std::isfinite(tf(ys[i]))) continue;
      out << X(x[i]) << ',' << Y(ys[i]) << ' ';
    }
    out << "'/>\n";
    out << "<text x='" << W - mr - 140 << "' y='" << mt + 16 * ci
        << "' font-size='12' fill='" << colors[ci % 5] << "'>" << name << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

}  // namespace io
}  // namespace krf
