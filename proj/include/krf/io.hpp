#ifndef KRF_IO_HPP
#define KRF_IO_HPP

#include <map>
#include <string>

#include "krf/flow.hpp"

namespace krf {
namespace io {

/// Flat key = value configuration with # comments. Environment variables
/// with prefix KRF_ override any key (dots and hyphens become underscores,
/// upper-cased: init.family -> KRF_INIT_FAMILY).
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config(const std::string& path);

/// Builds a FlowConfig from the key/value map; throws ConfigError naming the
/// offending key.
FlowConfig flow_config_from_map(const std::map<std::string, std::string>& kv);

/// 17-significant-digit decimal (round-trip exact for binary64).
std::string format_double(double v);

/// State file: versioned header line + CSV of (s, u, phi).
void save_state(const ReducedMetricState& st, const std::string& path);
ReducedMetricState load_state(const std::string& path);

/// Trace CSV with the fixed column set
/// t,c,eps,mu,mu_1,mu_2,R_max,R_min,min_bisec,J,F,nu,E_0..E_n,I,ImJ,
/// harnack_margin,rr2_accum.
void save_trace_csv(const FlowTrace& tr, const std::string& path);

/// Summary statistics of a finished run as JSON.
std::string summary_json(const FlowTrace& tr);

/// Run manifest: config echo, code version, wall times, output paths.
std::string manifest_json(const FlowConfig& cfg,
                          const std::map<std::string, std::string>& kv,
                          const std::vector<std::string>& outputs,
                          const std::string& started, const std::string& finished,
                          const std::string& summary);

/// Ledger + invariants of a single state as JSON (the audit payload).
std::string audit_json(const ReducedMetricState& reference,
                       const ReducedMetricState& state);

/// Minimal standalone SVG line plot of (x, series...) columns.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<double>& x,
                    const std::vector<std::pair<std::string, std::vector<double>>>& series,
                    bool log_y = false);

std::string iso_timestamp();

}  // namespace io
}  // namespace krf

#endif
