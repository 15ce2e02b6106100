#ifndef KRF_FLOW_HPP
#define KRF_FLOW_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "krf/functionals.hpp"
#include "krf/geometry.hpp"

namespace krf {

enum class Integrator { ExplicitRK4, SemiImplicit };

struct FlowConfig {
  Manifold manifold = Manifold::CP1;
  int n_points = 512;
  double L = 12.0;
  double dt = 0.01;
  Integrator integrator = Integrator::SemiImplicit;
  double t_end = 10.0;
  std::string init_family = "bump";  // zero | bump | sech | dilated
  double init_amplitude = 0.0;
  int init_mode = 2;
  std::uint64_t seed = 1;
  bool monitors = true;       // record functional ledgers and curvature columns
  bool normalize_c = false;   // apply the Lemma-10.1 normalization afterwards
  int record_stride = 1;

  void validate() const;  // throws ConfigError naming the offending key
};

/// Initial potential samples for the configured family.
Field initial_potential(const FlowConfig& cfg, const ReducedGrid& g);

/// One recorded trace row.
struct FlowSample {
  double t = 0.0;
  double c = 0.0;    // (1/V) int phidot w^n (raw, carries the e^t gauge drift)
  double eps = 0.0;  // (1/V) int |grad phidot|^2 w^n
  double mu = 0.0;   // int (phidot - c)^2 w^n
  double mu_1 = 0.0; // int |D (phidot - c)|^2 w^n
  double mu_2 = 0.0; // int |D^2 (phidot - c)|^2 w^n
  double R_max = 0.0, R_min = 0.0;
  double min_bisec = 0.0;
  double harnack_margin = 0.0;  // min over grid of the trace differential quantity
  double rr2_accum = 0.0;       // trapezoid of (1/V) int (R-r)^2 w^n up to t
  double sup_phidot = 0.0;
  FunctionalLedger ledger;            // filled when monitors are on
  std::vector<double> ei_rate;        // (k+1)/V int (R-r) Ric^k w^{n-k}, k = 0..n
};

struct FlowTrace {
  FlowConfig config;
  std::vector<FlowSample> samples;

  // dense per-step columns (stride 1 regardless of record_stride)
  std::vector<double> step_times;
  std::vector<double> c_raw, eps_raw, mu_raw;
  std::vector<std::vector<double>> ei_rate_raw;  // [k][step]
  std::vector<double> rr2_rate_raw;              // (1/V) int (R-r)^2 w^n

  // per-sample fields for Harnack / dE_k checks
  std::vector<Field> phi_rows;   // de-drifted potential chi (gauge mode removed)
  std::vector<double> gauge_m;   // m(t): phi = chi + m
  std::vector<Field> R_rows;
  std::vector<Field> upp_rows;
  std::vector<Field> phidot_rows;

  bool positive_bisectional = true;  // flag stays true iff min_bisec > 0 throughout
  int positivity_rejections = 0;

  // filled by normalize_initial_c
  bool normalized = false;
  double a_normalization = 0.0;
  std::vector<double> c_adjusted;     // per step

  const FlowSample& at_time(double t) const;
};

/// Advance one step (the public single-step operation; run_flow uses the
/// same kernel with the gauge split).
ReducedMetricState flow_step(const ReducedMetricState& state, double dt,
                             Integrator integrator);

FlowTrace run_flow(const FlowConfig& cfg);

/// Theorem-4.10 accumulated energy identity for index k:
/// lhs = int_0^T (k+1)/V int (R-r) Ric^k w^{n-k} dt <= E_k(0) - E_k(T).
struct EnergyIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<double> window_start;   // [T, T+1] tail slices of the k-rate
  std::vector<double> window_value;
};
EnergyIdentity accumulate_energy_identity(const FlowTrace& trace, int k);

/// Lemma-10.1 normalization: computes the additive constant a on phi(0)
/// (equivalently c -> c + a e^t) so that c(0) = int_0^inf eps e^-t dt, and
/// the adjusted column c_adj(t) = int_t^inf eps(tau) e^{-(tau-t)} dtau.
/// Returns a; fills trace.c_adjusted. The affine-transformation consistency
/// |c_raw + a e^t - c_adj| is reported over an early window.
struct NormalizationResult {
  double a = 0.0;
  double c0_target = 0.0;
  double affine_consistency = 0.0;  // max early-window deviation
  double tail_rate = 0.0;           // fitted eps decay rate used for the tail
};
NormalizationResult normalize_initial_c(FlowTrace& trace);

/// Log-linear least-squares decay rates over [t_lo, t_hi].
struct DecayRates {
  double alpha_mu = 0.0;
  double alpha_c = 0.0;
  double alpha_mu_1 = 0.0;
  double alpha_mu_2 = 0.0;
};
DecayRates fit_decay_rate(const FlowTrace& trace, double t_lo, double t_hi);

/// Harnack inequality check over random space-time pairs with a DP upper
/// bound for Delta, plus the pointwise trace differential quantity.
struct HarnackReport {
  double worst_margin = 0.0;       // min of rhs - lhs over pairs
  int violations = 0;              // margins < -1e-8
  double min_trace_quantity = 0.0; // over all grid points with t > t_floor
  int pairs_checked = 0;
};
HarnackReport harnack_check(const FlowTrace& trace, int n_pairs,
                            std::uint64_t seed = 12345, double t_floor = 0.05);

/// Automorphism normalization: minimizes Psi(sigma) = (I-J)(omega_phi,
/// sigma^* omega_1) over the dilation subgroup z -> lambda z.
struct AutomorphismNormalization {
  double lambda_star = 1.0;   // minimizing dilation
  double beta_star = 0.0;     // log|lambda|^2 (s-translation)
  double psi_min = 0.0;
  double central_residual = 0.0;  // (1/V) int (phi - rho) theta w_rho^n
  double dpsi_at_min = 0.0;
  std::optional<ReducedMetricState> normalized_reference;  // sigma^* omega_1
};
AutomorphismNormalization normalize_by_automorphism(const ReducedMetricState& state,
                                                    const ReducedMetricState& reference_ke);

/// Translated reference sigma_beta^* omega_1 (s -> s + beta) as an analytic state.
ReducedMetricState dilated_reference(const ReducedGrid& g, double beta);

}  // namespace krf

#endif
