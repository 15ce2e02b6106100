#ifndef KRF_FUNCTIONALS_HPP
#define KRF_FUNCTIONALS_HPP

#include <string>

#include "krf/geometry.hpp"

namespace krf {

/// Values of the energy functionals of one state relative to a base metric.
struct FunctionalLedger {
  std::string reference_id;
  double phi_mean = 0.0;       // shift bookkeeping (functionals except F see it)
  double J = 0.0;
  std::vector<double> J_k;     // k = 0..n-1 (J_n := 0 by convention)
  double F = 0.0;
  double nu = 0.0;             // K-energy
  std::vector<double> E0_k;    // k = 0..n
  std::vector<double> E_k;     // E_k = E0_k - J_k
  double I = 0.0;
  double I_minus_J = 0.0;
};

// All functionals take the base metric omega (usually the reference) and the
// state omega_phi; both are states over the same grid relative to the same
// canonical reference, so the relative potential is chi = state.phi - base.phi.

double j_energy(const ReducedMetricState& base, const ReducedMetricState& state);

/// (I, I - J).
std::pair<double, double> i_functional(const ReducedMetricState& base,
                                       const ReducedMetricState& state);

/// Closed-form J_k (explicit coefficient triple sum).
double j_k_energy(const ReducedMetricState& base, const ReducedMetricState& state, int k);

/// Path-integral oracle for J_k along the linear path t*chi, composite
/// Simpson in t with one Richardson refinement (n_steps and n_steps/2).
double j_k_path_oracle(const ReducedMetricState& base, const ReducedMetricState& state,
                       int k, int n_steps = 64);

double f_energy(const ReducedMetricState& base, const ReducedMetricState& state);

/// Mabuchi K-energy via the explicit formula (log term, h term, gradient sum).
double k_energy(const ReducedMetricState& base, const ReducedMetricState& state);

/// Companion check: centred finite difference of nu along the path t*chi at
/// t = 1 versus the defining derivative -(1/V) int phidot (R - r) w^n.
struct DerivativeCheck {
  double finite_difference;
  double formula;
};
DerivativeCheck k_energy_derivative_check(const ReducedMetricState& base,
                                          const ReducedMetricState& state,
                                          double dt = 1e-3);

double e_k0(const ReducedMetricState& base, const ReducedMetricState& state, int k);
double e_k(const ReducedMetricState& base, const ReducedMetricState& state, int k);

/// dE_k/dt of Theorem-type flow formula for an arbitrary path direction
/// phidot at the state (base-independent).
double e_k_flow_derivative(const ReducedMetricState& state, const Field& phidot, int k);

/// Pointwise residual (k+1) Delta sigma_k - (n-k) sigma_{k+1} - c_k with the
/// constant fixed by the integral identity. Also reports c_k.
struct EulerLagrangeResidual {
  Field residual;
  double c_k;
  double c_k_topological;  // paper's -(n-k) c1^{k+1} [w]^{n-k-1}([M]) for comparison
};
EulerLagrangeResidual euler_lagrange_residual(const ReducedMetricState& state, int k);

FunctionalLedger compute_ledger(const ReducedMetricState& base,
                                const ReducedMetricState& state);

/// sigma_k as sampled fields of the state (k = 0..n).
std::vector<Field> sigma_fields(const ReducedMetricState& state);

}  // namespace krf

#endif
