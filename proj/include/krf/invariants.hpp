#ifndef KRF_INVARIANTS_HPP
#define KRF_INVARIANTS_HPP

#include <string>

#include "krf/geometry.hpp"

namespace krf {

/// Potential data of the symmetry-compatible dilation field
/// X = z d/dz (CP1), X = sum z_i d/dz_i (CP2) with respect to a state.
struct HolomorphicFieldDesc {
  Manifold manifold;
  std::string field_tag = "dilation";
  Field theta;           // theta_X = u' - mean, mean-zero against omega_phi^n
  Field lap_theta;       // Delta theta = n - psi'
  double dbar_residual;  // max |d/ds theta - u''| (i_X omega = sqrt(-1) dbar theta)
  double ricci_residual; // max |d/ds (Delta theta) + psi''| (i_X Ric identity)
};

/// The dilation field is the only holomorphic field preserved by the ansatz.
HolomorphicFieldDesc holomorphic_potential(const ReducedMetricState& state);

/// Futaki invariant f_M(omega, X) = int X(h_omega) omega^n for the dilation field.
double futaki(const ReducedMetricState& state);

/// The holomorphic invariants Im_k(X, omega), k = 0..n.
double im_k(const ReducedMetricState& state, int k);

/// I_pq = int (-p theta + q Delta theta) (q Ric + p omega)^n; theta_shift
/// adds a constant to theta (the invariants must not see it; the
/// reconstruction's upsilon term is exercised by a nonzero shift).
double i_pq(const ReducedMetricState& state, double p, double q,
            double theta_shift = 0.0);

/// Reconstructs every Im_{k-1} from {I_{1,i}} via the Vandermonde inverse
/// (including the upsilon_k term) and compares with the direct values.
struct DecompositionCheck {
  std::vector<double> reconstructed;  // Im_0 .. Im_n
  std::vector<double> direct;
  double max_error;
};
DecompositionCheck decomposition_check(const ReducedMetricState& state,
                                       double theta_shift = 0.37);

}  // namespace krf

#endif
