#ifndef KRF_FD_HPP
#define KRF_FD_HPP

#include "krf/grid.hpp"

namespace krf {
namespace fd {

/// Asymptotic slopes of a sampled field: tails are modelled as
/// slope*s + A + B e^{-|s|}, the generic behaviour of every field of the
/// compactified ansatz. A and B are fitted on the outermost two samples.
struct TailSlopes {
  double left = 0.0;
  double right = 0.0;
};

/// Extend y by `ng` ghost samples on each side using the tail model.
/// Returns a vector of length n + 2*ng (ghosts | samples | ghosts).
Field extend(const Field& y, const ReducedGrid& g, TailSlopes slopes, int ng);

// Fourth-order centred differences with tail-model ghost closure.
Field d1(const Field& y, const ReducedGrid& g, TailSlopes slopes = {});
Field d2(const Field& y, const ReducedGrid& g, TailSlopes slopes = {});
Field d3(const Field& y, const ReducedGrid& g, TailSlopes slopes = {});
Field d4(const Field& y, const ReducedGrid& g, TailSlopes slopes = {});

/// Second-order variants, used as the independent discretization in
/// residual oracles.
Field d1_order2(const Field& y, const ReducedGrid& g, TailSlopes slopes = {});
Field d2_order2(const Field& y, const ReducedGrid& g, TailSlopes slopes = {});

/// Endpoint-corrected (Gregory, order 6) trapezoid rule on the uniform grid.
double quad(const Field& y, double h);

/// Dense-banded representation of a linear operator with bandwidth kl=ku=2,
/// stored in LAPACK general-band layout ready for dgbsv (extra kl rows on top).
struct Banded {
  int n = 0;
  int kl = 2, ku = 2;
  Field ab;  // column-major, ldab = 2*kl + ku + 1

  int ldab() const { return 2 * kl + ku + 1; }
  double& at(int i, int j);  // entry (i,j), |i-j| <= band
  void zero(int n_);
};

/// Banded matrices of the d1 / d2 operators including the ghost closure
/// (the closure is linear in the outermost two samples, so the bandwidth
/// is preserved).
Banded d1_matrix(const ReducedGrid& g, TailSlopes slopes = {});
Banded d2_matrix(const ReducedGrid& g, TailSlopes slopes = {});

/// Solve (in place) the banded system A x = b with partial pivoting.
void solve_banded(const Banded& a, Field& b);

}  // namespace fd
}  // namespace krf

#endif
