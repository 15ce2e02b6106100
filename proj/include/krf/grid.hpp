#ifndef KRF_GRID_HPP
#define KRF_GRID_HPP

#include <cmath>

#include "krf/common.hpp"

namespace krf {

/// Uniform grid in the log-radial coordinate s = log|z|^2 on [-L, L].
///
/// All reduced integrals carry the convention in which the total volume
/// of [omega] = c1 equals the Chern number (2 on CP1, 9 on CP2); the
/// angular (2 pi)^n factor is absorbed once and for all.
struct ReducedGrid {
  Manifold manifold = Manifold::CP1;
  int n_points = 0;
  double L = 0.0;
  double h = 0.0;
  Field s;

  static ReducedGrid make(Manifold m, int n_points, double L) {
    if (n_points < 64)
      throw ConfigError("n_points must be >= 64, got " + std::to_string(n_points));
    if (L < 10.0)
      throw ConfigError("truncation half-width L must be >= 10, got " + std::to_string(L));
    ReducedGrid g;
    g.manifold = m;
    g.n_points = n_points;
    g.L = L;
    g.h = 2.0 * L / (n_points - 1);
    g.s.resize(n_points);
    for (int i = 0; i < n_points; ++i) g.s[i] = -L + i * g.h;
    g.s.back() = L;
    return g;
  }

  int dim() const { return complex_dim(manifold); }

  bool same_as(const ReducedGrid& o) const {
    return manifold == o.manifold && n_points == o.n_points &&
           std::abs(L - o.L) < 1e-14 * (1.0 + std::abs(L));
  }
};

inline void require_same_grid(const ReducedGrid& a, const ReducedGrid& b) {
  if (!a.same_as(b)) throw GridMismatchError("operands live on different reduced grids");
}

}  // namespace krf

#endif
