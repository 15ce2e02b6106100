#include "krf/invariants.hpp"

#include <cmath>

#include "krf/curvature_algebra.hpp"

namespace krf {

HolomorphicFieldDesc holomorphic_potential(const ReducedMetricState& state) {
  const ReducedGrid& g = state.grid();
  const int n = g.dim(), np = g.n_points;
  HolomorphicFieldDesc d;
  d.manifold = g.manifold;
  d.theta.resize(np);
  d.lap_theta.resize(np);
  const double mean = state.integrate(state.up()) / state.volume();
  for (int i = 0; i < np; ++i) {
    d.theta[i] = state.up()[i] - mean;
    d.lap_theta[i] = n - state.psi_p()[i];
  }
  // residual of i_X omega = sqrt(-1) dbar theta: theta' = u''
  Field t1 = fd::d1(d.theta, g, {0.0, 0.0});
  double r1 = 0.0;
  for (int i = 0; i < np; ++i) r1 = std::max(r1, std::abs(t1[i] - state.upp()[i]));
  d.dbar_residual = r1;
  // residual of sqrt(-1) dbar Delta theta = -i_X Ric: (Delta theta)' = -psi''
  Field t2 = fd::d1(d.lap_theta, g, {0.0, 0.0});
  double r2 = 0.0;
  for (int i = 0; i < np; ++i) r2 = std::max(r2, std::abs(t2[i] + state.psi_pp()[i]));
  d.ricci_residual = r2;
  return d;
}

double futaki(const ReducedMetricState& state) {
  // X(h) = h'(s) = psi' - u' in the stable fields
  const int np = state.grid().n_points;
  Field f(np);
  for (int i = 0; i < np; ++i) f[i] = state.psi_p()[i] - state.up()[i];
  return state.integrate(f);
}

double im_k(const ReducedMetricState& state, int k) {
  const ReducedGrid& g = state.grid();
  const int n = g.dim();
  if (k < 0 || k > n) throw ConfigError("im_k: k must be in 0..n");
  HolomorphicFieldDesc hd = holomorphic_potential(state);

  double acc = (n - k) * state.integrate(hd.theta);
  std::vector<FormPrimitive> parts;
  for (int t = 0; t < k; ++t) parts.push_back(prim_ricci(state));
  for (int t = 0; t < n - k; ++t) parts.push_back(prim_omega(state));
  acc += (k + 1) * integrate_against(g, hd.lap_theta, wedge(g, parts));
  if (k < n) {
    parts.clear();
    for (int t = 0; t < k + 1; ++t) parts.push_back(prim_ricci(state));
    for (int t = 0; t < n - k - 1; ++t) parts.push_back(prim_omega(state));
    acc -= (n - k) * integrate_against(g, hd.theta, wedge(g, parts));
  }
  return acc;
}

double i_pq(const ReducedMetricState& state, double p, double q, double theta_shift) {
  const ReducedGrid& g = state.grid();
  const int n = g.dim(), np = g.n_points;
  HolomorphicFieldDesc hd = holomorphic_potential(state);
  Field ap(np), app(np), f(np);
  for (int i = 0; i < np; ++i) {
    ap[i] = q * state.psi_p()[i] + p * state.up()[i];
    app[i] = q * state.psi_pp()[i] + p * state.upp()[i];
    f[i] = -p * (hd.theta[i] + theta_shift) + q * hd.lap_theta[i];
  }
  FormPrimitive combo{&ap, &app, 0.0, (q + p) * (n + 1.0)};
  std::vector<FormPrimitive> parts(n, combo);
  return integrate_against(g, f, wedge(g, parts));
}

DecompositionCheck decomposition_check(const ReducedMetricState& state,
                                       double theta_shift) {
  const int n = state.grid().dim();
  const int m = n + 1;
  VandermondeInverse vi = vandermonde_inverse(n);
  HolomorphicFieldDesc hd = holomorphic_potential(state);
  Field sh(hd.theta.size());
  for (size_t i = 0; i < sh.size(); ++i) sh[i] = hd.theta[i] + theta_shift;
  const double int_theta = state.integrate(sh);

  std::vector<double> I1(m);
  for (int i = 1; i <= m; ++i) I1[i - 1] = i_pq(state, 1.0, i, theta_shift);

  DecompositionCheck out;
  out.reconstructed.resize(m);
  out.direct.resize(m);
  out.max_error = 0.0;
  for (int k = 1; k <= m; ++k) {
    double binom = 1.0;
    for (int t = 1; t <= k; ++t) binom = binom * (m - t + 1) / t;
    double sum = 0.0;
    for (int i = 1; i <= m; ++i) sum += vi.c[i - 1][k - 1] * I1[i - 1];
    const double rec = (n - k + 1 + vi.upsilon[k - 1]) * int_theta + (m / binom) * sum;
    const double dir = im_k(state, k - 1);
    out.reconstructed[k - 1] = rec;
    out.direct[k - 1] = dir;
    out.max_error = std::max(out.max_error, std::abs(rec - dir));
  }
  return out;
}

}  // namespace krf
