#include "krf/families.hpp"

#include <cmath>

namespace krf {

namespace {
void add_sech(DerivBundle& b, const ReducedGrid& g, double a, double c,
              double shift = 0.0) {
  const int np = g.n_points;
  for (int i = 0; i < np; ++i) {
    const double s = g.s[i] + shift - c;
    const double se = 1.0 / std::cosh(s), t = std::tanh(s);
    b.phi[i] += a * se;
    b.d1[i] += -a * se * t;
    b.d2[i] += a * se * (t * t - se * se);
    b.d3[i] += -a * t * se * (1.0 - 6.0 * se * se);
    b.d4[i] += a * se * (1.0 - 20.0 * se * se + 24.0 * se * se * se * se);
  }
}

DerivBundle zero_bundle(const ReducedGrid& g) {
  DerivBundle b;
  b.phi.assign(g.n_points, 0.0);
  b.d1.assign(g.n_points, 0.0);
  b.d2.assign(g.n_points, 0.0);
  b.d3.assign(g.n_points, 0.0);
  b.d4.assign(g.n_points, 0.0);
  return b;
}
}  // namespace

DerivBundle sech_bundle(const ReducedGrid& g,
                        std::span<const std::pair<double, double>> bumps) {
  DerivBundle b = zero_bundle(g);
  for (const auto& [a, c] : bumps) add_sech(b, g, a, c);
  return b;
}

ReducedMetricState random_analytic_state(const ReducedMetricState& reference,
                                         std::mt19937_64& rng, int n_bumps,
                                         double amplitude) {
  const ReducedGrid& g = reference.grid();
  std::uniform_real_distribution<double> amp(-amplitude, amplitude), ctr(-1.5, 1.5);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<std::pair<double, double>> bumps;
    for (int i = 0; i < n_bumps; ++i) bumps.emplace_back(amp(rng), ctr(rng));
    try {
      return metric_from_bundle(g, sech_bundle(g, bumps));
    } catch (const PositivityError&) {
      continue;
    }
  }
  throw NumericalError("random_analytic_state: could not draw a positive state");
}

DerivBundle translated_state_bundle(const ReducedGrid& g,
                                    std::span<const std::pair<double, double>> bumps,
                                    double t) {
  DerivBundle b = zero_bundle(g);
  const double a = g.dim() + 1;
  auto l1p = [](double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  };
  auto logistic = [](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };
  for (int i = 0; i < g.n_points; ++i) {
    const double s = g.s[i], st = s + t;
    const double q = logistic(s), qt = logistic(st);
    const double w = q * (1 - q), wt = qt * (1 - qt);
    b.phi[i] = a * (l1p(st) - l1p(s));
    b.d1[i] = a * (qt - q);
    b.d2[i] = a * (wt - w);
    b.d3[i] = a * (wt * (1 - 2 * qt) - w * (1 - 2 * q));
    b.d4[i] = a * (wt * (1 - 6 * qt + 6 * qt * qt) - w * (1 - 6 * q + 6 * q * q));
  }
  for (const auto& [amp, c] : bumps) add_sech(b, g, amp, c, t);
  return b;
}

}  // namespace krf
