#include "krf/verify.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "krf/curvature_algebra.hpp"
#include "krf/families.hpp"
#include "krf/flow.hpp"
#include "krf/functionals.hpp"
#include "krf/invariants.hpp"
#include "krf/spectrum.hpp"

namespace krf {
namespace verify {

namespace {

struct Collector {
  std::vector<PropertyResult> out;
  std::string suite;
  void add(const std::string& name, double worst, double tol, const std::string& note = "") {
    out.push_back({suite, name, std::abs(worst) <= tol, worst, tol, note});
  }
  void add_flag(const std::string& name, bool pass, double worst, double tol,
                const std::string& note = "") {
    out.push_back({suite, name, pass, worst, tol, note});
  }
};

PointCurvatureTensor random_tensor(int n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PointCurvatureTensor t(n);
  for (size_t i = 0; i < t.raw_size(); ++i) t.raw()[i] = u(rng);
  t.symmetrize();
  return t;
}

RealVector random_unit(int n2, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RealVector v(n2);
  double nrm = 0.0;
  do {
    for (auto& x : v) x = g(rng);
    nrm = std::sqrt(real_dot(v, v));
  } while (nrm < 1e-6);
  for (auto& x : v) x /= nrm;
  return v;
}

// random unit vector orthogonal to both w and Jw
RealVector random_perp_plane(const RealVector& w, std::mt19937_64& rng) {
  const int n2 = static_cast<int>(w.size());
  RealVector jw = apply_J(w);
  for (int attempt = 0; attempt < 64; ++attempt) {
    RealVector v = random_unit(n2, rng);
    const double a = real_dot(v, w), b = real_dot(v, jw);
    for (int i = 0; i < n2; ++i) v[i] -= a * w[i] + b * jw[i];
    const double nrm = std::sqrt(real_dot(v, v));
    if (nrm < 1e-6) continue;
    for (auto& x : v) x /= nrm;
    return v;
  }
  throw NumericalError("random_perp_plane failed");
}

void suite_algebra(Collector& c, std::uint64_t seed) {
  c.suite = "algebra";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ut(-1.0, 1.0), u10(-10.0, 10.0);

  // sigma_k expansion against direct product evaluation
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    RicciSpectrum r(n);
    for (auto& x : r) x = u(rng);
    auto e = sigma_k(r);
    for (int rep = 0; rep < 5; ++rep) {
      const double t = ut(rng);
      double lhs = 0.0, tp = 1.0;
      for (int k = 0; k <= n; ++k) {
        lhs += e[k] * tp;
        tp *= t;
      }
      double rhs = 1.0;
      for (double x : r) rhs *= 1.0 + t * x;
      worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
    }
  }
  c.add("sigma_expansion_vs_product", worst, 1e-12);

  // polynomial identity Eq-type: lhs == (k+1) x^k
  worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = u10(rng), y = u10(rng);
    const int k = 1 + static_cast<int>(rng() % 10);
    const double lhs = poly_identity_lhs(x, y, k);
    const double rhs = (k + 1) * std::pow(x, k);
    const double scale = (k + 1) * std::pow(std::max(std::abs(x), std::abs(y)), k);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + scale));
  }
  c.add("poly_identity", worst, 1e-10);

  // Vandermonde inverse
  worst = 0.0;
  double worst_vi = 0.0;
  for (int n = 1; n <= 6; ++n) {
    auto vi = vandermonde_inverse(n);
    for (int i = 1; i <= n + 1; ++i)
      for (int k = 1; k <= n + 1; ++k)
        worst = std::max(worst, std::abs(vi.f(i, k) - (i == k ? 1.0 : 0.0)));
    // C * V = I with V_{jk} = k^j
    for (int i = 1; i <= n + 1; ++i)
      for (int k = 1; k <= n + 1; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= n + 1; ++j)
          acc += vi.c[i - 1][j - 1] * std::pow(static_cast<double>(k), j);
        worst_vi = std::max(worst_vi, std::abs(acc - (i == k ? 1.0 : 0.0)));
      }
  }
  c.add("vandermonde_f_i_delta", worst, 1e-10);
  c.add("vandermonde_inverse_product", worst_vi, 1e-9);

  // polarization identity (complex side vs real side)
  worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    auto t = random_tensor(n, rng, 1.0);
    RealVector x = random_unit(2 * n, rng);
    RealVector y = random_perp_plane(x, rng);  // y perp x and y perp Jx
    // complex side: R(u, ubar, v, vbar) with u, v the unit (1,0) lifts
    std::vector<std::complex<double>> zu(n), zv(n);
    for (int a = 0; a < n; ++a) {
      zu[a] = {x[a], x[n + a]};
      zv[a] = {y[a], y[n + a]};
    }
    const double lhs = t.bisectional(zu, zv);
    // real side: R(x,y,y,x) + R(x,Jy,Jy,x)
    auto Rr = [&](const RealVector& a, const RealVector& b, const RealVector& cc,
                  const RealVector& d) {
      const double r = 1.0 / std::sqrt(2.0);
      auto lift = [&](const RealVector& w) {
        std::vector<std::complex<double>> z(n);
        for (int q = 0; q < n; ++q) z[q] = std::complex<double>(w[q], w[n + q]) * r;
        return z;
      };
      auto conj = [&](std::vector<std::complex<double>> z) {
        for (auto& e : z) e = std::conj(e);
        return z;
      };
      auto za = lift(a), zb = lift(b), zc = lift(cc), zd = lift(d);
      return t.eval(za, conj(za), zb, conj(zb), zc, conj(zc), zd, conj(zd)).real();
    };
    RealVector jy = apply_J(y);
    const double rhs = Rr(x, y, y, x) + Rr(x, jy, jy, x);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  c.add("polarization_complex_vs_real", worst, 1e-10);

  // constant-bisectional model: K = 1/2 (perpendicular), K = 2 (identical)
  {
    auto t = constant_curvature_model(2, 2.0);
    RealVector w1(4, 0.0), w2(4, 0.0);
    w1[0] = 1.0;
    w2[1] = 1.0;  // e_2: perpendicular complex planes
    const double kp = sectional_from_bisectional(t, w1, w2);
    const double ki = sectional_from_bisectional(t, w1, apply_J(w1));
    c.add("appendix_K_perpendicular", kp - 0.5, 1e-12);
    c.add("appendix_K_identical", ki - 2.0, 1e-12);
    // projection idempotence
    auto pr = t.constant_projection();
    double w = 0.0;
    for (size_t i = 0; i < t.raw_size(); ++i)
      w = std::max(w, std::abs(t.raw()[i] - pr.raw()[i]));
    c.add("constant_model_projection", w, 1e-13);
  }

  // conversion formula vs real-side oracle, random tensors
  worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    auto t = random_tensor(n, rng, 1.0);
    RealVector w1 = random_unit(2 * n, rng);
    RealVector w2 = random_perp_plane(w1, rng);
    const double a = sectional_from_bisectional(t, w1, w2);
    const double b = sectional_real_oracle(t, w1, w2);
    worst = std::max(worst, std::abs(a - b));
    const double ai = sectional_from_bisectional(t, w1, apply_J(w1));
    const double bi = sectional_real_oracle(t, w1, apply_J(w1));
    worst = std::max(worst, std::abs(ai - bi));
  }
  c.add("appendix_conversion_vs_oracle", worst, 1e-10);

  // Corollary bound: certified bisectional <= 1 implies K <= 2
  worst = -1e300;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2;
    const double lam = 0.2 + 0.7 * ut(rng) * ut(rng);
    auto t = constant_curvature_model(n, 2.0 * lam);
    auto noise = random_tensor(n, rng, 1.0);
    double l1 = 0.0;
    for (size_t i = 0; i < noise.raw_size(); ++i) l1 += std::abs(noise.raw()[i]);
    const double eps = std::min(0.5 * lam, 0.5 * (1.0 - lam)) / (l1 + 1.0);
    for (size_t i = 0; i < t.raw_size(); ++i) t.raw()[i] += eps * noise.raw()[i];
    // certified: bisectional within [lam - eps*l1, lam + eps*l1] subset (0, 1)
    RealVector w1 = random_unit(2 * n, rng);
    RealVector w2 = random_perp_plane(w1, rng);
    worst = std::max(worst, sectional_from_bisectional(t, w1, w2) - 2.0);
    worst = std::max(worst, sectional_from_bisectional(t, w1, apply_J(w1)) - 2.0);
  }
  c.add_flag("appendix_K_bound", worst <= 1e-12, worst, 1e-12);
}

void suite_geometry(Collector& c, std::uint64_t seed) {
  c.suite = "geometry";
  std::mt19937_64 rng(seed + 1);
  for (Manifold m : {Manifold::CP1, Manifold::CP2}) {
    const int n = complex_dim(m);
    auto ref = build_reference(m, 512, 12.0);
    c.add(std::string("volume_") + manifold_name(m), ref.volume() - chern_volume(m), 1e-8);
    double worstR = 0.0;
    for (double v : ref.curvature().scalar) worstR = std::max(worstR, std::abs(v - n));
    c.add(std::string("reference_R_") + manifold_name(m), worstR, 1e-8);
    double worstH = 0.0;
    for (double v : ref.h_potential()) worstH = std::max(worstH, std::abs(v));
    c.add(std::string("reference_h_") + manifold_name(m), worstH, 1e-10);

    // perturbed: volume conservation and average scalar curvature
    auto st = random_analytic_state(ref, rng, 3, 0.12);
    c.add(std::string("volume_conservation_") + manifold_name(m),
          st.volume() - chern_volume(m), 1e-8);
    const double avgR = st.integrate(st.curvature().scalar) / st.volume();
    c.add(std::string("average_scalar_") + manifold_name(m), avgR - n, 1e-6);
    // h normalization and ddbar residual (independent 2nd-order oracle)
    Field eh(st.grid().n_points);
    for (int i = 0; i < st.grid().n_points; ++i) eh[i] = std::expm1(st.h_potential()[i]);
    c.add(std::string("h_normalization_") + manifold_name(m), st.integrate(eh), 1e-8);
  }
  // spectrum on the reference
  auto ref = build_reference(Manifold::CP1, 1024, 20.0);
  auto ev = laplacian_spectrum(ref, 3);
  const double expect[3] = {1.0, 3.0, 6.0};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(ev[i] - expect[i]));
  c.add("spectrum_cp1_1_3_6", worst, 1e-3);
  c.add_flag("spectrum_lambda1_geq_1", ev[0] >= 1.0 - 1e-6, ev[0] - 1.0, 1e-6);
}

void suite_functionals(Collector& c, std::uint64_t seed) {
  c.suite = "functionals";
  std::mt19937_64 rng(seed + 2);
  for (Manifold m : {Manifold::CP1, Manifold::CP2}) {
    const int n = complex_dim(m);
    auto ref = build_reference(m, 768, 12.0);
    auto st = random_analytic_state(ref, rng, 2, 0.12);
    const std::string tag = std::string("_") + manifold_name(m);

    double worst = 0.0;
    for (int k = 0; k < n; ++k)
      worst = std::max(worst, std::abs(j_k_energy(ref, st, k) -
                                       j_k_path_oracle(ref, st, k, 64)));
    c.add("jk_closed_vs_path" + tag, worst, 1e-6);
    c.add("j_nminus1_equals_j" + tag, j_k_energy(ref, st, n - 1) - j_energy(ref, st),
          1e-10);

    // zero input -> all functionals zero
    auto z = metric_from_potential(ref, Field(ref.grid().n_points, 0.0));
    auto led = compute_ledger(ref, z);
    double zworst = std::max({std::abs(led.J), std::abs(led.F), std::abs(led.nu),
                              std::abs(led.I), std::abs(led.I_minus_J)});
    for (double v : led.E_k) zworst = std::max(zworst, std::abs(v));
    c.add("zero_input_zeros" + tag, zworst, 1e-10);

    auto dc = k_energy_derivative_check(ref, st);
    c.add("k_energy_derivative" + tag,
          (dc.finite_difference - dc.formula) / (std::abs(dc.formula) + 1e-12), 1e-4);

    // cocycle for E_k and F on random pairs
    double cw = 0.0, fw = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      auto s1 = random_analytic_state(ref, rng, 2, 0.1);
      auto s2 = random_analytic_state(ref, rng, 2, 0.1);
      for (int k = 0; k <= n; ++k) {
        const double lhs = e_k(ref, s1, k) + e_k(s1, s2, k);
        cw = std::max(cw, std::abs(lhs - e_k(ref, s2, k)));
      }
      fw = std::max(fw, std::abs(f_energy(ref, s1) + f_energy(s1, s2) -
                                 f_energy(ref, s2)));
    }
    c.add("cocycle_E_k" + tag, cw, 1e-7);
    c.add("cocycle_F" + tag, fw, 1e-7);

    // I-J sandwich and positivity
    auto [I, IJ] = i_functional(ref, st);
    c.add_flag("sandwich" + tag, IJ <= I + 1e-10 && I <= (n + 1) * IJ + 1e-10,
               std::min(I - IJ, (n + 1) * IJ - I), 1e-10);
    c.add_flag("nu_geq_F" + tag, k_energy(ref, st) >= f_energy(ref, st) - 1e-10,
               k_energy(ref, st) - f_energy(ref, st), 1e-10);

    // dE_k/dt formula vs finite differences along t*phi
    double dw = 0.0;
    Field chi(st.grid().n_points);
    for (int i = 0; i < st.grid().n_points; ++i) chi[i] = st.phi()[i];
    const double dtp = 1e-3;
    for (int k = 0; k <= n; ++k) {
      Field pp(chi.size()), pm(chi.size());
      for (size_t i = 0; i < chi.size(); ++i) {
        pp[i] = (1 + dtp) * chi[i];
        pm[i] = (1 - dtp) * chi[i];
      }
      const double fdv = (e_k(ref, metric_from_potential(ref, pp), k) -
                          e_k(ref, metric_from_potential(ref, pm), k)) /
                         (2 * dtp);
      const double fo = e_k_flow_derivative(st, chi, k);
      dw = std::max(dw, std::abs(fdv - fo) / (std::abs(fo) + 1e-9));
    }
    c.add("dEk_formula_vs_fd" + tag, dw, 1e-4);

    // Euler-Lagrange residual integrates to zero; KE state residual == 0
    double ew = 0.0, kw = 0.0;
    for (int k = 0; k <= n; ++k) {
      auto el = euler_lagrange_residual(st, k);
      ew = std::max(ew, std::abs(st.integrate(el.residual)));
      auto elke = euler_lagrange_residual(ref, k);
      for (double v : elke.residual) kw = std::max(kw, std::abs(v));
    }
    c.add("el_residual_mean_zero" + tag, ew, 1e-8);
    c.add("el_residual_ke" + tag, kw, 1e-6);

    // E_0 vs nu: single proportionality constant by least squares
    double sxy = 0.0, sxx = 0.0, res = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (int trial = 0; trial < 5; ++trial) {
      auto s1 = random_analytic_state(ref, rng, 2, 0.1);
      const double e0 = e_k(ref, s1, 0), nu = k_energy(ref, s1);
      pts.emplace_back(nu, e0);
      sxy += nu * e0;
      sxx += nu * nu;
    }
    const double slope = sxy / sxx;
    for (auto [x, y] : pts) res = std::max(res, std::abs(y - slope * x));
    c.add("E0_proportional_to_nu" + tag, res, 1e-6,
          "constant=" + std::to_string(slope));
  }
}

void suite_invariants(Collector& c, std::uint64_t seed) {
  c.suite = "invariants";
  std::mt19937_64 rng(seed + 3);
  for (Manifold m : {Manifold::CP1, Manifold::CP2}) {
    const int n = complex_dim(m);
    auto ref = build_reference(m, 1024, 14.0);
    const std::string tag = std::string("_") + manifold_name(m);

    double worst = std::abs(futaki(ref));
    for (int k = 0; k <= n; ++k) worst = std::max(worst, std::abs(im_k(ref, k)));
    c.add("ke_vanishing" + tag, worst, 1e-8);

    // metric independence: std over 5 random states
    std::vector<std::vector<double>> vals(n + 1);
    for (int trial = 0; trial < 5; ++trial) {
      auto st = random_analytic_state(ref, rng, 3, 0.1);
      for (int k = 0; k <= n; ++k) vals[k].push_back(im_k(st, k));
    }
    double sworst = 0.0;
    for (int k = 0; k <= n; ++k) {
      double mean = 0.0;
      for (double v : vals[k]) mean += v;
      mean /= vals[k].size();
      double var = 0.0;
      for (double v : vals[k]) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / vals[k].size());
      sworst = std::max(sworst, sd / (1.0 + std::abs(mean)));
    }
    c.add("metric_independence" + tag, sworst, 1e-5);

    auto st = random_analytic_state(ref, rng, 2, 0.1);
    c.add("im0_is_n_futaki" + tag, im_k(st, 0) - n * futaki(st), 1e-8);
    c.add("lemma56_reconstruction" + tag, decomposition_check(st).max_error, 1e-6);

    // shift invariance of I_pq route: moving theta by c leaves Im_k alone
    auto d0 = decomposition_check(st, 0.0);
    auto d1 = decomposition_check(st, 1.3);
    double shw = 0.0;
    for (int k = 0; k <= n; ++k)
      shw = std::max(shw, std::abs(d0.reconstructed[k] - d1.reconstructed[k]));
    c.add("shift_invariance" + tag, shw, 1e-9);

    auto hd = holomorphic_potential(st);
    c.add("theta_dbar_residual" + tag, hd.dbar_residual, 1e-6);
    c.add("theta_ricci_residual" + tag, hd.ricci_residual, 1e-6);
  }
}

void suite_flow(Collector& c, std::uint64_t seed) {
  c.suite = "flow";
  (void)seed;
  // fixed point: phi = 0 stays 0
  {
    FlowConfig cfg;
    cfg.manifold = Manifold::CP1;
    cfg.n_points = 256;
    cfg.init_family = "zero";
    cfg.t_end = 2.0;
    cfg.dt = 0.02;
    cfg.monitors = false;
    auto tr = run_flow(cfg);
    double worst = 0.0;
    for (const auto& row : tr.phi_rows)
      for (double v : row) worst = std::max(worst, std::abs(v));
    c.add("ke_fixed_point_short", worst, 1e-10);
  }
  // short perturbed run: monotone F, nu, E_0, E_1; R_max doubling; Harnack
  {
    FlowConfig cfg;
    cfg.manifold = Manifold::CP1;
    cfg.n_points = 256;
    cfg.init_family = "bump";
    cfg.init_amplitude = 0.06;
    cfg.init_mode = 2;
    cfg.t_end = 3.0;
    cfg.dt = 0.02;
    auto tr = run_flow(cfg);
    double mono = 0.0;
    for (size_t i = 1; i < tr.samples.size(); ++i) {
      const auto& a = tr.samples[i - 1].ledger;
      const auto& b = tr.samples[i].ledger;
      mono = std::max({mono, b.F - a.F, b.nu - a.nu, b.E_k[0] - a.E_k[0],
                       b.E_k[1] - a.E_k[1]});
    }
    c.add("monotone_F_nu_E0_E1", mono, 1e-8);

    double dbl = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
      const double horizon = tr.samples[i].t + 0.5 / tr.samples[i].R_max;
      for (size_t j = i; j < tr.samples.size() && tr.samples[j].t <= horizon; ++j)
        dbl = std::max(dbl, tr.samples[j].R_max - 2.0 * tr.samples[i].R_max);
    }
    c.add_flag("rmax_doubling", dbl <= 1e-9, dbl, 1e-9);

    auto rep = harnack_check(tr, 25, 99);
    c.add_flag("harnack_margins", rep.violations == 0, rep.worst_margin, 1e-8);
    c.add_flag("harnack_trace_quantity", rep.min_trace_quantity > 0.0,
               rep.min_trace_quantity, 0.0);

    for (int k = 0; k <= 1; ++k) {
      auto ei = accumulate_energy_identity(tr, k);
      c.add_flag("energy_identity_k" + std::to_string(k), ei.lhs <= ei.rhs + 1e-6,
                 ei.lhs - ei.rhs, 1e-6);
    }
  }
  // Psi minimization recovers an injected dilation
  {
    auto ref = build_reference(Manifold::CP1, 512, 12.0);
    auto st = dilated_reference(ref.grid(), 0.7);
    auto an = normalize_by_automorphism(st, ref);
    c.add("psi_recovers_dilation", an.beta_star - 0.7, 1e-6);
    c.add("psi_min_zero", an.psi_min, 1e-10);
    c.add("psi_central_residual", an.central_residual, 1e-8);
  }
}

}  // namespace

std::vector<PropertyResult> run_suite(const std::string& selector, std::uint64_t seed) {
  Collector c;
  const bool all = selector == "all";
  if (all || selector == "algebra") suite_algebra(c, seed);
  if (all || selector == "geometry") suite_geometry(c, seed);
  if (all || selector == "functionals") suite_functionals(c, seed);
  if (all || selector == "invariants") suite_invariants(c, seed);
  if (all || selector == "flow") suite_flow(c, seed);
  if (c.out.empty()) throw ConfigError("unknown verify suite: " + selector);
  return c.out;
}

}  // namespace verify
}  // namespace krf
