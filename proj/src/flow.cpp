#include "krf/flow.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace krf {

void FlowConfig::validate() const {
  if (n_points < 64) throw ConfigError("n_points: must be >= 64");
  if (L < 10.0) throw ConfigError("L: must be >= 10");
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (!(t_end > 0.0)) throw ConfigError("t_end: must be positive");
  if (record_stride < 1) throw ConfigError("record_stride: must be >= 1");
  if (init_family != "zero" && init_family != "bump" && init_family != "sech" &&
      init_family != "dilated")
    throw ConfigError("init.family: unknown family '" + init_family + "'");
  if (init_mode < 0 || init_mode > 8) throw ConfigError("init.mode: must be in 0..8");
}

Field initial_potential(const FlowConfig& cfg, const ReducedGrid& g) {
  const int np = g.n_points;
  Field phi(np, 0.0);
  if (cfg.init_family == "zero" || cfg.init_amplitude == 0.0) return phi;
  if (cfg.init_family == "bump") {
    // mean-zero-ish Legendre bump in x = tanh(s/2); (1-x^2) gives e^{-2|s|} tails
    for (int i = 0; i < np; ++i) {
      const double x = std::tanh(0.5 * g.s[i]);
      // P_m(x) by recurrence
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= cfg.init_mode; ++m) {
        const double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      const double pm = cfg.init_mode == 0 ? p0 : p1;
      phi[i] = cfg.init_amplitude * pm * (1.0 - x * x);
    }
  } else if (cfg.init_family == "sech") {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ctr(-1.5, 1.5), amp(-1.0, 1.0);
    const int nb = std::max(1, cfg.init_mode);
    for (int b = 0; b < nb; ++b) {
      const double a = cfg.init_amplitude * amp(rng), c = ctr(rng);
      for (int i = 0; i < np; ++i) phi[i] += a / std::cosh(g.s[i] - c);
    }
  } else if (cfg.init_family == "dilated") {
    // phi of the beta-translated reference, beta = amplitude
    const double a = g.dim() + 1;
    for (int i = 0; i < np; ++i) {
      const double s = g.s[i], sb = s + cfg.init_amplitude;
      auto l1p = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
      phi[i] = a * (l1p(sb) - l1p(s));
    }
  }
  return phi;
}

namespace {

struct StepperContext {
  ReducedGrid g;
  ReferenceData ref;
  fd::Banded d1m, d2m;
  Field ell_w;    // weights of the fixed reference mean functional
  double Vref = 0.0;

  explicit StepperContext(const ReducedGrid& grid)
      : g(grid), ref(ReferenceData::make(grid)), d1m(fd::d1_matrix(grid)),
        d2m(fd::d2_matrix(grid)) {
    const int np = g.n_points, n = g.dim();
    Field vref(np);
    for (int i = 0; i < np; ++i) vref[i] = n * ref.upp[i] * std::pow(ref.up[i], n - 1);
    // quadrature weights incl. Gregory + tail corrections as a linear form
    ell_w.assign(np, 0.0);
    Field e(np, 0.0);
    // trapezoid+gregory weights applied to f*vref: linear in f
    for (int i = 0; i < np; ++i) {
      double w = (i == 0 || i == np - 1) ? 0.5 : 1.0;
      ell_w[i] = w * vref[i] * g.h;
    }
    static const double kG[7] = {-23681.0 / 120960.0, 55688.0 / 120960.0,
                                 -66109.0 / 120960.0, 57024.0 / 120960.0,
                                 -31523.0 / 120960.0, 9976.0 / 120960.0,
                                 -1375.0 / 120960.0};
    for (int i = 0; i < 7 && i < np; ++i) {
      ell_w[i] += kG[i] * vref[i] * g.h;
      ell_w[np - 1 - i] += kG[i] * vref[np - 1 - i] * g.h;
    }
    const double cap = chern_volume(g.manifold);
    ell_w[np - 1] += cap - std::pow(ref.up[np - 1], n);
    ell_w[0] += std::pow(ref.up[0], n);
    Vref = 0.0;
    for (double w : ell_w) Vref += w;
    for (double& w : ell_w) w /= Vref;
  }

  double ell(const Field& f) const {
    double acc = 0.0;
    for (size_t i = 0; i < f.size(); ++i) acc += ell_w[i] * f[i];
    return acc;
  }

  // G(chi) = log(w_chi^n / w^n) + chi; fills up/upp as side products
  Field rhs(const Field& chi, Field& up, Field& upp) const {
    const int np = g.n_points, n = g.dim();
    Field p1 = fd::d1(chi, g), p2 = fd::d2(chi, g), out(np);
    up.resize(np);
    upp.resize(np);
    for (int i = 0; i < np; ++i) {
      up[i] = ref.up[i] + p1[i];
      upp[i] = ref.upp[i] + p2[i];
      if (!(upp[i] > 0.0) || (n >= 2 && !(up[i] > 0.0)))
        throw PositivityError("flow left the Kaehler cone at index " + std::to_string(i), i);
      out[i] = std::log1p(p2[i] / ref.upp[i]) +
               (n - 1) * std::log1p(p1[i] / ref.up[i]) + chi[i];
    }
    return out;
  }

  Field rhs_projected(const Field& chi, Field& up, Field& upp) const {
    Field out = rhs(chi, up, upp);
    const double m = ell(out);
    for (double& v : out) v -= m;
    return out;
  }

  // banded (I - gamma dt J), J = diag(1/upp) D2 + (n-1) diag(1/up) D1 + I
  fd::Banded implicit_matrix(const Field& up, const Field& upp, double gdt) const {
    const int np = g.n_points, n = g.dim();
    auto band = [](const fd::Banded& m, int i, int j) {
      return m.ab[static_cast<size_t>(j) * m.ldab() + (m.kl + m.ku + i - j)];
    };
    fd::Banded M;
    M.zero(np);
    for (int j = 0; j < np; ++j) {
      for (int i = std::max(0, j - 2); i <= std::min(np - 1, j + 2); ++i) {
        double Jij = band(d2m, i, j) / upp[i];
        if (n >= 2) Jij += (n - 1) * band(d1m, i, j) / up[i];
        if (i == j) Jij += 1.0;
        M.at(i, j) = (i == j ? 1.0 : 0.0) - gdt * Jij;
      }
    }
    return M;
  }
};

struct BandedFactor {
  fd::Banded lu;
  std::vector<lapack_int> ipiv;
  void factor(const fd::Banded& m) {
    lu = m;
    ipiv.resize(m.n);
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, m.n, m.n, m.kl, m.ku,
                                     lu.ab.data(), lu.ldab(), ipiv.data());
    if (info != 0)
      throw NumericalError("flow implicit factorization failed, info=" + std::to_string(info));
  }
  void solve(Field& b) const {
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', lu.n, lu.kl, lu.ku, 1,
                                     lu.ab.data(), lu.ldab(), ipiv.data(), b.data(), lu.n);
    if (info != 0)
      throw NumericalError("flow implicit solve failed, info=" + std::to_string(info));
  }
};

// one ROS2 step of chi' = Gproj(chi); returns false on positivity rejection
bool step_ros2(const StepperContext& ctx, Field& chi, double dt) {
  static const double gamma = 1.0 + 1.0 / std::sqrt(2.0);
  const int np = ctx.g.n_points;
  Field up, upp;
  Field F1;
  try {
    F1 = ctx.rhs_projected(chi, up, upp);
  } catch (const PositivityError&) {
    return false;
  }
  BandedFactor fac;
  fac.factor(ctx.implicit_matrix(up, upp, gamma * dt));
  Field k1 = F1;
  fac.solve(k1);
  Field trial(np);
  for (int i = 0; i < np; ++i) trial[i] = chi[i] + dt * k1[i];
  Field F2;
  try {
    F2 = ctx.rhs_projected(trial, up, upp);
  } catch (const PositivityError&) {
    return false;
  }
  Field k2(np);
  for (int i = 0; i < np; ++i) k2[i] = F2[i] - 2.0 * k1[i];
  fac.solve(k2);
  Field next(np);
  for (int i = 0; i < np; ++i) next[i] = chi[i] + dt * (1.5 * k1[i] + 0.5 * k2[i]);
  try {
    Field u1, u2;
    ctx.rhs(next, u1, u2);  // positivity probe
  } catch (const PositivityError&) {
    return false;
  }
  chi = std::move(next);
  return true;
}

bool step_rk4(const StepperContext& ctx, Field& chi, double dt) {
  const int np = ctx.g.n_points;
  Field up, upp;
  auto f = [&](const Field& y) { return ctx.rhs_projected(y, up, upp); };
  try {
    Field k1 = f(chi);
    Field t2(np);
    for (int i = 0; i < np; ++i) t2[i] = chi[i] + 0.5 * dt * k1[i];
    Field k2 = f(t2);
    for (int i = 0; i < np; ++i) t2[i] = chi[i] + 0.5 * dt * k2[i];
    Field k3 = f(t2);
    for (int i = 0; i < np; ++i) t2[i] = chi[i] + dt * k3[i];
    Field k4 = f(t2);
    Field next(np);
    for (int i = 0; i < np; ++i)
      next[i] = chi[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Field u1, u2;
    ctx.rhs(next, u1, u2);
    chi = std::move(next);
    return true;
  } catch (const PositivityError&) {
    return false;
  }
}

// CFL-limited step for the explicit path
double explicit_dt_cap(const StepperContext& ctx, const Field& chi) {
  Field up, upp;
  Field dummy = ctx.rhs(chi, up, upp);
  double m = 1e300;
  for (double v : upp) m = std::min(m, v);
  return 0.4 * ctx.g.h * ctx.g.h * m;
}

}  // namespace

ReducedMetricState flow_step(const ReducedMetricState& state, double dt,
                             Integrator integrator) {
  StepperContext ctx(state.grid());
  double m = ctx.ell(state.phi());
  Field chi(state.grid().n_points);
  for (int i = 0; i < state.grid().n_points; ++i) chi[i] = state.phi()[i] - m;

  Field up, upp;
  const double q0 = ctx.ell(ctx.rhs(chi, up, upp));

  bool ok = integrator == Integrator::SemiImplicit
                ? step_ros2(ctx, chi, dt)
                : step_rk4(ctx, chi, std::min(dt, explicit_dt_cap(ctx, chi)));
  if (!ok) throw PositivityError("flow_step: positivity rejection at this dt", -1);

  const double q1 = ctx.ell(ctx.rhs(chi, up, upp));
  m = std::exp(dt) * m + 0.5 * dt * (std::exp(dt) * q0 + q1);
  Field phi(chi.size());
  for (size_t i = 0; i < chi.size(); ++i) phi[i] = chi[i] + m;
  ReducedMetricState ref = build_reference(state.grid().manifold,
                                           state.grid().n_points, state.grid().L);
  return metric_from_potential(ref, phi);
}

FlowTrace run_flow(const FlowConfig& cfg) {
  cfg.validate();
  FlowTrace tr;
  tr.config = cfg;
  const ReducedGrid g = ReducedGrid::make(cfg.manifold, cfg.n_points, cfg.L);
  const int n = g.dim(), np = g.n_points;
  const double V = chern_volume(cfg.manifold);
  StepperContext ctx(g);
  ReducedMetricState refstate = build_reference(cfg.manifold, cfg.n_points, cfg.L);

  Field phi0 = initial_potential(cfg, g);
  double m = ctx.ell(phi0);
  Field chi(np);
  for (int i = 0; i < np; ++i) chi[i] = phi0[i] - m;

  tr.ei_rate_raw.assign(n + 1, {});

  const int n_steps = static_cast<int>(std::lround(cfg.t_end / cfg.dt));
  double t = 0.0;
  double rr2 = 0.0;
  double prev_rr2_rate = 0.0;

  auto record = [&](int step_idx) {
    // Geometry is built from the gauge-split chi (the constant m is invisible
    // to the metric; adding it back would cost fd precision at the poles).
    ReducedMetricState st = metric_from_potential(refstate, chi);
    Field up_l, upp_l;
    Field G = ctx.rhs(chi, up_l, upp_l);
    Field phidot(np);
    for (int i = 0; i < np; ++i) phidot[i] = G[i] + m;

    const double c = st.integrate(phidot) / V;
    Field gn = st.grad_norm_sq(phidot);
    const double eps = st.integrate(gn) / V;
    Field dev(np), devsq(np);
    for (int i = 0; i < np; ++i) {
      dev[i] = phidot[i] - c;
      devsq[i] = dev[i] * dev[i];
    }
    const double mu = st.integrate(devsq);
    const double mu1 = st.integrate(gn) /* == eps*V */;

    // |D^2 f|^2 = (f''/u'')^2 + (n-1)(f'/u')^2 + (f'' - f' u'''/u'')^2/u''^2
    Field f1 = fd::d1(dev, g), f2 = fd::d2(dev, g), d2f(np);
    for (int i = 0; i < np; ++i) {
      const double h11 = f2[i] / st.upp()[i];
      const double htan = n >= 2 ? f1[i] / st.up()[i] : 0.0;
      // u'''/u'' = phim: recover from psi fields: phim = n - psi' - (n-1) ell
      const double ell = st.upp()[i] / st.up()[i];
      const double phim = n - st.psi_p()[i] - (n - 1) * ell;
      const double h20 = (f2[i] - f1[i] * phim) / st.upp()[i];
      d2f[i] = h11 * h11 + (n - 1) * htan * htan + h20 * h20;
    }
    const double mu2 = st.integrate(d2f);

    // per-step rates
    const auto& R = st.curvature().scalar;
    Field rr(np);
    for (int i = 0; i < np; ++i) rr[i] = (R[i] - n) * (R[i] - n);
    const double rr2_rate = st.integrate(rr) / V;

    std::vector<double> ei(n + 1);
    for (int k = 0; k <= n; ++k) {
      std::vector<FormPrimitive> parts;
      for (int q = 0; q < k; ++q) parts.push_back(prim_ricci(st));
      for (int q = 0; q < n - k; ++q) parts.push_back(prim_omega(st));
      Field f(np);
      for (int i = 0; i < np; ++i) f[i] = R[i] - n;
      ei[k] = (k + 1) / V * integrate_against(g, f, wedge(g, parts));
    }

    if (step_idx > 0) {
      const double half = 0.5 * cfg.dt;
      rr2 += half * (prev_rr2_rate + rr2_rate);
    }
    prev_rr2_rate = rr2_rate;
    tr.step_times.push_back(t);
    tr.c_raw.push_back(c);
    tr.eps_raw.push_back(eps);
    tr.mu_raw.push_back(mu);
    tr.rr2_rate_raw.push_back(rr2_rate);
    for (int k = 0; k <= n; ++k) tr.ei_rate_raw[k].push_back(ei[k]);

    if (step_idx % cfg.record_stride == 0 || step_idx == n_steps) {
      FlowSample smp;
      smp.t = t;
      smp.c = c;
      smp.eps = eps;
      smp.mu = mu;
      smp.mu_1 = mu1;
      smp.mu_2 = mu2;
      smp.R_max = *std::max_element(R.begin(), R.end());
      smp.R_min = *std::min_element(R.begin(), R.end());
      smp.min_bisec = st.curvature().min_bisectional();
      if (smp.min_bisec <= 0.0 && t > 0.0) tr.positive_bisectional = false;
      smp.rr2_accum = rr2;
      smp.sup_phidot = 0.0;
      for (double v : phidot) smp.sup_phidot = std::max(smp.sup_phidot, std::abs(v));
      smp.ei_rate = ei;
      // pointwise trace differential quantity (defined for t > 0)
      if (t > 0.0) {
        double worst = 1e300;
        // dR/dt via the evolution identity dR/dt = Delta R + |Ric|^2 - R
        Field lapR = st.laplacian(R);
        Field dR1 = fd::d1(R, g);
        const double fac = 1.0 / (1.0 - std::exp(-t));
        for (int i = 0; i < np; ++i) {
          const double dRdt = lapR[i] + st.curvature().ric_sq[i] - R[i];
          const double grad2 = 2.0 * dR1[i] * dR1[i] / st.upp()[i];
          const double q = dRdt - grad2 / R[i] + R[i] * fac;
          worst = std::min(worst, q);
        }
        smp.harnack_margin = worst;
      } else {
        smp.harnack_margin = std::numeric_limits<double>::infinity();
      }
      if (cfg.monitors) smp.ledger = compute_ledger(refstate, st);
      tr.samples.push_back(std::move(smp));
      tr.phi_rows.push_back(chi);
      tr.gauge_m.push_back(m);
      tr.R_rows.push_back(R);
      tr.upp_rows.push_back(st.upp());
      tr.phidot_rows.push_back(phidot);
    }
  };

  record(0);
  double dt_cur = cfg.dt;
  for (int j = 1; j <= n_steps; ++j) {
    Field up_l, upp_l;
    const double q0 = ctx.ell(ctx.rhs(chi, up_l, upp_l));
    // sub-step with rejection until we advance by cfg.dt
    double advanced = 0.0;
    while (advanced < cfg.dt - 1e-12) {
      double h = std::min(dt_cur, cfg.dt - advanced);
      bool ok = cfg.integrator == Integrator::SemiImplicit
                    ? step_ros2(ctx, chi, h)
                    : step_rk4(ctx, chi, std::min(h, explicit_dt_cap(ctx, chi)));
      if (!ok) {
        ++tr.positivity_rejections;
        dt_cur *= 0.5;
        if (dt_cur < 1e-9)
          throw NumericalError("flow blow-up: step size underflow at t=" + std::to_string(t));
        continue;
      }
      advanced += h;
      if (dt_cur < cfg.dt) dt_cur = std::min(cfg.dt, dt_cur * 2.0);
    }
    const double q1 = ctx.ell(ctx.rhs(chi, up_l, upp_l));
    m = std::exp(cfg.dt) * m + 0.5 * cfg.dt * (std::exp(cfg.dt) * q0 + q1);
    t = j * cfg.dt;
    record(j);
  }
  return tr;
}

const FlowSample& FlowTrace::at_time(double t) const {
  size_t best = 0;
  double d = 1e300;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (std::abs(samples[i].t - t) < d) {
      d = std::abs(samples[i].t - t);
      best = i;
    }
  }
  return samples[best];
}

EnergyIdentity accumulate_energy_identity(const FlowTrace& trace, int k) {
  const int n = complex_dim(trace.config.manifold);
  if (k < 0 || k > n) throw ConfigError("accumulate_energy_identity: bad k");
  if (!trace.config.monitors)
    throw ConfigError("accumulate_energy_identity: trace was run without monitors");
  EnergyIdentity out;
  const auto& rate = trace.ei_rate_raw[k];
  const auto& ts = trace.step_times;
  for (size_t j = 1; j < ts.size(); ++j)
    out.lhs += 0.5 * (ts[j] - ts[j - 1]) * (rate[j] + rate[j - 1]);
  out.rhs = trace.samples.front().ledger.E_k[k] - trace.samples.back().ledger.E_k[k];
  // [T, T+1] tail slices
  const double t_end = ts.back();
  for (double T = 0.0; T + 1.0 <= t_end + 1e-9; T += 1.0) {
    double acc = 0.0;
    for (size_t j = 1; j < ts.size(); ++j) {
      if (ts[j] <= T || ts[j - 1] >= T + 1.0) continue;
      acc += 0.5 * (ts[j] - ts[j - 1]) * (rate[j] + rate[j - 1]);
    }
    out.window_start.push_back(T);
    out.window_value.push_back(acc);
  }
  return out;
}

NormalizationResult normalize_initial_c(FlowTrace& trace) {
  const auto& ts = trace.step_times;
  const auto& eps = trace.eps_raw;
  if (ts.size() < 10) throw NumericalError("normalize_initial_c: trace too short");
  NormalizationResult res;

  // fit eps ~ eps_T e^{-beta (t - T)} on the last fifth of the run
  const double t_end = ts.back();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (size_t j = 0; j < ts.size(); ++j) {
    if (ts[j] < 0.8 * t_end || eps[j] <= 0.0) continue;
    const double x = ts[j], y = std::log(eps[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 4) throw NumericalError("normalize_initial_c: no usable tail window");
  const double beta = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  res.tail_rate = beta;
  if (!(beta > 0.0))
    throw NumericalError("normalize_initial_c: eps tail is not decaying; run longer");

  // c_adj(t_j) = int_{t_j}^inf eps e^{-(tau - t_j)} dtau, backward recurrence
  const size_t N = ts.size();
  trace.c_adjusted.assign(N, 0.0);
  trace.c_adjusted[N - 1] = eps[N - 1] / (1.0 + beta);
  for (size_t j = N - 1; j-- > 0;) {
    const double h = ts[j + 1] - ts[j];
    trace.c_adjusted[j] = std::exp(-h) * trace.c_adjusted[j + 1] +
                          0.5 * h * (eps[j] + std::exp(-h) * eps[j + 1]);
  }
  res.c0_target = trace.c_adjusted[0];
  res.a = res.c0_target - trace.c_raw[0];

  // affine consistency |c_raw + a e^t - c_adj| over the early window t <= 5
  double worst = 0.0;
  for (size_t j = 0; j < N; ++j) {
    if (ts[j] > std::min(5.0, 0.5 * t_end)) break;
    worst = std::max(worst,
                     std::abs(trace.c_raw[j] + res.a * std::exp(ts[j]) - trace.c_adjusted[j]));
  }
  res.affine_consistency = worst;
  trace.normalized = true;
  trace.a_normalization = res.a;
  return res;
}

DecayRates fit_decay_rate(const FlowTrace& trace, double t_lo, double t_hi) {
  if (!trace.normalized)
    throw ConfigError("fit_decay_rate: normalize_initial_c must run first");
  auto fit = [&](auto getter) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t j = 0; j < trace.samples.size(); ++j) {
      const double t = trace.samples[j].t;
      if (t < t_lo || t > t_hi) continue;
      const double v = getter(j);
      if (v <= 0.0) continue;
      const double y = std::log(v);
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
      ++cnt;
    }
    if (cnt < 4) throw NumericalError("fit_decay_rate: window too short");
    return -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  };
  DecayRates out;
  out.alpha_mu = fit([&](size_t j) { return trace.samples[j].mu; });
  out.alpha_mu_1 = fit([&](size_t j) { return trace.samples[j].mu_1; });
  out.alpha_mu_2 = fit([&](size_t j) { return trace.samples[j].mu_2; });
  // adjusted c on the per-step grid; sample it at the recorded times
  out.alpha_c = [&] {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t j = 0; j < trace.step_times.size(); ++j) {
      const double t = trace.step_times[j];
      if (t < t_lo || t > t_hi || trace.c_adjusted[j] <= 0.0) continue;
      const double y = std::log(trace.c_adjusted[j]);
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
      ++cnt;
    }
    if (cnt < 4) throw NumericalError("fit_decay_rate: c window too short");
    return -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }();
  return out;
}

HarnackReport harnack_check(const FlowTrace& trace, int n_pairs, std::uint64_t seed,
                            double t_floor) {
  if (trace.samples.size() < 3) throw ConfigError("harnack_check: trace too short");
  const ReducedGrid g = ReducedGrid::make(trace.config.manifold, trace.config.n_points,
                                          trace.config.L);
  const int np = g.n_points;
  const size_t rows = trace.samples.size();

  // cumulative radial arclength per recorded row: l(s) = int sqrt(u''/2) ds
  std::vector<Field> arc(rows, Field(np, 0.0));
  for (size_t r = 0; r < rows; ++r) {
    for (int i = 1; i < np; ++i) {
      const double a = std::sqrt(0.5 * trace.upp_rows[r][i - 1]);
      const double b = std::sqrt(0.5 * trace.upp_rows[r][i]);
      arc[r][i] = arc[r][i - 1] + 0.5 * (a + b) * g.h;
    }
  }

  // coarse spatial nodes for the DP
  const int n_nodes = 33;
  std::vector<int> nodes(n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    nodes[i] = static_cast<int>(std::lround(i * double(np - 1) / (n_nodes - 1)));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_row(0, static_cast<int>(rows) - 1);
  std::uniform_int_distribution<int> pick_x(0, np - 1);

  HarnackReport rep;
  rep.worst_margin = 1e300;
  int done = 0;
  int guard = 0;
  while (done < n_pairs && guard++ < 50 * n_pairs) {
    int r1 = pick_row(rng), r2 = pick_row(rng);
    if (r1 > r2) std::swap(r1, r2);
    const double t1 = trace.samples[r1].t, t2 = trace.samples[r2].t;
    if (t1 <= t_floor || t2 <= t1 + 1e-9) continue;
    const int ix = pick_x(rng), iy = pick_x(rng);

    // DP over coarse nodes and rows r1..r2: cost of moving a->b over one
    // recorded interval is d^2/dtau with d the larger-slice arclength.
    const int R = r2 - r1;
    std::vector<double> cost(n_nodes, 1e300), next(n_nodes);
    // start: from ix to each node during the first interval? Path starts at x
    // at time t1; positions at rows r1+1..r2-1 are nodes; ends at y at t2.
    if (R == 1) {
      // single interval: straight move x->y under the larger-slice metric
      const double lxa = arc[r1][ix], lxb = arc[r2][ix];
      const double lya = arc[r1][iy], lyb = arc[r2][iy];
      const double d = std::max(std::abs(lxa - lya), std::abs(lxb - lyb));
      const double dtau = t2 - t1;
      const double Delta = d * d / dtau;
      const double lhs = trace.R_rows[r1][ix];
      const double rhs = (std::exp(t2) - 1.0) / (std::exp(t1) - 1.0) *
                         std::exp(Delta / 4.0) * trace.R_rows[r2][iy];
      const double margin = rhs - lhs;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (margin < -1e-8) ++rep.violations;
      ++done;
      continue;
    }
    // initialize: move from x to node during [r1, r1+1]
    for (int b = 0; b < n_nodes; ++b) {
      const double la = arc[r1][ix], lb = std::max(arc[r1][nodes[b]], arc[r1 + 1][nodes[b]]);
      const double laa = std::max(la, arc[r1 + 1][ix]);
      const double d = std::abs(laa - lb);
      const double dtau = trace.samples[r1 + 1].t - trace.samples[r1].t;
      cost[b] = d * d / dtau;
    }
    for (int r = r1 + 1; r < r2 - 1; ++r) {
      const double dtau = trace.samples[r + 1].t - trace.samples[r].t;
      for (int b = 0; b < n_nodes; ++b) next[b] = 1e300;
      for (int a = 0; a < n_nodes; ++a) {
        if (cost[a] >= 1e300) continue;
        for (int b = 0; b < n_nodes; ++b) {
          const double la = std::max(arc[r][nodes[a]], arc[r + 1][nodes[a]]);
          const double lb = std::max(arc[r][nodes[b]], arc[r + 1][nodes[b]]);
          const double d = std::abs(la - lb);
          const double c2 = cost[a] + d * d / dtau;
          next[b] = std::min(next[b], c2);
        }
      }
      cost.swap(next);
    }
    // final interval [r2-1, r2]: node -> y
    double Delta = 1e300;
    {
      const double dtau = trace.samples[r2].t - trace.samples[r2 - 1].t;
      for (int a = 0; a < n_nodes; ++a) {
        const double la = std::max(arc[r2 - 1][nodes[a]], arc[r2][nodes[a]]);
        const double lb = std::max(arc[r2 - 1][iy], arc[r2][iy]);
        const double d = std::abs(la - lb);
        Delta = std::min(Delta, cost[a] + d * d / dtau);
      }
    }
    const double lhs = trace.R_rows[r1][ix];
    const double rhs = (std::exp(t2) - 1.0) / (std::exp(t1) - 1.0) *
                       std::exp(Delta / 4.0) * trace.R_rows[r2][iy];
    const double margin = rhs - lhs;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-8) ++rep.violations;
    ++done;
  }
  rep.pairs_checked = done;

  rep.min_trace_quantity = 1e300;
  for (const auto& s : trace.samples)
    if (s.t > t_floor)
      rep.min_trace_quantity = std::min(rep.min_trace_quantity, s.harnack_margin);
  return rep;
}

ReducedMetricState dilated_reference(const ReducedGrid& g, double beta) {
  const int np = g.n_points;
  const double a = g.dim() + 1;
  DerivBundle b;
  b.phi.resize(np);
  b.d1.resize(np);
  b.d2.resize(np);
  b.d3.resize(np);
  b.d4.resize(np);
  auto l1p = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  auto logistic = [](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };
  for (int i = 0; i < np; ++i) {
    const double s = g.s[i], sb = s + beta;
    const double q = logistic(s), qb = logistic(sb);
    const double w = q * (1 - q), wb = qb * (1 - qb);
    b.phi[i] = a * (l1p(sb) - l1p(s));
    b.d1[i] = a * (qb - q);
    b.d2[i] = a * (wb - w);
    b.d3[i] = a * (wb * (1 - 2 * qb) - w * (1 - 2 * q));
    b.d4[i] = a * (wb * (1 - 6 * qb + 6 * qb * qb) - w * (1 - 6 * q + 6 * q * q));
  }
  return metric_from_bundle(g, b);
}

AutomorphismNormalization normalize_by_automorphism(const ReducedMetricState& state,
                                                    const ReducedMetricState& reference_ke) {
  require_same_grid(state.grid(), reference_ke.grid());
  const ReducedGrid& g = state.grid();
  const int n = g.dim(), np = g.n_points;

  auto psi = [&](double beta) {
    ReducedMetricState rho = dilated_reference(g, beta);
    auto [I, IJ] = i_functional(rho, state);
    (void)I;
    return IJ;
  };

  // golden-section on beta = log lambda^2 in [-6, 6]
  double lo = -6.0, hi = 6.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = psi(x1), f2 = psi(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-11; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = psi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = psi(x2);
    }
  }
  double beta = 0.5 * (lo + hi);
  // Newton polish on the derivative
  for (int it = 0; it < 8; ++it) {
    const double h = 1e-5;
    const double d1 = (psi(beta + h) - psi(beta - h)) / (2 * h);
    const double d2 = (psi(beta + h) - 2 * psi(beta) + psi(beta - h)) / (h * h);
    if (!(std::abs(d2) > 1e-14)) break;
    const double step = d1 / d2;
    if (std::abs(step) > 0.5) break;
    beta -= step;
  }

  AutomorphismNormalization out;
  out.beta_star = beta;
  out.lambda_star = std::exp(0.5 * beta);
  out.psi_min = psi(beta);
  {
    const double h = 1e-4;
    out.dpsi_at_min = (psi(beta + h) - psi(beta - h)) / (2 * h);
  }
  ReducedMetricState rho = dilated_reference(g, beta);
  out.normalized_reference = rho;
  // central residual: (1/V) int (phi - rho) theta w_rho^n with theta the
  // invariant Lambda_1 eigenfunction of w_rho (= u_rho' - mean)
  Field theta(np), diff(np);
  const double mean = rho.integrate(rho.up()) / rho.volume();
  for (int i = 0; i < np; ++i) {
    theta[i] = rho.up()[i] - mean;
    diff[i] = state.phi()[i] - rho.phi()[i];
  }
  Field prod(np);
  for (int i = 0; i < np; ++i) prod[i] = diff[i] * theta[i];
  out.central_residual = rho.integrate(prod) / rho.volume();
  (void)n;
  return out;
}

}  // namespace krf
