#include <doctest.h>

#include <cmath>
#include <random>

#include "krf/flow.hpp"
#include "krf/io.hpp"

using namespace krf;

namespace {
FlowConfig quick_cfg(Manifold m) {
  FlowConfig cfg;
  cfg.manifold = m;
  cfg.n_points = 256;
  cfg.L = 12.0;
  cfg.dt = 0.02;
  cfg.t_end = 3.0;
  cfg.init_family = "bump";
  cfg.init_amplitude = 0.06;
  cfg.init_mode = 2;
  return cfg;
}
}  // namespace

TEST_CASE("config validation names the offending key") {
  FlowConfig cfg;
  cfg.dt = -1.0;
  try {
    cfg.validate();
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("dt") != std::string::npos);
  }
}

TEST_CASE("reference is a fixed point of flow_step") {
  auto ref = build_reference(Manifold::CP1, 256, 12.0);
  auto next = flow_step(ref, 0.05, Integrator::SemiImplicit);
  for (double v : next.phi()) CHECK(std::abs(v) < 1e-10);
  auto next2 = flow_step(ref, 0.001, Integrator::ExplicitRK4);
  for (double v : next2.phi()) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("run_flow: trace times strictly increase; accumulator bookkeeping") {
  auto tr = run_flow(quick_cfg(Manifold::CP1));
  for (size_t i = 1; i < tr.samples.size(); ++i)
    CHECK(tr.samples[i].t > tr.samples[i - 1].t);
  // accumulator equals the trapezoid sum of its recorded integrand
  double acc = 0.0;
  for (size_t j = 1; j < tr.step_times.size(); ++j)
    acc += 0.5 * (tr.step_times[j] - tr.step_times[j - 1]) *
           (tr.rr2_rate_raw[j] + tr.rr2_rate_raw[j - 1]);
  CHECK(acc == doctest::Approx(tr.samples.back().rr2_accum).epsilon(1e-12));
}

TEST_CASE("phidot grows at most like the exponential envelope") {
  auto tr = run_flow(quick_cfg(Manifold::CP1));
  const double base = tr.samples.front().sup_phidot;
  for (const auto& s : tr.samples)
    CHECK(s.sup_phidot <= base * std::exp(s.t) * (1.0 + 1e-6) + 1e-12);
}

TEST_CASE("monotone monitors along a CP1 trace") {
  auto tr = run_flow(quick_cfg(Manifold::CP1));
  for (size_t i = 1; i < tr.samples.size(); ++i) {
    const auto& a = tr.samples[i - 1].ledger;
    const auto& b = tr.samples[i].ledger;
    CHECK(b.F <= a.F + 1e-8);
    CHECK(b.nu <= a.nu + 1e-8);
    CHECK(b.E_k[0] <= a.E_k[0] + 1e-8);
    CHECK(b.E_k[1] <= a.E_k[1] + 1e-8);
  }
}

TEST_CASE("evolution-equation residual along the flow (dR/dt oracle)") {
  // compare centred dR/dt of the recorded rows with Delta R + |Ric|^2 - R
  FlowConfig cfg = quick_cfg(Manifold::CP1);
  cfg.n_points = 1024;
  cfg.dt = 0.01;
  cfg.t_end = 0.5;
  cfg.init_amplitude = 0.05;
  auto tr = run_flow(cfg);
  auto ref = build_reference(cfg.manifold, cfg.n_points, cfg.L);
  const size_t j = tr.samples.size() / 2;
  auto st = metric_from_potential(ref, tr.phi_rows[j]);
  Field lapR = st.laplacian(st.curvature().scalar);
  const double dt2 = tr.samples[j + 1].t - tr.samples[j - 1].t;
  double worst = 0.0;
  for (int i = 0; i < cfg.n_points; ++i) {
    if (std::abs(st.grid().s[i]) > 8.0) continue;  // pole band: asymptotic closure
    const double dRdt = (tr.R_rows[j + 1][i] - tr.R_rows[j - 1][i]) / dt2;
    const double rhs = lapR[i] + st.curvature().ric_sq[i] - st.curvature().scalar[i];
    worst = std::max(worst, std::abs(dRdt - rhs));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("R_max doubling along the trace (Lemma-type bound)") {
  auto tr = run_flow(quick_cfg(Manifold::CP1));
  for (size_t i = 0; i < tr.samples.size(); ++i) {
    const double horizon = tr.samples[i].t + 0.5 / tr.samples[i].R_max;
    for (size_t j = i; j < tr.samples.size() && tr.samples[j].t <= horizon; ++j)
      CHECK(tr.samples[j].R_max <= 2.0 * tr.samples[i].R_max + 1e-9);
  }
}

TEST_CASE("energy identity accumulates below the E_k drop") {
  auto tr = run_flow(quick_cfg(Manifold::CP1));
  for (int k = 0; k <= 1; ++k) {
    auto ei = accumulate_energy_identity(tr, k);
    CHECK(ei.lhs <= ei.rhs + 1e-6);
  }
  // stationary run gives (0, 0)
  FlowConfig cfg = quick_cfg(Manifold::CP1);
  cfg.init_family = "zero";
  cfg.init_amplitude = 0.0;
  cfg.t_end = 1.0;
  auto tz = run_flow(cfg);
  auto ei = accumulate_energy_identity(tz, 1);
  CHECK(std::abs(ei.lhs) < 1e-10);
  CHECK(std::abs(ei.rhs) < 1e-10);
}

TEST_CASE("normalize_initial_c: adjusted c positive, identity holds") {
  FlowConfig cfg = quick_cfg(Manifold::CP1);
  cfg.t_end = 8.0;
  auto tr = run_flow(cfg);
  auto res = normalize_initial_c(tr);
  CHECK(tr.normalized);
  // stationary-limit: c_adj > -1e-10 everywhere (Lemma 10.1 positivity)
  for (double c : tr.c_adjusted) CHECK(c > -1e-10);
  // c(t) <= int_t^inf eps pointwise
  for (size_t j = 0; j + 1 < tr.step_times.size(); ++j) {
    double tail = 0.0;
    for (size_t q = j + 1; q < tr.step_times.size(); ++q)
      tail += 0.5 * (tr.step_times[q] - tr.step_times[q - 1]) *
              (tr.eps_raw[q] + tr.eps_raw[q - 1]);
    CHECK(tr.c_adjusted[j] <= tail + 1e-8);
  }
  // affine transformation consistency on the early window
  CHECK(res.affine_consistency < 1e-6);
  // stationary run: eps = 0, a makes c = 0
  FlowConfig cz = quick_cfg(Manifold::CP1);
  cz.init_family = "zero";
  cz.init_amplitude = 0.0;
  cz.t_end = 2.0;
  auto tz = run_flow(cz);
  CHECK_THROWS(normalize_initial_c(tz));  // eps == 0: no decaying tail to fit
}

TEST_CASE("harnack margins are nonnegative on a positive-bisectional trace") {
  FlowConfig cfg = quick_cfg(Manifold::CP1);
  cfg.init_amplitude = 0.04;
  cfg.t_end = 4.0;
  auto tr = run_flow(cfg);
  CHECK(tr.positive_bisectional);
  auto rep = harnack_check(tr, 100, 777);
  CHECK(rep.pairs_checked == 100);
  CHECK(rep.violations == 0);
  CHECK(rep.worst_margin > -1e-8);
  CHECK(rep.min_trace_quantity > 0.0);
}

TEST_CASE("automorphism normalization recovers an injected dilation") {
  auto ref = build_reference(Manifold::CP1, 512, 12.0);
  auto dil = dilated_reference(ref.grid(), 0.8);
  auto an = normalize_by_automorphism(dil, ref);
  CHECK(std::abs(an.beta_star - 0.8) < 1e-6);
  CHECK(std::abs(an.psi_min) < 1e-10);
  CHECK(std::abs(an.central_residual) < 1e-8);
  CHECK(std::abs(an.dpsi_at_min) < 1e-8);
}

TEST_CASE("centrally positioned input is already the minimizer") {
  // an even perturbation is L2-orthogonal to the odd Lambda_1 eigenfunction
  auto ref = build_reference(Manifold::CP1, 512, 12.0);
  FlowConfig cfg;
  cfg.manifold = Manifold::CP1;
  cfg.n_points = 512;
  cfg.init_family = "bump";
  cfg.init_amplitude = 0.05;
  cfg.init_mode = 2;
  auto g = ref.grid();
  auto st = metric_from_potential(ref, initial_potential(cfg, g));
  auto an = normalize_by_automorphism(st, ref);
  CHECK(std::abs(an.beta_star) < 1e-5);
  CHECK(std::abs(an.lambda_star - 1.0) < 1e-5);
  CHECK(std::abs(an.central_residual) < 1e-8);
}

TEST_CASE("flow positivity rejection throws on hopeless initial data") {
  FlowConfig cfg = quick_cfg(Manifold::CP1);
  cfg.init_amplitude = 5.0;  // violates positivity at t = 0
  CHECK_THROWS(run_flow(cfg));
}
