#include "krf/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace krf {

namespace {

// logistic q = e^s/(1+e^s) evaluated stably
inline double logistic(double s) {
  return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

inline double log1pexp(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// Pole-asymptotic closure. Every curvature ratio is a 0/0 quotient at the
// poles whose finite-difference numerator carries an irreducible roundoff
// floor ~ eps |phi| / h^4; divided by u''^2 that floor grows like e^{2|s|}.
// Past the radius where it would exceed `tol`, the field is replaced by its
// pole expansion F0 + F1 e^{-|s|} + F2 e^{-2|s|} fitted at three
// window-averaged anchors, cosine-blended.
void tail_override(Field& F, const ReducedGrid& g, double phi_scale,
                   double tol = 1e-5) {
  const int n = g.n_points;
  const double L = g.L;
  const int dim = g.dim();
  // noise floor of the 4th-derivative stencil
  const double h2 = g.h * g.h;
  const double noise4 = 2.3e-16 * std::max(phi_scale, 1e-30) * 27.0 / (h2 * h2);
  // u''_ref ~ (dim+1) e^{-|s|}: keep raw values while noise/u''^2 < tol
  const double upp_min = std::sqrt(noise4 / tol);
  double s_a = L - 1.5;
  if (upp_min > 0.0) {
    const double s_noise = std::log((dim + 1) / upp_min);
    s_a = std::min(s_a, std::max(4.5, s_noise));
  }
  const double blend = 0.75;

  auto window_mean = [&](int center) {
    double acc = 0.0;
    int cnt = 0;
    for (int k = -2; k <= 2; ++k) {
      const int i = std::clamp(center + k, 0, n - 1);
      acc += F[i];
      ++cnt;
    }
    return acc / cnt;
  };

  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    double sa[3] = {s_a, s_a - 0.8, s_a - 1.6};
    double e[3], y[3];
    for (int k = 0; k < 3; ++k) {
      int idx = static_cast<int>(std::lround((sign * sa[k] + L) / g.h));
      idx = std::clamp(idx, 0, n - 1);
      e[k] = std::exp(-std::abs(g.s[idx]));
      y[k] = window_mean(idx);
    }
    // solve the 3x3 system y = F0 + F1 e + F2 e^2 (Cramer)
    double M[3][3];
    for (int k = 0; k < 3; ++k) {
      M[k][0] = 1.0;
      M[k][1] = e[k];
      M[k][2] = e[k] * e[k];
    }
    const double det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                       M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                       M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
    double c[3] = {0.0, 0.0, 0.0};
    if (std::abs(det) > 1e-30) {
      for (int col = 0; col < 3; ++col) {
        double A[3][3];
        for (int r = 0; r < 3; ++r)
          for (int cc = 0; cc < 3; ++cc) A[r][cc] = cc == col ? y[r] : M[r][cc];
        const double dn = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                          A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                          A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
        c[col] = dn / det;
      }
    } else {
      c[0] = y[0];
    }
    for (int i = 0; i < n; ++i) {
      if (sign * g.s[i] < s_a - blend) continue;
      const double t = std::clamp((sign * g.s[i] - (s_a - blend)) / blend, 0.0, 1.0);
      const double w = 0.5 - 0.5 * std::cos(M_PI * t);
      const double es = std::exp(-std::abs(g.s[i]));
      const double model = c[0] + c[1] * es + c[2] * es * es;
      F[i] = (1.0 - w) * F[i] + w * model;
    }
  }
}

}  // namespace

ReferenceData ReferenceData::make(const ReducedGrid& g) {
  const int np = g.n_points;
  const double a = g.dim() + 1;
  ReferenceData r;
  r.u.resize(np);
  r.up.resize(np);
  r.upp.resize(np);
  r.uppp.resize(np);
  r.upppp.resize(np);
  for (int i = 0; i < np; ++i) {
    const double q = logistic(g.s[i]);
    const double w = q * (1.0 - q);
    r.u[i] = a * log1pexp(g.s[i]);
    r.up[i] = a * q;
    r.upp[i] = a * w;
    r.uppp[i] = a * w * (1.0 - 2.0 * q);
    r.upppp[i] = a * w * (1.0 - 6.0 * q + 6.0 * q * q);
  }
  return r;
}

double CurvatureField::min_bisectional() const {
  double m = *std::min_element(bisec_A.begin(), bisec_A.end());
  if (!bisec_B.empty()) m = std::min(m, *std::min_element(bisec_B.begin(), bisec_B.end()));
  if (!bisec_C.empty()) m = std::min(m, *std::min_element(bisec_C.begin(), bisec_C.end()));
  return m;
}

void ReducedMetricState::finish(const Field& uppp, const Field& upppp) {
  const int np = grid_.n_points;
  const int n = dim();

  u_.resize(np);
  for (int i = 0; i < np; ++i) u_[i] = ref_.u[i] + phi_[i];

  // positivity (omega_phi > 0)
  for (int i = 0; i < np; ++i) {
    if (!(upp_[i] > 0.0))
      throw PositivityError("u'' <= 0 at grid index " + std::to_string(i) +
                                " (s=" + std::to_string(grid_.s[i]) + ")",
                            i);
    if (n >= 2 && !(up_[i] > 0.0))
      throw PositivityError("u' <= 0 at grid index " + std::to_string(i) +
                                " (s=" + std::to_string(grid_.s[i]) + ")",
                            i);
  }
  boundary_slack_ = std::max(std::abs(p1_.front()), std::abs(p1_.back()));

  log_ratio_.resize(np);
  for (int i = 0; i < np; ++i) {
    log_ratio_[i] = std::log1p(p2_[i] / ref_.upp[i]) +
                    (n - 1) * std::log1p(p1_[i] / ref_.up[i]);
  }

  // stable curvature ratio blocks
  Field A(np), B(np), C(np), phim(np), ell(np);
  for (int i = 0; i < np; ++i) {
    const double up = up_[i], upp = upp_[i], u3 = uppp[i], u4 = upppp[i];
    A[i] = (u3 * u3 - u4 * upp) / (upp * upp * upp);
    phim[i] = u3 / upp;
    ell[i] = upp / up;
    if (n >= 2) {
      B[i] = (upp * upp - u3 * up) / (up * up * upp);
      C[i] = 2.0 * (up - upp) / (up * up);
    }
  }
  if (!analytic_) {
    // the storage-roundoff noise near the poles scales with the residual
    // constant content of phi there, not with its interior amplitude
    double phi_scale = 0.0;
    for (int i = 0; i < np; ++i) {
      if (std::abs(grid_.s[i]) < 2.0 * grid_.L / 3.0) continue;
      phi_scale = std::max(phi_scale, std::abs(phi_[i] - phi_mean_));
    }
    tail_override(A, grid_, phi_scale);
    tail_override(phim, grid_, phi_scale);
    tail_override(ell, grid_, phi_scale);
    if (n >= 2) {
      tail_override(B, grid_, phi_scale);
      tail_override(C, grid_, phi_scale);
    }
  }

  curv_.bisec_A = A;
  curv_.r_rad.resize(np);
  curv_.scalar.resize(np);
  curv_.ric_sq.resize(np);
  psip_.resize(np);
  psipp_.resize(np);
  if (n >= 2) {
    curv_.bisec_B = B;
    curv_.bisec_C = C;
    curv_.r_tan.resize(np);
  }
  for (int i = 0; i < np; ++i) {
    const double rr = A[i] + (n - 1) * B[i];
    curv_.r_rad[i] = rr;
    double rt = 0.0;
    if (n >= 2) {
      rt = B[i] + C[i];
      curv_.r_tan[i] = rt;
    }
    curv_.scalar[i] = rr + (n - 1) * rt;
    curv_.ric_sq[i] = rr * rr + (n - 1) * rt * rt;
    psip_[i] = n - phim[i] - (n - 1) * ell[i];
    psipp_[i] = upp_[i] * rr;
  }

  vdens_.resize(np);
  for (int i = 0; i < np; ++i)
    vdens_[i] = n * upp_[i] * std::pow(up_[i], n - 1);
  volume_ = integrate(Field(np, 1.0));

  // h = -log_ratio - phi + const, const fixed by int (e^h - 1) omega_phi^n = 0
  h_.resize(np);
  double hmax = -1e300;
  for (int i = 0; i < np; ++i) {
    h_[i] = -log_ratio_[i] - (phi_[i] - phi_mean_);
    hmax = std::max(hmax, h_[i]);
  }
  Field eh(np);
  for (int i = 0; i < np; ++i) eh[i] = std::exp(h_[i] - hmax);
  const double c = -(hmax + std::log(integrate(eh) / volume_));
  for (int i = 0; i < np; ++i) h_[i] += c;
}

double ReducedMetricState::integrate(const Field& f) const {
  if (static_cast<int>(f.size()) != grid_.n_points)
    throw GridMismatchError("field length does not match the grid");
  const int np = grid_.n_points;
  const int n = dim();
  Field y(np);
  for (int i = 0; i < np; ++i) y[i] = f[i] * vdens_[i];
  double acc = fd::quad(y, grid_.h);
  const double cap = chern_volume(grid_.manifold);
  acc += f[np - 1] * (cap - std::pow(up_[np - 1], n));
  acc += f[0] * std::pow(up_[0], n);
  return acc;
}

Field ReducedMetricState::laplacian(const Field& f, fd::TailSlopes slopes) const {
  const int np = grid_.n_points;
  const int n = dim();
  Field f1 = fd::d1(f, grid_, slopes), f2 = fd::d2(f, grid_, slopes), out(np);
  for (int i = 0; i < np; ++i) {
    out[i] = f2[i] / upp_[i];
    if (n >= 2) out[i] += (n - 1) * f1[i] / up_[i];
  }
  return out;
}

Field ReducedMetricState::grad_norm_sq(const Field& f, fd::TailSlopes slopes) const {
  const int np = grid_.n_points;
  Field f1 = fd::d1(f, grid_, slopes), out(np);
  for (int i = 0; i < np; ++i) out[i] = f1[i] * f1[i] / upp_[i];
  return out;
}

ReducedMetricState build_reference(Manifold m, int n_points, double L) {
  ReducedMetricState st;
  st.grid_ = ReducedGrid::make(m, n_points, L);
  st.ref_ = ReferenceData::make(st.grid_);
  st.analytic_ = true;
  st.phi_.assign(n_points, 0.0);
  st.p1_.assign(n_points, 0.0);
  st.p2_.assign(n_points, 0.0);
  st.up_ = st.ref_.up;
  st.upp_ = st.ref_.upp;
  st.finish(st.ref_.uppp, st.ref_.upppp);
  return st;
}

ReducedMetricState metric_from_potential(const ReducedMetricState& reference,
                                         const Field& phi) {
  const ReducedGrid& g = reference.grid();
  if (static_cast<int>(phi.size()) != g.n_points)
    throw GridMismatchError("phi length does not match the grid");
  ReducedMetricState st;
  st.grid_ = g;
  st.ref_ = ReferenceData::make(g);
  st.analytic_ = false;
  st.phi_ = phi;

  // FD is applied to the de-meaned samples: constants are invisible to the
  // metric and large offsets (the flow's e^t gauge mode) wreck the pole
  // conditioning.
  double mean = 0.0;
  for (double v : phi) mean += v;
  mean /= g.n_points;
  st.phi_mean_ = mean;
  Field ph(g.n_points);
  for (int i = 0; i < g.n_points; ++i) ph[i] = phi[i] - mean;

  st.p1_ = fd::d1(ph, g);
  st.p2_ = fd::d2(ph, g);
  Field p3 = fd::d3(ph, g), p4 = fd::d4(ph, g);
  st.up_.resize(g.n_points);
  st.upp_.resize(g.n_points);
  Field uppp(g.n_points), upppp(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    st.up_[i] = st.ref_.up[i] + st.p1_[i];
    st.upp_[i] = st.ref_.upp[i] + st.p2_[i];
    uppp[i] = st.ref_.uppp[i] + p3[i];
    upppp[i] = st.ref_.upppp[i] + p4[i];
  }
  st.finish(uppp, upppp);
  return st;
}

ReducedMetricState metric_from_bundle(const ReducedGrid& g, const DerivBundle& b) {
  ReducedMetricState st;
  st.grid_ = g;
  st.ref_ = ReferenceData::make(g);
  st.analytic_ = true;
  st.phi_ = b.phi;
  st.p1_ = b.d1;
  st.p2_ = b.d2;
  double mean = 0.0;
  for (double v : b.phi) mean += v;
  st.phi_mean_ = mean / g.n_points;
  st.up_.resize(g.n_points);
  st.upp_.resize(g.n_points);
  Field uppp(g.n_points), upppp(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    st.up_[i] = st.ref_.up[i] + b.d1[i];
    st.upp_[i] = st.ref_.upp[i] + b.d2[i];
    uppp[i] = st.ref_.uppp[i] + b.d3[i];
    upppp[i] = st.ref_.upppp[i] + b.d4[i];
  }
  st.finish(uppp, upppp);
  return st;
}

FormPrimitive prim_omega(const ReducedMetricState& st) {
  return {&st.up(), &st.upp(), 0.0, static_cast<double>(st.dim() + 1)};
}

FormPrimitive prim_omega_ref(const ReducedMetricState& st) {
  return {&st.ref_up(), &st.ref_upp(), 0.0, static_cast<double>(st.dim() + 1)};
}

FormPrimitive prim_ricci(const ReducedMetricState& st) {
  // psi' -> 0 at -infty and -> n+1 at +infty for any smooth metric in c1
  return {&st.psi_p(), &st.psi_pp(), 0.0, static_cast<double>(st.dim() + 1)};
}

WedgeDensity wedge(const ReducedGrid& g, std::span<const FormPrimitive> parts) {
  if (static_cast<int>(parts.size()) != g.dim())
    throw GridMismatchError("wedge needs exactly dim(M) primitives");
  const int np = g.n_points;
  WedgeDensity w;
  w.density.assign(np, 0.0);
  for (size_t m = 0; m < parts.size(); ++m) {
    for (int i = 0; i < np; ++i) {
      double t = (*parts[m].app)[i];
      for (size_t mp = 0; mp < parts.size(); ++mp)
        if (mp != m) t *= (*parts[mp].ap)[i];
      w.density[i] += t;
    }
  }
  w.prodL = w.prodR = w.limL = w.limR = 1.0;
  for (const auto& p : parts) {
    w.prodL *= (*p.ap)[0];
    w.prodR *= (*p.ap)[np - 1];
    w.limL *= p.limL;
    w.limR *= p.limR;
  }
  return w;
}

double integrate_against(const ReducedGrid& g, const Field& f, const WedgeDensity& w) {
  const int np = g.n_points;
  Field y(np);
  for (int i = 0; i < np; ++i) y[i] = f[i] * w.density[i];
  double acc = fd::quad(y, g.h);
  acc += f[np - 1] * (w.limR - w.prodR);
  acc += f[0] * (w.prodL - w.limL);
  return acc;
}

double integrate_decaying(const ReducedGrid& g, const Field& f) {
  return fd::quad(f, g.h);
}

}  // namespace krf
