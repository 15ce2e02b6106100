#include "krf/curvature_algebra.hpp"

#include <cmath>

#include "krf/verify_hooks.hpp"

namespace krf {

std::vector<double> sigma_k(const RicciSpectrum& spectrum) {
  const int n = static_cast<int>(spectrum.size());
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k >= 1; --k) e[k] += spectrum[m] * e[k - 1];
  }
  if (mutation_enabled("sigma")) e[n] += 1e-3;
  return e;
}

double poly_identity_lhs(double x, double y, int k) {
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i <= k; ++i) {
    s1 += std::pow(x, i) * std::pow(y, k - i);
    if (i >= 1) s2 += i * std::pow(x, i - 1) * std::pow(y, k - i);
  }
  return s1 + (x - y) * s2;
}

double VandermondeInverse::f(int i, double x) const {
  double acc = 0.0, xp = x;
  for (int j = 1; j <= n + 1; ++j) {
    acc += c[i - 1][j - 1] * xp;
    xp *= x;
  }
  return acc;
}

VandermondeInverse vandermonde_inverse(int n) {
  if (n < 1 || n > 12)
    throw ConfigError("vandermonde_inverse: n out of the conditioning guard 1..12");
  const int m = n + 1;
  VandermondeInverse vi;
  vi.n = n;
  vi.c.assign(m, std::vector<double>(m, 0.0));
  for (int i = 1; i <= m; ++i) {
    // poly(x) = Prod_{k != i} (x - k), degree m-1, coeffs by convolution
    std::vector<double> coeff{1.0};  // coeff[t] multiplies x^{deg - t}
    double denom = i;
    for (int k = 1; k <= m; ++k) {
      if (k == i) continue;
      std::vector<double> next(coeff.size() + 1, 0.0);
      for (size_t t = 0; t < coeff.size(); ++t) {
        next[t] += coeff[t];
        next[t + 1] += -static_cast<double>(k) * coeff[t];
      }
      coeff = std::move(next);
      denom *= (i - k);
    }
    // f_i(x) = x * poly(x) / denom; coefficient of x^j is coeff[m - j]/denom
    for (int j = 1; j <= m; ++j) vi.c[i - 1][j - 1] = coeff[m - j] / denom;
  }
  if (mutation_enabled("vandermonde")) vi.c[0][0] += 1e-4;
  vi.upsilon.assign(m, 0.0);
  for (int k = 1; k <= m; ++k) {
    double sum = 0.0;
    for (int i = 1; i <= m; ++i) sum += vi.c[i - 1][k - 1];
    // (n+1) / C(n+1, k)
    double binom = 1.0;
    for (int t = 1; t <= k; ++t) binom = binom * (m - t + 1) / t;
    vi.upsilon[k - 1] = (m / binom) * sum;
  }
  return vi;
}

PointCurvatureTensor::PointCurvatureTensor(int dim) : n_(dim) {
  if (dim < 1 || dim > 4) throw ConfigError("PointCurvatureTensor: dim must be 1..4");
  a_.assign(static_cast<size_t>(dim) * dim * dim * dim, 0.0);
}

namespace {
// Symmetry orbit of an index tuple under the Kaehler group:
// (ijkl) ~ (kjil) ~ (ilkj) ~ (klij) ~ (jilk) ~ ...
void orbit(int i, int j, int k, int l, std::vector<std::array<int, 4>>& out) {
  out.clear();
  std::array<int, 4> base{i, j, k, l};
  auto push = [&out](std::array<int, 4> t) {
    for (const auto& u : out)
      if (u == t) return;
    out.push_back(t);
  };
  push(base);
  for (size_t start = 0; start < out.size(); ++start) {
    auto [a, b, c, d] = out[start];
    push({c, b, a, d});  // i <-> k
    push({a, d, c, b});  // j <-> l
    push({c, d, a, b});  // pair swap
    push({b, a, d, c});  // reality
  }
}
}  // namespace

void PointCurvatureTensor::set(int i, int j, int k, int l, double value) {
  std::vector<std::array<int, 4>> orb;
  orbit(i, j, k, l, orb);
  for (const auto& t : orb) a_[idx(t[0], t[1], t[2], t[3])] = value;
}

void PointCurvatureTensor::symmetrize() {
  std::vector<bool> done(a_.size(), false);
  std::vector<std::array<int, 4>> orb;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          if (done[idx(i, j, k, l)]) continue;
          orbit(i, j, k, l, orb);
          double mean = 0.0;
          for (const auto& t : orb) mean += a_[idx(t[0], t[1], t[2], t[3])];
          mean /= orb.size();
          for (const auto& t : orb) {
            a_[idx(t[0], t[1], t[2], t[3])] = mean;
            done[idx(t[0], t[1], t[2], t[3])] = true;
          }
        }
}

double PointCurvatureTensor::bisectional(const std::vector<std::complex<double>>& v,
                                         const std::vector<std::complex<double>>& w) const {
  std::complex<double> acc = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l)
          acc += a_[idx(i, j, k, l)] * v[i] * std::conj(v[j]) * w[k] * std::conj(w[l]);
  return acc.real();
}

std::complex<double> PointCurvatureTensor::eval(
    const std::vector<std::complex<double>>& a1, const std::vector<std::complex<double>>& b1,
    const std::vector<std::complex<double>>& a2, const std::vector<std::complex<double>>& b2,
    const std::vector<std::complex<double>>& a3, const std::vector<std::complex<double>>& b3,
    const std::vector<std::complex<double>>& a4, const std::vector<std::complex<double>>& b4)
    const {
  // Only slot patterns with one (1,0) and one (0,1) per pair survive:
  //   R = T(a1,b2,a3,b4) - T(a1,b2,a4,b3) - T(a2,b1,a3,b4) + T(a2,b1,a4,b3)
  auto T = [this](const std::vector<std::complex<double>>& x,
                  const std::vector<std::complex<double>>& y,
                  const std::vector<std::complex<double>>& z,
                  const std::vector<std::complex<double>>& w) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          for (int l = 0; l < n_; ++l)
            acc += a_[idx(i, j, k, l)] * x[i] * y[j] * z[k] * w[l];
    return acc;
  };
  return T(a1, b2, a3, b4) - T(a1, b2, a4, b3) - T(a2, b1, a3, b4) + T(a2, b1, a4, b3);
}

PointCurvatureTensor PointCurvatureTensor::constant_projection() const {
  double tr = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) tr += (*this)(i, i, j, j);
  const double c = tr / (n_ * (n_ + 1));
  return constant_curvature_model(n_, 2.0 * c);
}

PointCurvatureTensor constant_curvature_model(int n, double holomorphic_sectional_value) {
  PointCurvatureTensor t(n);
  const double c = 0.5 * holomorphic_sectional_value;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = c * ((i == j && k == l ? 1.0 : 0.0) +
                                (i == l && k == j ? 1.0 : 0.0));
          if (v != 0.0) t.set(i, j, k, l, v);
        }
  return t;
}

RealVector apply_J(const RealVector& w) {
  const int n = static_cast<int>(w.size()) / 2;
  RealVector out(2 * n);
  for (int a = 0; a < n; ++a) {
    out[a] = -w[n + a];   // J(Je_a) = -e_a
    out[n + a] = w[a];    // J(e_a) = Je_a
  }
  return out;
}

double real_dot(const RealVector& a, const RealVector& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

namespace {
std::vector<std::complex<double>> holo_coeffs(const RealVector& w) {
  // w = sum x_a e_a + y_a Je_a; the unit (1,0) lift is sum (x_a + i y_a) u_a
  const int n = static_cast<int>(w.size()) / 2;
  std::vector<std::complex<double>> z(n);
  for (int a = 0; a < n; ++a) z[a] = {w[a], w[n + a]};
  return z;
}
std::vector<std::complex<double>> conj_vec(const std::vector<std::complex<double>>& z) {
  std::vector<std::complex<double>> out(z.size());
  for (size_t i = 0; i < z.size(); ++i) out[i] = std::conj(z[i]);
  return out;
}
}  // namespace

double sectional_from_bisectional(const PointCurvatureTensor& t, const RealVector& w1,
                                  const RealVector& w2) {
  const double tol = 1e-10;
  if (std::abs(real_dot(w1, w1) - 1.0) > tol || std::abs(real_dot(w2, w2) - 1.0) > tol)
    throw GeometryError("sectional_from_bisectional: vectors must be unit");
  if (std::abs(real_dot(w1, w2)) > tol)
    throw GeometryError("sectional_from_bisectional: vectors must be orthogonal");
  const double cj = real_dot(w2, apply_J(w1));
  const bool identical = std::abs(std::abs(cj) - 1.0) <= tol;
  const bool perpendicular = std::abs(cj) <= tol;
  if (!identical && !perpendicular)
    throw GeometryError(
        "sectional_from_bisectional: complex planes neither identical nor perpendicular");

  auto u1 = holo_coeffs(w1);
  if (identical) {
    // w2 = +-J w1: the plane is holomorphic and K = R(u1, u1bar, u1, u1bar)
    return t.bisectional(u1, u1);
  }
  // u2 corresponds to (-J w2 - i w2)/sqrt(2) = -i * (unit lift of w2)
  auto u2 = holo_coeffs(w2);
  for (auto& z : u2) z *= std::complex<double>(0.0, -1.0);
  const int n = t.dim();
  std::vector<std::complex<double>> A(n), B(n);
  const double r = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < n; ++a) {
    A[a] = r * (u1[a] + u2[a]);
    B[a] = r * (u1[a] - u2[a]);
  }
  return 0.25 * (t.bisectional(A, A) - 2.0 * t.bisectional(B, A) + t.bisectional(B, B));
}

double sectional_real_oracle(const PointCurvatureTensor& t, const RealVector& w1,
                             const RealVector& w2) {
  // K(w1,w2) = R(w1, w2, w2, w1): expand both real vectors into (1,0)+(0,1)
  // parts; b-coefficients are the conjugates scaled by the same 1/sqrt(2).
  const int n = t.dim();
  auto z1 = holo_coeffs(w1), z2 = holo_coeffs(w2);
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<std::complex<double>> a1(n), a2(n);
  for (int i = 0; i < n; ++i) {
    a1[i] = r * z1[i];
    a2[i] = r * z2[i];
  }
  auto b1 = conj_vec(a1), b2 = conj_vec(a2);
  return t.eval(a1, b1, a2, b2, a2, b2, a1, b1).real();
}

}  // namespace krf
