#include <doctest.h>

#include <cmath>
#include <random>

#include "krf/curvature_algebra.hpp"

using namespace krf;

TEST_CASE("sigma_k: Einstein spectrum gives binomials") {
  auto s = sigma_k({1.0, 1.0});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(2.0));
  CHECK(s[2] == doctest::Approx(1.0));
}

TEST_CASE("sigma_k: (a, b) gives (1, a+b, ab)") {
  auto s = sigma_k({3.0, -2.0});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(1.0));
  CHECK(s[2] == doctest::Approx(-6.0));
}

TEST_CASE("sigma expansion equals the product, randomized") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ut(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    RicciSpectrum r(n);
    for (auto& x : r) x = u(rng);
    auto e = sigma_k(r);
    CHECK(e[0] == 1.0);
    for (int rep = 0; rep < 5; ++rep) {
      const double t = ut(rng);
      double lhs = 0.0, tp = 1.0;
      for (int k = 0; k <= n; ++k) {
        lhs += e[k] * tp;
        tp *= t;
      }
      double rhs = 1.0;
      for (double x : r) rhs *= 1.0 + t * x;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("polynomial identity: pinned examples") {
  CHECK(poly_identity_lhs(3.0, 3.0, 2) == doctest::Approx(27.0));
  CHECK(poly_identity_lhs(2.0, 1.0, 2) == doctest::Approx(12.0));
}

TEST_CASE("polynomial identity: randomized") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = u(rng), y = u(rng);
    const int k = 1 + static_cast<int>(rng() % 10);
    const double lhs = poly_identity_lhs(x, y, k);
    const double rhs = (k + 1) * std::pow(x, k);
    // relative to the summand scale: the identity cancels terms of size
    // max(|x|,|y|)^k, which bounds the attainable accuracy
    const double scale = (k + 1) * std::pow(std::max(std::abs(x), std::abs(y)), k);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + scale));
  }
}

TEST_CASE("vandermonde n=1 matches the direct 2x2 inverse") {
  auto vi = vandermonde_inverse(1);
  CHECK(vi.c[0][0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(vi.c[0][1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(vi.c[1][0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(vi.c[1][1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("vandermonde: f_i(k) = delta_ik and inverse product") {
  for (int n = 1; n <= 6; ++n) {
    auto vi = vandermonde_inverse(n);
    for (int i = 1; i <= n + 1; ++i)
      for (int k = 1; k <= n + 1; ++k)
        CHECK(std::abs(vi.f(i, k) - (i == k ? 1.0 : 0.0)) < 1e-10);
    for (int i = 1; i <= n + 1; ++i)
      for (int k = 1; k <= n + 1; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= n + 1; ++j)
          acc += vi.c[i - 1][j - 1] * std::pow(static_cast<double>(k), j);
        CHECK(std::abs(acc - (i == k ? 1.0 : 0.0)) < 1e-9);
      }
  }
  CHECK_THROWS_AS(vandermonde_inverse(13), ConfigError);
}

TEST_CASE("constant curvature model: Kronecker pattern and projection") {
  auto t = constant_curvature_model(2, 2.0);
  CHECK(t(0, 0, 0, 0) == doctest::Approx(2.0));
  CHECK(t(0, 0, 1, 1) == doctest::Approx(1.0));
  CHECK(t(1, 1, 1, 1) == doctest::Approx(2.0));
  // dimension 1: holomorphic sectional = bisectional, single component
  auto t1 = constant_curvature_model(1, 2.0);
  CHECK(t1(0, 0, 0, 0) == doctest::Approx(2.0));
  // model minus its own projection is zero
  auto pr = t.constant_projection();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          CHECK(std::abs(t(i, j, k, l) - pr(i, j, k, l)) < 1e-14);
}

TEST_CASE("appendix footnote: K = 1/2 perpendicular, K = 2 identical") {
  auto t = constant_curvature_model(2, 2.0);
  RealVector w1{1.0, 0.0, 0.0, 0.0};
  RealVector e2{0.0, 1.0, 0.0, 0.0};
  CHECK(sectional_from_bisectional(t, w1, e2) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(sectional_from_bisectional(t, w1, apply_J(w1)) ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("precondition violations raise GeometryError") {
  auto t = constant_curvature_model(2, 2.0);
  RealVector w1{1.0, 0.0, 0.0, 0.0};
  RealVector bad{0.5, 0.0, 0.0, 0.0};  // not unit
  CHECK_THROWS_AS(sectional_from_bisectional(t, w1, bad), GeometryError);
  // intermediate plane geometry (neither identical nor perpendicular)
  const double c = std::cos(0.7), s = std::sin(0.7);
  RealVector mid{0.0, s, c, 0.0};  // mixes Jw1 (third slot) with e2
  CHECK_THROWS_AS(sectional_from_bisectional(t, w1, mid), GeometryError);
}

namespace {
PointCurvatureTensor random_tensor(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
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
RealVector perp_plane(const RealVector& w, std::mt19937_64& rng) {
  RealVector jw = apply_J(w);
  while (true) {
    RealVector v = random_unit(static_cast<int>(w.size()), rng);
    const double a = real_dot(v, w), b = real_dot(v, jw);
    for (size_t i = 0; i < v.size(); ++i) v[i] -= a * w[i] + b * jw[i];
    const double nrm = std::sqrt(real_dot(v, v));
    if (nrm < 1e-6) continue;
    for (auto& x : v) x /= nrm;
    return v;
  }
}
}  // namespace

TEST_CASE("stored symmetries hold exactly after symmetrize") {
  std::mt19937_64 rng(13);
  for (int n : {2, 3}) {
    auto t = random_tensor(n, rng);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            CHECK(t(i, j, k, l) == t(k, j, i, l));
            CHECK(t(i, j, k, l) == t(i, l, k, j));
            CHECK(t(i, j, k, l) == t(k, l, i, j));
            CHECK(t(i, j, k, l) == t(j, i, l, k));
          }
  }
}

TEST_CASE("conversion formula matches the real-side oracle on random tensors") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    auto t = random_tensor(n, rng);
    RealVector w1 = random_unit(2 * n, rng);
    RealVector w2 = perp_plane(w1, rng);
    CHECK(std::abs(sectional_from_bisectional(t, w1, w2) -
                   sectional_real_oracle(t, w1, w2)) < 1e-10);
    CHECK(std::abs(sectional_from_bisectional(t, w1, apply_J(w1)) -
                   sectional_real_oracle(t, w1, apply_J(w1))) < 1e-10);
  }
}

TEST_CASE("polarization identity: complex side equals real side") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    auto t = random_tensor(n, rng);
    RealVector x = random_unit(2 * n, rng);
    RealVector y = perp_plane(x, rng);  // y perp x, y perp Jx
    std::vector<std::complex<double>> zu(n), zv(n);
    for (int a = 0; a < n; ++a) {
      zu[a] = {x[a], x[n + a]};
      zv[a] = {y[a], y[n + a]};
    }
    const double lhs = t.bisectional(zu, zv);
    // R(x,y,y,x) + R(x,Jy,Jy,x), each by the brute-force real-side route
    RealVector jy = apply_J(y);
    const double rhs = sectional_real_oracle(t, x, y) + sectional_real_oracle(t, x, jy);
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("Cor 12.2: certified bisectional <= 1 implies K <= 2") {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(0.2, 0.9);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2;
    const double lam = u(rng);
    auto t = constant_curvature_model(n, 2.0 * lam);
    auto noise = random_tensor(n, rng);
    double l1 = 0.0;
    for (size_t i = 0; i < noise.raw_size(); ++i) l1 += std::abs(noise.raw()[i]);
    const double eps = std::min(0.4 * lam, 0.4 * (1.0 - lam)) / (l1 + 1.0);
    for (size_t i = 0; i < t.raw_size(); ++i) t.raw()[i] += eps * noise.raw()[i];
    RealVector w1 = random_unit(2 * n, rng);
    RealVector w2 = perp_plane(w1, rng);
    CHECK(sectional_from_bisectional(t, w1, w2) <= 2.0 + 1e-12);
    CHECK(sectional_from_bisectional(t, w1, apply_J(w1)) <= 2.0 + 1e-12);
  }
}
