#include "krf/fd.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace krf {
namespace fd {

Field extend(const Field& y, const ReducedGrid& g, TailSlopes slopes, int ng) {
  const int n = static_cast<int>(y.size());
  const double h = g.h, L = g.L;
  Field out(n + 2 * ng);
  std::copy(y.begin(), y.end(), out.begin() + ng);

  // right tail: y - slope*s = A + B e^{-s}, fit on the last two samples
  {
    const double s1 = g.s[n - 2], s0 = g.s[n - 1];
    const double y1 = y[n - 2] - slopes.right * s1;
    const double y0 = y[n - 1] - slopes.right * s0;
    const double e1 = std::exp(-s1), e0 = std::exp(-s0);
    const double B = (y1 - y0) / (e1 - e0);
    const double A = y0 - B * e0;
    for (int k = 1; k <= ng; ++k) {
      const double s = L + k * h;
      out[ng + n - 1 + k] = A + B * std::exp(-s) + slopes.right * s;
    }
  }
  // left tail: y - slope*s = A + B e^{+s}
  {
    const double s0 = g.s[0], s1 = g.s[1];
    const double y0 = y[0] - slopes.left * s0;
    const double y1 = y[1] - slopes.left * s1;
    const double f0 = std::exp(s0), f1 = std::exp(s1);
    const double B = (y1 - y0) / (f1 - f0);
    const double A = y0 - B * f0;
    for (int k = 1; k <= ng; ++k) {
      const double s = -L - k * h;
      out[ng - k] = A + B * std::exp(s) + slopes.left * s;
    }
  }
  return out;
}

Field d1(const Field& y, const ReducedGrid& g, TailSlopes slopes) {
  const int n = static_cast<int>(y.size());
  Field e = extend(y, g, slopes, 2), out(n);
  const double c = 1.0 / (12.0 * g.h);
  for (int i = 0; i < n; ++i) {
    const double* p = e.data() + i;  // p[2] is sample i
    out[i] = (p[0] - 8.0 * p[1] + 8.0 * p[3] - p[4]) * c;
  }
  return out;
}

Field d2(const Field& y, const ReducedGrid& g, TailSlopes slopes) {
  const int n = static_cast<int>(y.size());
  Field e = extend(y, g, slopes, 2), out(n);
  const double c = 1.0 / (12.0 * g.h * g.h);
  for (int i = 0; i < n; ++i) {
    const double* p = e.data() + i;
    out[i] = (-p[0] + 16.0 * p[1] - 30.0 * p[2] + 16.0 * p[3] - p[4]) * c;
  }
  return out;
}

Field d3(const Field& y, const ReducedGrid& g, TailSlopes slopes) {
  const int n = static_cast<int>(y.size());
  Field e = extend(y, g, slopes, 3), out(n);
  const double c = 1.0 / (8.0 * g.h * g.h * g.h);
  for (int i = 0; i < n; ++i) {
    const double* p = e.data() + i;  // p[3] is sample i
    out[i] = (p[0] - 8.0 * p[1] + 13.0 * p[2] - 13.0 * p[4] + 8.0 * p[5] - p[6]) * c;
  }
  return out;
}

Field d4(const Field& y, const ReducedGrid& g, TailSlopes slopes) {
  const int n = static_cast<int>(y.size());
  Field e = extend(y, g, slopes, 3), out(n);
  const double h2 = g.h * g.h;
  const double c = 1.0 / (6.0 * h2 * h2);
  for (int i = 0; i < n; ++i) {
    const double* p = e.data() + i;
    out[i] = (-p[0] + 12.0 * p[1] - 39.0 * p[2] + 56.0 * p[3] - 39.0 * p[4] +
              12.0 * p[5] - p[6]) *
             c;
  }
  return out;
}

Field d1_order2(const Field& y, const ReducedGrid& g, TailSlopes slopes) {
  const int n = static_cast<int>(y.size());
  Field e = extend(y, g, slopes, 1), out(n);
  const double c = 1.0 / (2.0 * g.h);
  for (int i = 0; i < n; ++i) out[i] = (e[i + 2] - e[i]) * c;
  return out;
}

Field d2_order2(const Field& y, const ReducedGrid& g, TailSlopes slopes) {
  const int n = static_cast<int>(y.size());
  Field e = extend(y, g, slopes, 1), out(n);
  const double c = 1.0 / (g.h * g.h);
  for (int i = 0; i < n; ++i) out[i] = (e[i] - 2.0 * e[i + 1] + e[i + 2]) * c;
  return out;
}

namespace {
// Gregory order-6 endpoint correction weights (added to the 1/2,1,...,1,1/2
// trapezoid weights at each end).
const double kGregory[7] = {-23681.0 / 120960.0, 55688.0 / 120960.0,
                            -66109.0 / 120960.0, 57024.0 / 120960.0,
                            -31523.0 / 120960.0, 9976.0 / 120960.0,
                            -1375.0 / 120960.0};
}  // namespace

double quad(const Field& y, double h) {
  const int n = static_cast<int>(y.size());
  double acc = 0.5 * (y[0] + y[n - 1]);
  for (int i = 1; i + 1 < n; ++i) acc += y[i];
  if (n >= 14) {
    for (int i = 0; i < 7; ++i) acc += kGregory[i] * (y[i] + y[n - 1 - i]);
  }
  return acc * h;
}

double& Banded::at(int i, int j) {
  // LAPACK band storage: AB(kl + ku + i - j, j), 0-based column-major
  return ab[static_cast<size_t>(j) * ldab() + (kl + ku + i - j)];
}

void Banded::zero(int n_) {
  n = n_;
  ab.assign(static_cast<size_t>(ldab()) * n_, 0.0);
}

namespace {

// Build the operator matrix by applying `op` to the ghost-closed stencil.
// Interior rows get the closed-form weights; the 2 rows at either end are
// assembled by applying the function form to basis vectors (exactly
// consistent with the function path, closure included).
template <typename Op>
Banded assemble(const ReducedGrid& g, TailSlopes slopes, Op op, const double* w,
                int reach, double scale) {
  Banded m;
  m.zero(g.n_points);
  const int n = g.n_points;
  for (int i = 2; i < n - 2; ++i)
    for (int k = -reach; k <= reach; ++k) m.at(i, i + k) = w[k + reach] * scale;
  // boundary rows via basis probes (closure is linear in the outer samples)
  Field e(n, 0.0);
  for (int j : {0, 1, 2, 3, n - 4, n - 3, n - 2, n - 1}) {
    if (j < 0 || j >= n) continue;
    e.assign(n, 0.0);
    e[j] = 1.0;
    Field col = op(e, g, slopes);
    for (int i : {0, 1, n - 2, n - 1}) {
      if (std::abs(i - j) <= m.ku && col[i] != 0.0) m.at(i, j) = col[i];
    }
  }
  return m;
}

}  // namespace

Banded d1_matrix(const ReducedGrid& g, TailSlopes slopes) {
  static const double w[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  return assemble(g, slopes, [](const Field& y, const ReducedGrid& gg, TailSlopes sl) { return d1(y, gg, sl); },
                  w, 2, 1.0 / (12.0 * g.h));
}

Banded d2_matrix(const ReducedGrid& g, TailSlopes slopes) {
  static const double w[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  return assemble(g, slopes, [](const Field& y, const ReducedGrid& gg, TailSlopes sl) { return d2(y, gg, sl); },
                  w, 2, 1.0 / (12.0 * g.h * g.h));
}

void solve_banded(const Banded& a, Field& b) {
  Banded lu = a;  // dgbsv factorizes in place
  std::vector<lapack_int> ipiv(a.n);
  lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, a.n, a.kl, a.ku, 1,
                                  lu.ab.data(), lu.ldab(), ipiv.data(), b.data(),
                                  a.n);
  if (info != 0)
    throw NumericalError("banded solve failed, dgbsv info=" + std::to_string(info));
}

}  // namespace fd
}  // namespace krf
