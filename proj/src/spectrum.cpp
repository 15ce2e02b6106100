#include "krf/spectrum.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace krf {

namespace {

// Eigenvalues (and optionally vectors) of the flux-form discretization on
// the sub-grid given by stride/count.
void solve_on_subgrid(const ReducedMetricState& st, int stride, Field& evals,
                      std::vector<Field>* evecs, int count) {
  const ReducedGrid& g = st.grid();
  const int n = g.dim();
  const int N = (g.n_points - 1) / stride + 1;
  const double h = g.h * stride;

  Field up(N), upp(N), v(N);
  for (int i = 0; i < N; ++i) {
    const int j = i * stride;
    up[i] = st.up()[j];
    upp[i] = st.upp()[j];
    v[i] = n * upp[i] * std::pow(up[i], n - 1);
  }
  // flux coefficient p = n u'^{n-1} at midpoints
  Field pm(N - 1);
  for (int i = 0; i + 1 < N; ++i) {
    const double a = n * std::pow(up[i], n - 1), b = n * std::pow(up[i + 1], n - 1);
    pm[i] = 0.5 * (a + b);
  }

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N);
  Field d(N);
  for (int i = 0; i < N; ++i) d[i] = 1.0 / std::sqrt(v[i]);
  for (int i = 0; i < N; ++i) {
    double diag = 0.0;
    if (i > 0) {
      diag += pm[i - 1];
      S(i, i - 1) = -pm[i - 1] / (h * h) * d[i] * d[i - 1];
    }
    if (i + 1 < N) {
      diag += pm[i];
      S(i, i + 1) = -pm[i] / (h * h) * d[i] * d[i + 1];
    }
    S(i, i) = diag / (h * h) * d[i] * d[i];
  }
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (evecs)
    es.compute(S);
  else
    es.compute(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("laplacian_spectrum: eigensolver did not converge");

  evals.clear();
  if (evecs) evecs->clear();
  for (int i = 0; i < N && static_cast<int>(evals.size()) < count; ++i) {
    const double lam = es.eigenvalues()[i];
    // constants: the discrete zero mode lands at dense-solver roundoff scale
    // (~1e-6 at N=1024); physical eigenvalues sit at O(1)
    if (lam < 1e-3) continue;
    evals.push_back(lam);
    if (evecs) {
      Field f(N);
      for (int k = 0; k < N; ++k) f[k] = es.eigenvectors()(k, i) * d[k];
      evecs->push_back(std::move(f));
    }
  }
}

}  // namespace

Field laplacian_spectrum(const ReducedMetricState& state, int count) {
  const ReducedGrid& g = state.grid();
  if (count > g.n_points / 4)
    throw ConfigError("laplacian_spectrum: count must be <= n_points/4");
  Field fine, coarse;
  solve_on_subgrid(state, 1, fine, nullptr, count + 2);
  solve_on_subgrid(state, 2, coarse, nullptr, count + 2);
  Field out;
  for (int i = 0; i < count; ++i) {
    if (i < static_cast<int>(coarse.size()))
      out.push_back((4.0 * fine[i] - coarse[i]) / 3.0);
    else
      out.push_back(fine[i]);
  }
  return out;
}

SpectrumPairs laplacian_eigenpairs(const ReducedMetricState& state, int count) {
  if (count > state.grid().n_points / 4)
    throw ConfigError("laplacian_eigenpairs: count must be <= n_points/4");
  SpectrumPairs sp;
  std::vector<Field> vecs;
  solve_on_subgrid(state, 1, sp.values, &vecs, count);
  sp.vectors = std::move(vecs);
  return sp;
}

}  // namespace krf
