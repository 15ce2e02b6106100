#ifndef KRF_CURVATURE_ALGEBRA_HPP
#define KRF_CURVATURE_ALGEBRA_HPP

#include <array>
#include <complex>
#include <vector>

#include "krf/common.hpp"

namespace krf {

/// Eigenvalues of the Ricci endomorphism at a point.
using RicciSpectrum = std::vector<double>;

/// Elementary symmetric polynomials (sigma_0, ..., sigma_n) of the spectrum,
/// i.e. the coefficients of Prod (1 + t r_i). sigma_0 = 1, sigma_1 = R.
std::vector<double> sigma_k(const RicciSpectrum& spectrum);

/// Left side of the polynomial identity
///   sum_{i=0}^k x^i y^{k-i} + (x-y) sum_{i=0}^k i x^{i-1} y^{k-i},
/// which equals (k+1) x^k.
double poly_identity_lhs(double x, double y, int k);

/// Inverse of the Vandermonde matrix V_{jk} = k^j (j,k = 1..n+1) via the
/// Lagrange-type polynomials f_i(x) = x Prod_{k != i}(x-k) / (i Prod (i-k)),
/// whose coefficients are the rows c_{ij}; plus the row-sum constants
/// upsilon_k = (n+1)/C(n+1,k) * sum_i c_{ik}.
struct VandermondeInverse {
  int n;                                  // dimension parameter; matrix is (n+1)x(n+1)
  std::vector<std::vector<double>> c;     // c[i-1][j-1]
  std::vector<double> upsilon;            // upsilon[k-1], k = 1..n+1
  /// f_i(x) = sum_j c_{ij} x^j
  double f(int i, double x) const;
};
VandermondeInverse vandermonde_inverse(int n);

/// Curvature tensor components R(u_i, ubar_j, u_k, ubar_l) at a point in a
/// fixed orthonormal unitary frame, stored real with all Kaehler symmetries
/// enforced on construction.
class PointCurvatureTensor {
 public:
  explicit PointCurvatureTensor(int dim);

  int dim() const { return n_; }

  double operator()(int i, int j, int k, int l) const {
    return a_[idx(i, j, k, l)];
  }
  /// Set a component; the full symmetry orbit is written.
  void set(int i, int j, int k, int l, double value);
  /// Symmetrize arbitrary stored data over the Kaehler symmetry group.
  void symmetrize();
  double* raw() { return a_.data(); }
  size_t raw_size() const { return a_.size(); }

  /// Bisectional pairing R(v, vbar, w, wbar) for (1,0) vectors given by
  /// complex frame coefficients.
  double bisectional(const std::vector<std::complex<double>>& v,
                     const std::vector<std::complex<double>>& w) const;

  /// Holomorphic sectional value R(v, vbar, v, vbar) for a unit frame vector.
  double holomorphic(int i) const { return (*this)(i, i, i, i); }

  /// Full complexified multilinear evaluation; each argument is a pair
  /// (holo coefficients, antiholo coefficients) over the frame.
  std::complex<double> eval(const std::vector<std::complex<double>>& a1,
                            const std::vector<std::complex<double>>& b1,
                            const std::vector<std::complex<double>>& a2,
                            const std::vector<std::complex<double>>& b2,
                            const std::vector<std::complex<double>>& a3,
                            const std::vector<std::complex<double>>& b3,
                            const std::vector<std::complex<double>>& a4,
                            const std::vector<std::complex<double>>& b4) const;

  /// Constant-curvature projection c (g g + g g) with c from the full trace.
  PointCurvatureTensor constant_projection() const;

 private:
  size_t idx(int i, int j, int k, int l) const {
    return ((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }
  int n_;
  std::vector<double> a_;
};

/// R_{ij kl} = c (delta_ij delta_kl + delta_il delta_kj) with holomorphic
/// sectional value R(u,ubar,u,ubar) = holomorphic_sectional_value (= 2c).
PointCurvatureTensor constant_curvature_model(int n, double holomorphic_sectional_value);

/// A real tangent vector in the frame (e_1..e_n, Je_1..Je_n).
using RealVector = std::vector<double>;

/// Complex structure J in the real frame.
RealVector apply_J(const RealVector& w);
double real_dot(const RealVector& a, const RealVector& b);

/// Sectional curvature K(w1, w2) of the real plane via the bisectional
/// conversion formula; w1, w2 must be orthonormal with complex planes either
/// identical or perpendicular (tolerance 1e-10), else GeometryError.
double sectional_from_bisectional(const PointCurvatureTensor& t,
                                  const RealVector& w1, const RealVector& w2);

/// Independent real-side route: K = R(w1, w2, w2, w1) evaluated by expanding
/// the real vectors in the complexified tensor. Oracle for the conversion.
double sectional_real_oracle(const PointCurvatureTensor& t, const RealVector& w1,
                             const RealVector& w2);

}  // namespace krf

#endif
