#ifndef KRF_GEOMETRY_HPP
#define KRF_GEOMETRY_HPP

#include <optional>
#include <span>

#include "krf/fd.hpp"
#include "krf/grid.hpp"

namespace krf {

/// Pointwise curvature data of a symmetric metric.
///
/// r_rad/r_tan are the eigenvalues of the Ricci endomorphism in the radial
/// and tangential directions of the unitary eigenframe; bisec_* are the
/// holomorphic bisectional curvatures in that frame (radial-radial,
/// radial-tangential, tangential-tangential). On CP1 only bisec_A is
/// populated (the Gauss-type value) and r_tan/B/C are empty.
struct CurvatureField {
  Field r_rad;
  Field r_tan;
  Field scalar;   // R = r_rad + (n-1) r_tan
  Field ric_sq;   // |Ric|^2 = r_rad^2 + (n-1) r_tan^2
  Field bisec_A;
  Field bisec_B;
  Field bisec_C;

  double min_bisectional() const;
};

/// Exact derivative data of the reference potential u_ref = (n+1) log(1+e^s).
struct ReferenceData {
  Field u, up, upp, uppp, upppp;
  static ReferenceData make(const ReducedGrid& g);
};

/// Analytically supplied derivative bundle of a perturbation phi
/// (used by test families where closed-form derivatives are available).
struct DerivBundle {
  Field phi, d1, d2, d3, d4;
};

/// A symmetric Kaehler metric on CP1/CP2: reference plus perturbation phi,
/// with all derived fields computed at construction. Immutable afterwards.
class ReducedMetricState {
 public:
  const ReducedGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }

  const Field& phi() const { return phi_; }
  double phi_mean() const { return phi_mean_; }
  const Field& u() const { return u_; }            // full potential samples
  const Field& ref_u() const { return ref_.u; }
  const Field& ref_up() const { return ref_.up; }
  const Field& ref_upp() const { return ref_.upp; }

  const Field& up() const { return up_; }          // lambda_tan
  const Field& upp() const { return upp_; }        // lambda_rad
  const Field& phi_d1() const { return p1_; }
  const Field& phi_d2() const { return p2_; }

  /// log(omega_phi^n / omega^n) samples.
  const Field& log_ratio() const { return log_ratio_; }

  /// Ricci form primitive-derivative fields: Ric has radial density psi''
  /// and tangential density psi' in the wedge calculus.
  const Field& psi_p() const { return psip_; }
  const Field& psi_pp() const { return psipp_; }

  const CurvatureField& curvature() const { return curv_; }

  /// Reduced volume density v(s) = n u'' u'^{n-1}; total integrates to c1^n.
  const Field& volume_density() const { return vdens_; }
  double volume() const { return volume_; }

  bool analytic() const { return analytic_; }
  /// |phi'(+-L)|: deviation of the momentum variable from the reference at
  /// the truncation boundary.
  double boundary_slack() const { return boundary_slack_; }

  /// Quadrature of f against omega_phi^n (Gregory + analytic tails).
  double integrate(const Field& f) const;

  /// Complex Laplacian of a sampled invariant function:
  /// Delta f = f''/u'' + (n-1) f'/u'.
  Field laplacian(const Field& f, fd::TailSlopes slopes = {}) const;

  /// |nabla f|^2 = f'^2 / u''  (complex convention, so that
  /// int |nabla f|^2 = -int f Delta f).
  Field grad_norm_sq(const Field& f, fd::TailSlopes slopes = {}) const;

  /// h potential: Ric - omega_phi = i ddbar h with int (e^h - 1) omega_phi^n = 0.
  const Field& h_potential() const { return h_; }

  friend ReducedMetricState build_reference(Manifold, int, double);
  friend ReducedMetricState metric_from_potential(const ReducedMetricState&,
                                                  const Field&);
  friend ReducedMetricState metric_from_bundle(const ReducedGrid&,
                                               const DerivBundle&);

 private:
  ReducedMetricState() = default;
  void finish(const Field& uppp, const Field& upppp);

  ReducedGrid grid_;
  ReferenceData ref_;
  bool analytic_ = false;
  Field phi_, u_;
  double phi_mean_ = 0.0;
  double boundary_slack_ = 0.0;
  Field p1_, p2_;
  Field up_, upp_;
  Field log_ratio_;
  Field psip_, psipp_;
  Field vdens_;
  Field h_;
  CurvatureField curv_;
  double volume_ = 0.0;
};

/// Fubini-Study reference scaled so that Ric(omega) = omega (hence h == 0).
ReducedMetricState build_reference(Manifold m, int n_points, double L);

/// State omega_phi = omega + i ddbar phi; throws PositivityError with the
/// first violating grid index if omega_phi > 0 fails.
ReducedMetricState metric_from_potential(const ReducedMetricState& reference,
                                         const Field& phi);

/// State from a closed-form derivative bundle (no finite differencing).
ReducedMetricState metric_from_bundle(const ReducedGrid& g, const DerivBundle& b);

// ---------------------------------------------------------------------------
// Wedge calculus. Every 2n-form integrand of the reduced ansatz is a product
// of diagonal (1,1)-forms; its density is d/ds of the product of the
// primitive first derivatives. Tail corrections use the known limits of that
// product at the poles.
// ---------------------------------------------------------------------------

struct FormPrimitive {
  const Field* ap;   // a'(s)
  const Field* app;  // a''(s)
  double limL;       // a'(-infty)
  double limR;       // a'(+infty)
};

FormPrimitive prim_omega(const ReducedMetricState& st);
FormPrimitive prim_omega_ref(const ReducedMetricState& st);
FormPrimitive prim_ricci(const ReducedMetricState& st);

struct WedgeDensity {
  Field density;
  double prodL = 1.0, prodR = 1.0;  // product of a' at -L / +L
  double limL = 1.0, limR = 1.0;    // product of limits at the poles
};

/// Wedge of dim(M) primitives (counted with multiplicity).
WedgeDensity wedge(const ReducedGrid& g, std::span<const FormPrimitive> parts);

/// int f * wedge-density ds with analytic tail corrections
/// f(+-L) * (pole limit - boundary value of the primitive product).
double integrate_against(const ReducedGrid& g, const Field& f, const WedgeDensity& w);

/// Plain tail-corrected quadrature of an exponentially decaying integrand.
double integrate_decaying(const ReducedGrid& g, const Field& f);

}  // namespace krf

#endif
