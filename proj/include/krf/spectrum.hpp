#ifndef KRF_SPECTRUM_HPP
#define KRF_SPECTRUM_HPP

#include "krf/geometry.hpp"

namespace krf {

/// Ascending positive eigenvalues of -Delta_omega on invariant functions
/// (the zero mode of the constants is dropped).
///
/// Discretizes the Sturm-Liouville form -(n f' u'^{n-1})' = lambda v f with
/// the conservative 3-point flux scheme and applies one Richardson step
/// (solve at h and 2h) to reach 4th-order eigenvalues.
Field laplacian_spectrum(const ReducedMetricState& state, int count);

/// Eigenpairs without Richardson (for eigenvector access, e.g. the Lambda_1
/// projection). Returns `count` ascending positive eigenvalues and the
/// matching eigenvectors as rows.
struct SpectrumPairs {
  Field values;
  std::vector<Field> vectors;
};
SpectrumPairs laplacian_eigenpairs(const ReducedMetricState& state, int count);

}  // namespace krf

#endif
