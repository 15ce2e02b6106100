#ifndef KRF_COMMON_HPP
#define KRF_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace krf {

using Field = std::vector<double>;

/// Model manifolds carrying the symmetric ansatz.
enum class Manifold { CP1, CP2 };

inline int complex_dim(Manifold m) { return m == Manifold::CP1 ? 1 : 2; }

inline const char* manifold_name(Manifold m) {
  return m == Manifold::CP1 ? "CP1" : "CP2";
}

/// c1^n([M]) = (n+1)^n in the canonical class; this is the total reduced volume.
inline double chern_volume(Manifold m) {
  int n = complex_dim(m);
  double v = 1.0;
  for (int i = 0; i < n; ++i) v *= (n + 1);
  return v;
}

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a candidate potential violates omega_phi > 0.
struct PositivityError : NumericalError {
  int first_bad_index;
  PositivityError(const std::string& what, int idx)
      : NumericalError(what), first_bad_index(idx) {}
};

struct GridMismatchError : std::invalid_argument {
  explicit GridMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid geometric input (orthogonality preconditions etc.).
struct GeometryError : std::invalid_argument {
  explicit GeometryError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace krf

#endif
