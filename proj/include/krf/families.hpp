#ifndef KRF_FAMILIES_HPP
#define KRF_FAMILIES_HPP

#include <random>
#include <span>
#include <utility>

#include "krf/geometry.hpp"

namespace krf {

/// phi = sum_i a_i sech(s - c_i), with closed-form derivatives. The sech
/// tails decay like the metric itself (e^{-|s|}), exercising the generic
/// smooth-perturbation asymptotics.
DerivBundle sech_bundle(const ReducedGrid& g,
                        std::span<const std::pair<double, double>> bumps);

/// Random admissible sech superposition (retries until positive).
ReducedMetricState random_analytic_state(const ReducedMetricState& reference,
                                         std::mt19937_64& rng, int n_bumps,
                                         double amplitude);

/// Bundle of the fully translated state u(s+t) - u_ref(s), where u is the
/// reference plus sech bumps; used for dilation-orbit derivatives.
DerivBundle translated_state_bundle(const ReducedGrid& g,
                                    std::span<const std::pair<double, double>> bumps,
                                    double t);

}  // namespace krf

#endif
