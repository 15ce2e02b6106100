#ifndef KRF_VERIFY_HOOKS_HPP
#define KRF_VERIFY_HOOKS_HPP

namespace krf {

/// Mutation-testing hook: when the process runs with KRF_MUTATE=<name>,
/// the named internal coefficient is deliberately perturbed so the verify
/// suites can demonstrate falsifiability. Never set in production.
bool mutation_enabled(const char* name);

}  // namespace krf

#endif
