#include "krf/verify_hooks.hpp"

#include <cstdlib>
#include <cstring>

namespace krf {

bool mutation_enabled(const char* name) {
  const char* m = std::getenv("KRF_MUTATE");
  return m != nullptr && std::strcmp(m, name) == 0;
}

}  // namespace krf
