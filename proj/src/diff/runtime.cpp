#include "pinr/runtime.hpp"

#include <cstdlib>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace pinr {

void configure_allocator() {
#if defined(__GLIBC__)
  mallopt(M_TOP_PAD, 512 * 1024 * 1024);
#endif
}

}  // namespace pinr
