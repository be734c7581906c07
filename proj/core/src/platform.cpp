#include "pat/platform.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace pat {

void configure_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);  // glibc caps the threshold at 32 MiB
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace pat
