#pragma once

namespace pinr {

// Keeps large tensor buffers in the heap instead of returning them to the OS
// after every tape, which otherwise makes training page-fault bound. Process
// wide; call once at startup. No-op on non-glibc platforms.
void configure_allocator();

}  // namespace pinr
