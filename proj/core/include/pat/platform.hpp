#pragma once

namespace pat {

// Keeps large tensor buffers on the heap instead of fresh mmap pages. With
// glibc's defaults every activation-sized allocation is mmapped and
// page-faulted again, which costs about a third of training time.
void configure_allocator();

}  // namespace pat
