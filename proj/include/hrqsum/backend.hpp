#pragma once

namespace hrqsum {

/// Selects the implementation of a data-parallel kernel. kSerial is the
/// plain loop kept as the reference; kParallel is the OpenMP version whose
/// output does not depend on the thread count.
enum class Backend { kSerial, kParallel };

/// Caps OpenMP workers for subsequent parallel kernels (0 leaves the
/// runtime default).
void set_thread_count(int threads);
int thread_count();

}  // namespace hrqsum
