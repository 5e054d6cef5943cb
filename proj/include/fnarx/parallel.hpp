#pragma once

// Thread control for the OpenMP kernels. Every parallel kernel in the library
// has a `*_serial` twin that runs the same per-item code in a plain loop; the
// test suite checks the two agree bitwise.

namespace fnarx {

/// Sets the OpenMP thread count used by all kernels (n <= 0 keeps the default).
void set_num_threads(int n);

int num_threads();

}  // namespace fnarx
