#pragma once

#include <cstddef>
#include <functional>

namespace dpsf {

/// Worker count: DIPOLE_PSF_THREADS when set to a positive integer, else the hardware concurrency.
unsigned thread_count();

/// Calls body(i) for every i in [0, n). Work items are independent, so the
/// result never depends on how they are distributed. The first exception thrown
/// by any item is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dpsf
