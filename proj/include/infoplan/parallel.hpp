#pragma once

#include <cstddef>
#include <functional>

namespace infoplan {

/// Number of worker threads data-parallel kernels may use. Zero or negative
/// resets to the hardware default.
void set_max_threads(int threads);
int max_threads();
int hardware_threads();

/// Loop bodies must touch only state owned by their index; results are then
/// identical for any thread count. With one thread this is the plain serial
/// reference loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace infoplan
