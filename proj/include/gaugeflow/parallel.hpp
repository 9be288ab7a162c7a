#pragma once

#include <cstddef>
#include <functional>

namespace gaugeflow {

/// Worker count for grid sweeps. Read once from GAUGEFLOW_THREADS; when the
/// variable is absent or invalid every hardware thread is used.
unsigned thread_count();

/// Runs body(i) for i in [0, count). Tasks must write disjoint memory; the
/// result is then independent of the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gaugeflow
