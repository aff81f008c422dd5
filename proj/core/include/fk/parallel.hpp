#pragma once

#include <cstddef>
#include <functional>

namespace fk {

/// Worker count: FK_SADDLE_THREADS when set (>= 1), otherwise the hardware
/// concurrency.
unsigned worker_count();

/// Runs body(k) for k in [0, n). Work is split into contiguous chunks, one
/// per worker; results must not depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fk
