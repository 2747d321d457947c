#pragma once

#include <cstddef>
#include <functional>

namespace rfpca {

/// Worker cap used by parallel_for. Defaults to the RFPCA_THREADS environment
/// variable, else the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t threads);

/// Runs body(i) for i in [0, count). Each index is executed exactly once;
/// callers must make body(i) write only to slot i so results do not depend
/// on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace rfpca
