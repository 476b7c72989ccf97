#pragma once

#include <cstddef>
#include <functional>

namespace vqa {

/// Logical core count, at least 1.
int default_thread_count();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks write
/// into caller-owned slots; any reduction happens afterwards in index order,
/// so results never depend on the thread count. The first exception thrown
/// by a task (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace vqa
