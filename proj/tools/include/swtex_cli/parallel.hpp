#pragma once

#include <functional>

namespace swtex::cli {

/// Calls fn(0..count-1) on up to `jobs` threads. The first exception thrown
/// by any task is rethrown after all threads finish.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace swtex::cli
