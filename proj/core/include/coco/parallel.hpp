#pragma once

#include <functional>

namespace coco {

/// Worker cap: COCO_THREADS when set, hardware concurrency otherwise.
int max_threads();

/// Runs body(0..n-1) across worker threads. Tasks must write only to their
/// own slots so results are independent of scheduling.
void parallel_for(long long n, const std::function<void(long long)>& body);

}  // namespace coco
