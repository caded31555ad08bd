#pragma once

#include <functional>

namespace fsnet {

/// Worker cap: FSNET_THREADS when set, hardware concurrency otherwise.
int worker_count();

/// Override the worker count (0 restores the default). Intended for tests.
void set_worker_count(int n);

/// Runs fn(chunk_index) for every chunk on up to worker_count() threads.
/// Chunk boundaries are the caller's; they must not depend on the worker
/// count if reproducibility is required.
void parallel_chunks(int chunk_count, const std::function<void(int)>& fn);

}  // namespace fsnet
