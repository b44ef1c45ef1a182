#ifndef HMMWAVE_PARALLEL_HPP
#define HMMWAVE_PARALLEL_HPP

#include <cstdint>
#include <functional>

namespace hmmwave {

// Worker pool size: config value, overridden by HMMWAVE_WORKERS, 0 = hardware.
void set_worker_count(int n);
int worker_count();

// Static partition of [0, n) into blocks handed to fn(block_index).
// Every block's work is independent and writes disjoint outputs, so results
// are bit-identical for any worker count. Nested calls run serially.
void parallel_for_blocks(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace hmmwave

#endif
