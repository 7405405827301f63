#ifndef CRANIO_PARALLEL_HPP
#define CRANIO_PARALLEL_HPP

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace cranio {

// Process-wide worker count, set once from the CLI --jobs flag.
// Results are bitwise independent of the value: parallel_for is only used
// where iterations write disjoint outputs with a fixed inner order.
int num_jobs();
void set_num_jobs(int jobs);

// Runs fn(i) for i in [0, n). Iterations must not write shared state.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

// Chunked variant: fn(begin, end) over contiguous ranges.
void parallel_for_chunks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

} // namespace cranio

#endif
