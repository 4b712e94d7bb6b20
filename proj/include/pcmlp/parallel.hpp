#pragma once

#include <cstddef>
#include <functional>

namespace pcmlp {

// Worker count used by parallel_for. Defaults to PCMLP_THREADS or 1.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Work is assigned statically and every body
// writes only to its own index, so results do not depend on the thread count.
// Calls made from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pcmlp
