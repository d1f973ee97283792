#ifndef STFRAG_PARALLEL_HPP
#define STFRAG_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace stfrag::par {

// Hardware count, overridable through STFRAG_THREADS.
int default_threads();

// Static contiguous partition of [begin, end): deterministic regardless of
// scheduling since workers write disjoint ranges.
void parallel_for(std::size_t begin, std::size_t end, int nthreads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace stfrag::par

#endif
