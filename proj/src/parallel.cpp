#include "stfrag/parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace stfrag::par {

int default_threads() {
    if (const char* env = std::getenv("STFRAG_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t begin, std::size_t end, int nthreads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    if (nthreads <= 0) nthreads = default_threads();
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(nthreads), n);
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + n * w / workers;
        const std::size_t hi = begin + n * (w + 1) / workers;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace stfrag::par
