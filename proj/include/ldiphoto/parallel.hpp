#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace ldiphoto {

/// Worker count used by data-parallel loops. 1 disables threading.
inline int& thread_count() {
    static int count = 1;
    return count;
}

/// Runs fn(i) for i in [begin, end) split into contiguous blocks across worker threads.
/// fn must only write to state owned by index i.
template <typename Fn>
void parallel_for(long begin, long end, Fn&& fn) {
    const long n = end - begin;
    const int workers = int(std::min<long>(thread_count(), n));
    if (workers <= 1) {
        for (long i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
        const long lo = begin + n * w / workers;
        const long hi = begin + n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
}

}  // namespace ldiphoto
