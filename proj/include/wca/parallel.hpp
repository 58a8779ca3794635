#ifndef WCA_PARALLEL_HPP
#define WCA_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace wca {

// Thread cap: WCA_THREADS if set (>=1), otherwise hardware concurrency.
inline int thread_cap() {
    if (const char* env = std::getenv("WCA_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, n). Work items must be independent; callers keep
// results deterministic by writing into index i of a preallocated buffer.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int threads = thread_cap();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int use = threads < static_cast<int>(n) ? threads : static_cast<int>(n);
    pool.reserve(use);
    for (int t = 0; t < use; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && first_error) std::rethrow_exception(first_error);
}

}  // namespace wca

#endif
