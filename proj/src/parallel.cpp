#include "arwp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace arwp {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) {
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    g_threads = n;
}

int thread_count() { return g_threads; }

void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& f) {
    int workers = static_cast<int>(std::min<Eigen::Index>(g_threads, n));
    if (workers <= 1) {
        for (Eigen::Index i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        Eigen::Index lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (Eigen::Index i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace arwp
