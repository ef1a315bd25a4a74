#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwpm
{
// Worker count from RWPM_WORKERS, else the hardware concurrency.
inline int default_workers()
{
    if (const char* env = std::getenv("RWPM_WORKERS"))
    {
        int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/*!
 * Run fn(task, worker) for task in [0, n) on up to `workers` threads.
 *
 * Tasks are handed out from a shared counter, so idle workers pick up the
 * remaining work. Callers write results into per-task slots and reduce them
 * afterwards in index order, which keeps sums independent of scheduling.
 * The first exception thrown by a task is rethrown after all workers join.
 */
template<class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    workers = std::max(1, std::min<int>(workers, int(std::min<std::size_t>(n, 1 << 20))));
    if (workers <= 1 || n <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i, 0);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto body = [&](int w) {
        for (;;)
        {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try
            {
                fn(i, w);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err)
                    err = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(body, w);
    body(0);
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

}  // namespace rwpm
