#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mkvlab {

/// Fixed pool of workers for static-partition parallel loops.
/// Work is split into contiguous blocks by index, so results never depend on scheduling
/// as long as each index writes only its own output.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t threads);
    ~ThreadPool();
    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    [[nodiscard]] std::size_t size() const { return workers_.size() + 1; }

    /// Calls body(begin, end) over a partition of [0, n); returns when all blocks finish.
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

private:
    void worker_loop(std::size_t id);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::size_t n_ = 0;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stop_ = false;
};

/// Thread count from an explicit request, else MKVLAB_THREADS, else hardware concurrency.
std::size_t resolve_thread_count(std::size_t requested);

}  // namespace mkvlab
