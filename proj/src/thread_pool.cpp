#include "mkvlab/thread_pool.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace mkvlab {

ThreadPool::ThreadPool(std::size_t threads) {
    const std::size_t extra = threads > 1 ? threads - 1 : 0;
    for (std::size_t i = 0; i < extra; ++i) workers_.emplace_back([this, i] { worker_loop(i + 1); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& w : workers_) w.join();
}

namespace {

std::pair<std::size_t, std::size_t> block_range(std::size_t n, std::size_t parts, std::size_t id) {
    const std::size_t base = n / parts, rem = n % parts;
    const std::size_t begin = id * base + std::min(id, rem);
    return {begin, begin + base + (id < rem ? 1 : 0)};
}

}  // namespace

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (workers_.empty() || n < 2 * size()) {
        if (n) body(0, n);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        n_ = n;
        pending_ = workers_.size();
        ++generation_;
    }
    start_cv_.notify_all();
    const auto [b, e] = block_range(n, size(), 0);
    body(b, e);
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
}

void ThreadPool::worker_loop(std::size_t id) {
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t, std::size_t)>* body;
        std::size_t n;
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            body = body_;
            n = n_;
        }
        const auto [b, e] = block_range(n, size(), id);
        if (b < e) (*body)(b, e);
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) done_cv_.notify_one();
        }
    }
}

std::size_t resolve_thread_count(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MKVLAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace mkvlab
