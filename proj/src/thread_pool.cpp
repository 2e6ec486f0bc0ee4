#include "trafficsim/thread_pool.h"
#include "trafficsim/error.h"

#include <algorithm>

namespace trafficsim {

    ThreadPool::ThreadPool(int threads) {
        if (threads < 1)
            throw ConfigError("thread count must be at least 1");
        for (int i = 1; i < threads; ++i)
            workers.emplace_back([this, i] { workerLoop(i); });
    }

    ThreadPool::~ThreadPool() {
        {
            std::lock_guard lock(mutex);
            stopping = true;
        }
        wake.notify_all();
        for (auto &w : workers)
            w.join();
    }

    namespace {
        std::pair<std::size_t, std::size_t> partRange(std::size_t count, int parts, int index) {
            std::size_t base = count / parts, extra = count % parts;
            std::size_t begin = index * base + std::min<std::size_t>(index, extra);
            std::size_t end = begin + base + (static_cast<std::size_t>(index) < extra ? 1 : 0);
            return {begin, end};
        }
    }

    void ThreadPool::parallelFor(std::size_t count, const std::function<void(std::size_t, std::size_t)> &fn) {
        if (count == 0)
            return;
        if (workers.empty() || count == 1) {
            fn(0, count);
            return;
        }
        {
            std::lock_guard lock(mutex);
            job = &fn;
            jobCount = count;
            remaining = static_cast<int>(workers.size());
            failure = nullptr;
            ++generation;
        }
        wake.notify_all();
        std::exception_ptr own;
        try {
            auto [b, e] = partRange(count, size(), 0);
            if (b < e)
                fn(b, e);
        } catch (...) {
            own = std::current_exception();
        }
        std::unique_lock lock(mutex);
        done.wait(lock, [this] { return remaining == 0; });
        job = nullptr;
        if (own)
            std::rethrow_exception(own);
        if (failure)
            std::rethrow_exception(failure);
    }

    void ThreadPool::workerLoop(int index) {
        std::size_t seen = 0;
        while (true) {
            const std::function<void(std::size_t, std::size_t)> *fn;
            std::size_t count;
            {
                std::unique_lock lock(mutex);
                wake.wait(lock, [&] { return stopping || generation != seen; });
                if (stopping)
                    return;
                seen = generation;
                fn = job;
                count = jobCount;
            }
            std::exception_ptr error;
            try {
                auto [b, e] = partRange(count, size(), index);
                if (b < e)
                    (*fn)(b, e);
            } catch (...) {
                error = std::current_exception();
            }
            {
                std::lock_guard lock(mutex);
                if (error && !failure)
                    failure = error;
                if (--remaining == 0)
                    done.notify_one();
            }
        }
    }

}
