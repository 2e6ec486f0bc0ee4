#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace trafficsim {

    // Fixed set of workers running index-range jobs. Ranges are split statically so the
    // partition of work never depends on timing.
    class ThreadPool {
    public:
        explicit ThreadPool(int threads);
        ~ThreadPool();

        ThreadPool(const ThreadPool &) = delete;
        ThreadPool &operator=(const ThreadPool &) = delete;

        int size() const { return static_cast<int>(workers.size()) + 1; }

        // Calls fn(begin, end) over a partition of [0, count) and waits for all parts.
        // The first exception thrown by any part is rethrown.
        void parallelFor(std::size_t count, const std::function<void(std::size_t, std::size_t)> &fn);

    private:
        void workerLoop(int index);

        std::vector<std::thread> workers;
        std::mutex mutex;
        std::condition_variable wake, done;
        const std::function<void(std::size_t, std::size_t)> *job = nullptr;
        std::size_t jobCount = 0;
        std::size_t generation = 0;
        int remaining = 0;
        bool stopping = false;
        std::exception_ptr failure;
    };

}
