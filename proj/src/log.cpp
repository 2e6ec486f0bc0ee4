#include "trafficsim/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace trafficsim::log {

    namespace {
        std::atomic<Level> currentLevel{Level::Warn};
        std::mutex writeMutex;

        const char *tag(Level level) {
            switch (level) {
                case Level::Debug: return "debug";
                case Level::Info: return "info";
                case Level::Warn: return "warn";
                case Level::Error: return "error";
                default: return "";
            }
        }
    }

    void setLevel(Level level) { currentLevel = level; }

    Level level() { return currentLevel; }

    void write(Level level, std::string_view message) {
        if (level < currentLevel.load(std::memory_order_relaxed))
            return;
        std::lock_guard<std::mutex> guard(writeMutex);
        std::cerr << "[" << tag(level) << "] " << message << '\n';
    }

}
