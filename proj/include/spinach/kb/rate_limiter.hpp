#pragma once

#include <chrono>
#include <mutex>

namespace spinach::kb {

/// Spaces request start times at least `interval` apart across all callers.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    explicit RateLimiter(std::chrono::milliseconds interval) : interval_(interval) {}

    /// Blocks until the caller may start its request.
    void acquire();

private:
    std::chrono::milliseconds interval_;
    std::mutex mutex_;
    Clock::time_point next_slot_{};
};

} // namespace spinach::kb
