#include "spinach/kb/rate_limiter.hpp"

#include <thread>

namespace spinach::kb {

void RateLimiter::acquire()
{
    Clock::time_point start;
    {
        std::lock_guard lock(mutex_);
        auto now = Clock::now();
        start = std::max(now, next_slot_);
        next_slot_ = start + interval_;
    }
    std::this_thread::sleep_until(start);
}

} // namespace spinach::kb
