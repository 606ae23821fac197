#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace hotlock {

using Clock = std::chrono::steady_clock;

// Sticky wake-up flag. set() before wait_until() is not lost; waiters
// must re-check their own predicate after every return.
class Event {
 public:
  void set() {
    {
      std::lock_guard lk(mu_);
      signaled_ = true;
    }
    cv_.notify_all();
  }

  // Returns true if signaled, false on deadline. Consumes the signal.
  bool wait_until(Clock::time_point deadline) {
    std::unique_lock lk(mu_);
    if (!cv_.wait_until(lk, deadline, [&] { return signaled_; })) return false;
    signaled_ = false;
    return true;
  }

  void reset() {
    std::lock_guard lk(mu_);
    signaled_ = false;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  bool signaled_ = false;
};

}  // namespace hotlock
