#pragma once

#include <mutex>
#include <string>
#include <unordered_map>

#include "rui/time.hpp"

namespace rui {

// Per-key token buckets. A bucket starts full; its allowance refills
// continuously at `per_minute` tokens per minute, never above `capacity` and
// never below zero.
class RateLimiter {
 public:
  RateLimiter(double capacity, double per_minute, Clock clock = system_now);

  // Takes one token if available.
  bool try_acquire(const std::string& key);
  // True when at least one token is available, without taking it.
  bool would_allow(const std::string& key);
  // Takes a token if there is one; never goes negative.
  void consume(const std::string& key);
  double available(const std::string& key);

  double capacity() const { return capacity_; }

 private:
  struct Bucket {
    double tokens;
    Timestamp updated;
  };
  Bucket& refill_locked(const std::string& key);

  double capacity_;
  double per_minute_;
  Clock clock_;
  std::mutex mu_;
  std::unordered_map<std::string, Bucket> buckets_;
};

}  // namespace rui
