#include "rui/rate_limiter.hpp"

#include <algorithm>

#include "rui/error.hpp"

namespace rui {

RateLimiter::RateLimiter(double capacity, double per_minute, Clock clock)
    : capacity_(capacity), per_minute_(per_minute), clock_(std::move(clock)) {
  if (!(capacity >= 1.0) || !(per_minute > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rate limiter needs capacity >= 1 and a positive rate");
  }
  if (!clock_) clock_ = system_now;
}

RateLimiter::Bucket& RateLimiter::refill_locked(const std::string& key) {
  auto now = clock_();
  auto [it, inserted] = buckets_.try_emplace(key, Bucket{capacity_, now});
  auto& b = it->second;
  if (!inserted && now > b.updated) {
    double minutes = std::chrono::duration<double, std::ratio<60>>(now - b.updated).count();
    b.tokens = std::min(capacity_, b.tokens + minutes * per_minute_);
    b.updated = now;
  }
  return b;
}

bool RateLimiter::try_acquire(const std::string& key) {
  std::lock_guard lock(mu_);
  auto& b = refill_locked(key);
  if (b.tokens < 1.0) return false;
  b.tokens -= 1.0;
  return true;
}

bool RateLimiter::would_allow(const std::string& key) {
  std::lock_guard lock(mu_);
  return refill_locked(key).tokens >= 1.0;
}

void RateLimiter::consume(const std::string& key) {
  std::lock_guard lock(mu_);
  auto& b = refill_locked(key);
  b.tokens = std::max(0.0, b.tokens - 1.0);
}

double RateLimiter::available(const std::string& key) {
  std::lock_guard lock(mu_);
  return refill_locked(key).tokens;
}

}  // namespace rui
