#include <doctest.h>

#include "rui/auth.hpp"
#include "rui/config.hpp"
#include "rui/rate_limiter.hpp"
#include "support.hpp"

using namespace rui;

TEST_SUITE("auth") {

TEST_CASE("password hashing") {
  auto h = hash_password("correct horse", HashStrength::Minimal);
  CHECK(h.rfind("$argon2id$", 0) == 0);
  CHECK(verify_password(h, "correct horse"));
  CHECK_FALSE(verify_password(h, "wrong"));
  CHECK_FALSE(verify_password("garbage", "correct horse"));
  CHECK(hash_password("x", HashStrength::Minimal) != hash_password("x", HashStrength::Minimal));
}

TEST_CASE("authenticator") {
  Authenticator auth("admin", hash_password("pw", HashStrength::Minimal));
  CHECK(auth.configured());
  CHECK(auth.check("admin", "pw"));
  CHECK_FALSE(auth.check("admin", "nope"));
  CHECK_FALSE(auth.check("root", "pw"));
  Authenticator none("", "");
  CHECK_FALSE(none.configured());
  CHECK_FALSE(none.check("", ""));
}

TEST_CASE("sessions expire and can be revoked") {
  Timestamp now = from_micros(1'000'000'000'000'000);
  SessionStore store(std::chrono::seconds(60), [&] { return now; });
  auto s = store.create("admin");
  CHECK(s.token.size() == 64);
  CHECK(store.validate(s.token));
  CHECK_FALSE(store.validate("deadbeef"));
  now += std::chrono::seconds(61);
  CHECK_FALSE(store.validate(s.token));
  auto s2 = store.create("admin");
  store.revoke(s2.token);
  CHECK_FALSE(store.validate(s2.token));
  CHECK(store.active_count() == 0);
}

TEST_CASE("rate limiter stays within [0, capacity]") {
  Timestamp now = from_micros(0);
  RateLimiter rl(10, 10, [&] { return now; });
  int accepted = 0;
  for (int i = 0; i < 20; ++i) accepted += rl.try_acquire("c");
  CHECK(accepted == 10);
  CHECK(rl.available("c") >= 0.0);
  CHECK(rl.try_acquire("other"));
  now += std::chrono::seconds(6);
  CHECK(rl.try_acquire("c"));
  CHECK_FALSE(rl.try_acquire("c"));
  now += std::chrono::hours(5);
  CHECK(rl.available("c") == 10.0);
  CHECK(rl.would_allow("c"));
  for (int i = 0; i < 15; ++i) rl.consume("c");
  CHECK(rl.available("c") == 0.0);
  CHECK_FALSE(rl.would_allow("c"));
}

TEST_CASE("host:port parsing") {
  CHECK(split_host_port("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(split_host_port("0.0.0.0:0") == std::pair<std::string, int>{"0.0.0.0", 0});
  CHECK_FALSE(split_host_port("localhost"));
  CHECK_FALSE(split_host_port("h:70000"));
  CHECK_FALSE(split_host_port("h:abc"));
}

}
