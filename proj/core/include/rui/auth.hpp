#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "rui/time.hpp"

namespace rui {

enum class HashStrength { Minimal, Interactive, Moderate };

// Salted argon2id hash in the standard "$argon2id$..." encoding.
std::string hash_password(std::string_view password,
                          HashStrength strength = HashStrength::Interactive);
bool verify_password(std::string_view encoded_hash, std::string_view password);

struct AdminSession {
  std::string token;  // 256 random bits, hex
  std::string admin_id;
  Timestamp expires_at;
};

// Checks the configured admin credentials. The answer for an unknown user and
// a wrong password is the same, and both paths run a full hash verification.
class Authenticator {
 public:
  Authenticator(std::string admin_user, std::string admin_pass_hash);
  bool check(std::string_view username, std::string_view password) const;
  bool configured() const { return !pass_hash_.empty(); }

 private:
  std::string user_;
  std::string pass_hash_;
  std::string decoy_hash_;
};

class SessionStore {
 public:
  explicit SessionStore(std::chrono::seconds ttl, Clock clock = system_now);

  AdminSession create(const std::string& admin_id);
  // nullopt for unknown, revoked or expired tokens.
  std::optional<AdminSession> validate(std::string_view token);
  void revoke(std::string_view token);
  std::size_t active_count();

 private:
  std::chrono::seconds ttl_;
  Clock clock_;
  std::mutex mu_;
  // Keyed by the token's SHA-256 so lookups never compare raw secrets.
  std::unordered_map<std::string, AdminSession> sessions_;
};

}  // namespace rui
