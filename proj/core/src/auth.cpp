#include "rui/auth.hpp"

#include <sodium.h>

#include "rui/digest.hpp"
#include "rui/error.hpp"

namespace rui {

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "libsodium initialisation failed");
}

}  // namespace

std::string hash_password(std::string_view password, HashStrength strength) {
  ensure_sodium();
  unsigned long long ops = crypto_pwhash_OPSLIMIT_INTERACTIVE;
  std::size_t mem = crypto_pwhash_MEMLIMIT_INTERACTIVE;
  if (strength == HashStrength::Minimal) {
    ops = crypto_pwhash_OPSLIMIT_MIN;
    mem = crypto_pwhash_MEMLIMIT_MIN;
  } else if (strength == HashStrength::Moderate) {
    ops = crypto_pwhash_OPSLIMIT_MODERATE;
    mem = crypto_pwhash_MEMLIMIT_MODERATE;
  }
  char out[crypto_pwhash_STRBYTES];
  if (crypto_pwhash_str_alg(out, password.data(), password.size(), ops, mem,
                            crypto_pwhash_ALG_ARGON2ID13) != 0) {
    throw Error(ErrorCode::InvalidArgument, "password hashing ran out of memory");
  }
  return out;
}

bool verify_password(std::string_view encoded_hash, std::string_view password) {
  ensure_sodium();
  std::string h(encoded_hash);
  return crypto_pwhash_str_verify(h.c_str(), password.data(), password.size()) == 0;
}

Authenticator::Authenticator(std::string admin_user, std::string admin_pass_hash)
    : user_(std::move(admin_user)), pass_hash_(std::move(admin_pass_hash)) {
  // A decoy with the same cost parameters keeps unknown-user attempts as slow
  // as wrong-password ones.
  ensure_sodium();
  decoy_hash_ = pass_hash_.empty() ? hash_password(random_hex(16), HashStrength::Minimal)
                                   : pass_hash_;
}

bool Authenticator::check(std::string_view username, std::string_view password) const {
  if (pass_hash_.empty() || user_.empty()) {
    verify_password(decoy_hash_, password);
    return false;
  }
  bool user_ok = username.size() == user_.size() &&
                 sodium_memcmp(username.data(), user_.data(), user_.size()) == 0;
  bool pass_ok = verify_password(user_ok ? pass_hash_ : decoy_hash_, password);
  return user_ok && pass_ok;
}

SessionStore::SessionStore(std::chrono::seconds ttl, Clock clock)
    : ttl_(ttl), clock_(std::move(clock)) {
  if (!clock_) clock_ = system_now;
}

AdminSession SessionStore::create(const std::string& admin_id) {
  AdminSession s{random_hex(32), admin_id, clock_() + ttl_};
  std::lock_guard lock(mu_);
  sessions_[sha256_hex(s.token)] = s;
  return s;
}

std::optional<AdminSession> SessionStore::validate(std::string_view token) {
  if (token.empty()) return std::nullopt;
  auto key = sha256_hex(token);
  std::lock_guard lock(mu_);
  auto it = sessions_.find(key);
  if (it == sessions_.end()) return std::nullopt;
  if (clock_() >= it->second.expires_at) {
    sessions_.erase(it);
    return std::nullopt;
  }
  return it->second;
}

void SessionStore::revoke(std::string_view token) {
  auto key = sha256_hex(token);
  std::lock_guard lock(mu_);
  sessions_.erase(key);
}

std::size_t SessionStore::active_count() {
  std::lock_guard lock(mu_);
  auto now = clock_();
  std::erase_if(sessions_, [&](const auto& kv) { return now >= kv.second.expires_at; });
  return sessions_.size();
}

}  // namespace rui
