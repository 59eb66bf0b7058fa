#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace rui {

// UTC instant with microsecond resolution. Serialized as RFC 3339.
using Timestamp =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::microseconds>;

using Clock = std::function<Timestamp()>;

Timestamp system_now();

// Always emits "YYYY-MM-DDTHH:MM:SS.ffffffZ" so that parse(format(t)) == t.
std::string format_rfc3339(Timestamp t);

// Accepts an optional fractional part (up to 9 digits, truncated to
// microseconds) and either "Z" or a numeric "+HH:MM" offset.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

inline std::int64_t to_micros(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_micros(std::int64_t us) {
  return Timestamp{std::chrono::microseconds{us}};
}

}  // namespace rui
