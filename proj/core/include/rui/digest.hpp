#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace rui {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
bool is_sha256_hex(std::string_view text);

// Hex string of n bytes from the OS CSPRNG.
std::string random_hex(std::size_t n_bytes);

std::string hex_encode(std::string_view bytes);
// Empty optional-like behaviour: returns false on odd length or bad digits.
bool hex_decode(std::string_view hex, std::string& out);

}  // namespace rui
