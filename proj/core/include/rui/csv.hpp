#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rui {

// Splits one CSV record (RFC 4180 quoting, no embedded newlines). Returns
// nullopt for an unterminated quote or stray characters after a quote.
std::optional<std::vector<std::string>> split_csv_line(std::string_view line);

}  // namespace rui
