#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "rui/api_server.hpp"
#include "rui/geocoder.hpp"

namespace rui {

// Deployment settings, read from RUI_* environment variables.
struct ServiceConfig {
  std::filesystem::path data_dir = "data";
  std::string bind_addr = "127.0.0.1:8080";
  std::string admin_user;
  std::string admin_pass_hash;
  double rate_limit_per_min = 10;
  std::string geocoder = "stub";  // stub | http
  std::filesystem::path gazetteer_path;
  std::string geocoder_url;

  // Throws Error(InvalidArgument) for unparseable values.
  static ServiceConfig from_env();

  ApiConfig api_config() const;
};

// "host:port"; nullopt when the port is missing or not 0..65535.
std::optional<std::pair<std::string, int>> split_host_port(std::string_view addr);

std::unique_ptr<GeocodingProvider> make_geocoder(const ServiceConfig& config);

}  // namespace rui
