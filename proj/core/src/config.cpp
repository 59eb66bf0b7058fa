#include "rui/config.hpp"

#include <charconv>
#include <cstdlib>

namespace rui {

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  if (auto v = env("RUI_DATA_DIR")) c.data_dir = *v;
  if (auto v = env("RUI_BIND_ADDR")) c.bind_addr = *v;
  if (auto v = env("RUI_ADMIN_USER")) c.admin_user = *v;
  if (auto v = env("RUI_ADMIN_PASS_HASH")) c.admin_pass_hash = *v;
  if (auto v = env("RUI_RATE_LIMIT_PER_MIN")) {
    double rate = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), rate);
    if (ec != std::errc{} || ptr != v->data() + v->size() || !(rate >= 1)) {
      throw Error(ErrorCode::InvalidArgument, "RUI_RATE_LIMIT_PER_MIN must be a number >= 1");
    }
    c.rate_limit_per_min = rate;
  }
  if (auto v = env("RUI_GEOCODER")) c.geocoder = *v;
  if (c.geocoder != "stub" && c.geocoder != "http") {
    throw Error(ErrorCode::InvalidArgument, "RUI_GEOCODER must be stub or http");
  }
  if (auto v = env("RUI_GAZETTEER_PATH")) c.gazetteer_path = *v;
  if (auto v = env("RUI_GEOCODER_URL")) c.geocoder_url = *v;
  return c;
}

ApiConfig ServiceConfig::api_config() const {
  ApiConfig a;
  a.admin_user = admin_user;
  a.admin_pass_hash = admin_pass_hash;
  a.submissions_per_minute = rate_limit_per_min;
  return a;
}

std::optional<std::pair<std::string, int>> split_host_port(std::string_view addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  auto port_text = addr.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    return std::nullopt;
  }
  auto host = addr.substr(0, colon);
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  return std::make_pair(std::string(host), port);
}

std::unique_ptr<GeocodingProvider> make_geocoder(const ServiceConfig& config) {
  if (config.geocoder == "http") {
    if (config.geocoder_url.empty()) {
      throw Error(ErrorCode::InvalidArgument, "RUI_GEOCODER=http needs RUI_GEOCODER_URL");
    }
    return std::make_unique<HttpGeocoder>(config.geocoder_url);
  }
  if (config.gazetteer_path.empty()) {
    return std::make_unique<GazetteerGeocoder>(std::vector<GazetteerGeocoder::Entry>{});
  }
  return std::make_unique<GazetteerGeocoder>(GazetteerGeocoder::from_file(config.gazetteer_path));
}

}  // namespace rui
