#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rui/domain.hpp"

namespace rui {

struct GeocodeCandidate {
  GeoPoint point;
  std::string formatted_address;
  double confidence = 0.0;  // 0..1
};

struct GeocodeResult {
  std::string query;
  std::vector<GeocodeCandidate> candidates;  // descending confidence
};

nlohmann::json to_json(const GeocodeResult& result);

class GeocodingProvider {
 public:
  virtual ~GeocodingProvider() = default;
  // Throws Error(InvalidArgument) for a blank address and
  // Error(ProviderUnavailable) when a remote provider cannot be reached.
  virtual GeocodeResult geocode(std::string_view address) const = 0;
  virtual std::string_view name() const = 0;
};

// Offline provider backed by a local "name,lat,lon" CSV. Never invents
// coordinates: an address that matches no entry yields no candidates.
//
// An entry matches with confidence 1.0 when its normalized name equals the
// normalized query; otherwise, when all of the entry's words appear in the
// query, with confidence |entry words| / |query words|.
class GazetteerGeocoder : public GeocodingProvider {
 public:
  struct Entry {
    std::string name;
    GeoPoint point;
  };

  explicit GazetteerGeocoder(std::vector<Entry> entries);
  static GazetteerGeocoder from_csv(std::istream& in);
  static GazetteerGeocoder from_file(const std::filesystem::path& path);

  GeocodeResult geocode(std::string_view address) const override;
  std::string_view name() const override { return "stub"; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::vector<std::string>> words_;
};

// Adapter for Nominatim-style HTTP geocoders:
//   GET <base_url>?q=<address>&format=json
// answering [{"lat": "..", "lon": "..", "display_name": "..", "importance": x}].
class HttpGeocoder : public GeocodingProvider {
 public:
  explicit HttpGeocoder(std::string base_url,
                        std::chrono::milliseconds timeout = std::chrono::seconds(5));

  GeocodeResult geocode(std::string_view address) const override;
  std::string_view name() const override { return "http"; }

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

}  // namespace rui
