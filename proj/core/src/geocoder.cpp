#include "rui/geocoder.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>

#include "rui/csv.hpp"

namespace rui {

using nlohmann::json;

namespace {

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::optional<double> to_double(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    double d = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return d;
  }
  return std::nullopt;
}

void sort_candidates(std::vector<GeocodeCandidate>& c) {
  std::stable_sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
    return a.confidence > b.confidence;
  });
}

}  // namespace

json to_json(const GeocodeResult& result) {
  json candidates = json::array();
  for (const auto& c : result.candidates) {
    candidates.push_back(json{{"location", to_json(c.point)},
                              {"formatted_address", c.formatted_address},
                              {"confidence", c.confidence}});
  }
  return json{{"query", result.query}, {"candidates", std::move(candidates)}};
}

GazetteerGeocoder::GazetteerGeocoder(std::vector<Entry> entries) : entries_(std::move(entries)) {
  words_.reserve(entries_.size());
  for (const auto& e : entries_) words_.push_back(words_of(e.name));
}

GazetteerGeocoder GazetteerGeocoder::from_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<Entry> entries;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    auto where = "gazetteer line " + std::to_string(line_no);
    if (!fields || fields->size() != 3) {
      throw Error(ErrorCode::InvalidArgument, where + ": expected name,lat,lon");
    }
    if (!header_seen) {
      header_seen = true;
      if (trim((*fields)[0]) != "name" || trim((*fields)[1]) != "lat" ||
          trim((*fields)[2]) != "lon") {
        throw Error(ErrorCode::InvalidArgument, "gazetteer header must be name,lat,lon");
      }
      continue;
    }
    auto lat = to_double(trim((*fields)[1]));
    auto lon = to_double(trim((*fields)[2]));
    GeoPoint p{lat.value_or(999), lon.value_or(999)};
    if (!lat || !lon || !is_valid(p) || trim((*fields)[0]).empty()) {
      throw Error(ErrorCode::InvalidArgument, where + ": invalid entry");
    }
    entries.push_back({trim((*fields)[0]), p});
  }
  if (!header_seen) throw Error(ErrorCode::InvalidArgument, "gazetteer is empty");
  return GazetteerGeocoder(std::move(entries));
}

GazetteerGeocoder GazetteerGeocoder::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open gazetteer " + path.string());
  return from_csv(in);
}

GeocodeResult GazetteerGeocoder::geocode(std::string_view address) const {
  auto query = trim(address);
  if (query.empty()) throw Error(ErrorCode::InvalidArgument, "address must not be empty");
  GeocodeResult result{query, {}};
  auto qwords = words_of(query);
  std::multiset<std::string> qset(qwords.begin(), qwords.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& ew = words_[i];
    if (ew.empty() || qwords.empty()) continue;
    double confidence = 0.0;
    if (ew == qwords) {
      confidence = 1.0;
    } else {
      auto remaining = qset;
      bool all = true;
      for (const auto& w : ew) {
        auto it = remaining.find(w);
        if (it == remaining.end()) {
          all = false;
          break;
        }
        remaining.erase(it);
      }
      if (all) confidence = static_cast<double>(ew.size()) / static_cast<double>(qwords.size());
    }
    if (confidence > 0.0) {
      result.candidates.push_back({entries_[i].point, entries_[i].name, confidence});
    }
  }
  sort_candidates(result.candidates);
  return result;
}

HttpGeocoder::HttpGeocoder(std::string base_url, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  auto scheme_end = base_url.find("://");
  auto path_start = base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = base_url;
    path_ = "/";
  } else {
    scheme_host_port_ = base_url.substr(0, path_start);
    path_ = base_url.substr(path_start);
  }
}

GeocodeResult HttpGeocoder::geocode(std::string_view address) const {
  auto query = trim(address);
  if (query.empty()) throw Error(ErrorCode::InvalidArgument, "address must not be empty");

  httplib::Client client(scheme_host_port_);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  httplib::Params params{{"q", query}, {"format", "json"}};
  auto res = client.Get(path_, params, httplib::Headers{});
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable,
                "geocoder unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable,
                "geocoder answered HTTP " + std::to_string(res->status));
  }
  GeocodeResult result{query, {}};
  try {
    auto body = json::parse(res->body);
    for (const auto& item : body) {
      auto lat = to_double(item.value("lat", json()));
      auto lon = to_double(item.value("lon", json()));
      if (!lat || !lon) continue;
      GeoPoint p{*lat, *lon};
      if (!is_valid(p)) continue;
      double confidence = std::clamp(to_double(item.value("importance", json(0.0))).value_or(0.0),
                                     0.0, 1.0);
      result.candidates.push_back({p, item.value("display_name", std::string{}), confidence});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, std::string("geocoder sent bad JSON: ") + e.what());
  }
  sort_candidates(result.candidates);
  return result;
}

}  // namespace rui
