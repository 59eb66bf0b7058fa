#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "rui/geo.hpp"

namespace rui {

// Geohash grid index over id -> point. Queries gather candidates from the
// covering cells and then apply the exact predicate, so results equal a
// linear scan. Many concurrent readers or one writer.
class GeoIndex {
 public:
  static constexpr int kDefaultPrecision = 6;

  explicit GeoIndex(int precision = kDefaultPrecision);
  GeoIndex(const GeoIndex& other);
  GeoIndex& operator=(const GeoIndex& other);

  int precision() const { return precision_; }

  // Re-inserting an id moves it.
  void insert(const std::string& id, GeoPoint p);
  // Throws Error(UnknownId) when the id is absent.
  void remove(const std::string& id);
  void clear();

  bool contains(const std::string& id) const;
  std::optional<GeoPoint> location(const std::string& id) const;
  std::size_t size() const;

  // Ids within radius_m (inclusive) of center, sorted.
  std::vector<std::string> query_radius(GeoPoint center, double radius_m) const;
  // Ids inside the box (inclusive edges, antimeridian-aware), sorted.
  std::vector<std::string> query_viewport(const BoundingBox& box) const;

  // One "geohash id lat lon" line per entry, ordered by geohash then id.
  void dump(std::ostream& out) const;
  static GeoIndex load_dump(std::istream& in, int precision = kDefaultPrecision);

  // Same id -> point mapping.
  bool operator==(const GeoIndex& other) const;

 private:
  struct Entry {
    GeoPoint point;
    std::uint64_t cell = 0;
  };
  struct Range {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
  };

  std::uint64_t cell_key(GeoPoint p) const;
  void collect(const std::vector<Range>& rows, const std::vector<Range>& cols,
               std::vector<std::string>& out) const;

  int precision_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
  std::map<std::uint64_t, std::set<std::string>> cells_;
};

}  // namespace rui
