#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "rui/domain.hpp"

namespace rui {

inline constexpr double kEarthRadiusM = 6'371'000.0;

// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_m(GeoPoint a, GeoPoint b);

// Lat/lon rectangle with inclusive edges. west > east means the box crosses
// the antimeridian.
struct BoundingBox {
  double south = -90.0;
  double west = -180.0;
  double north = 90.0;
  double east = 180.0;

  static BoundingBox world() { return {}; }

  bool wraps() const { return west > east; }
  bool contains(GeoPoint p) const;

  bool operator==(const BoundingBox&) const = default;
};

bool is_valid(const BoundingBox& box);
// Parses "south,west,north,east"; nullopt if malformed or invalid.
std::optional<BoundingBox> parse_bbox(std::string_view text);

inline constexpr int kMinGeohashPrecision = 1;
inline constexpr int kMaxGeohashPrecision = 12;
inline constexpr std::string_view kGeohashAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";

// Number of longitude / latitude bits in a geohash of the given length.
constexpr int geohash_lon_bits(int precision) { return (5 * precision + 1) / 2; }
constexpr int geohash_lat_bits(int precision) { return (5 * precision) / 2; }

// Integer grid coordinates of a cell: row counts up from the south pole, col
// eastward from -180.
struct CellCoord {
  int precision = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  bool operator==(const CellCoord&) const = default;
};

class GeoHashCell {
 public:
  // Throws Error(InvalidArgument) for characters outside the alphabet or a
  // length outside 1..12.
  static GeoHashCell parse(std::string_view code);

  const std::string& code() const { return code_; }
  int precision() const { return static_cast<int>(code_.size()); }

  CellCoord coord() const;
  static GeoHashCell from_coord(CellCoord c);

  // Half-open in the interval-halving sense: the south/west edges belong to
  // the cell, the north/east edges to the next one (except at 90 / 180).
  BoundingBox bounds() const;
  GeoPoint center() const;
  bool contains(GeoPoint p) const;

  auto operator<=>(const GeoHashCell&) const = default;

 private:
  explicit GeoHashCell(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

// Throws Error(PrecisionOutOfRange) outside 1..12.
GeoHashCell geohash_encode(GeoPoint p, int precision);
CellCoord geohash_coord(GeoPoint p, int precision);

// Same-precision cells in the 8 compass directions. Longitude wraps; rows
// beyond the poles are dropped, so polar cells have 5 neighbours.
std::set<GeoHashCell> cell_neighbors(const GeoHashCell& cell);

}  // namespace rui
