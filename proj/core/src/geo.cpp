#include "rui/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace rui {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

int alphabet_index(char c) {
  auto pos = kGeohashAlphabet.find(c);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

std::uint32_t halve(double v, double lo, double hi, int bits) {
  std::uint32_t idx = 0;
  for (int i = 0; i < bits; ++i) {
    double mid = (lo + hi) / 2;
    idx <<= 1;
    if (v >= mid) {
      idx |= 1;
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return idx;
}

}  // namespace

double haversine_m(GeoPoint a, GeoPoint b) {
  double phi1 = a.lat * kDegToRad;
  double phi2 = b.lat * kDegToRad;
  double dphi = phi2 - phi1;
  double dlambda = (b.lon - a.lon) * kDegToRad;
  double s1 = std::sin(dphi / 2);
  double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  // Rounding can push h a hair past 1 for antipodal points.
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

bool BoundingBox::contains(GeoPoint p) const {
  if (p.lat < south || p.lat > north) return false;
  if (wraps()) return p.lon >= west || p.lon <= east;
  return p.lon >= west && p.lon <= east;
}

bool is_valid(const BoundingBox& b) {
  auto finite = std::isfinite(b.south) && std::isfinite(b.north) && std::isfinite(b.west) &&
                std::isfinite(b.east);
  return finite && b.south >= -90.0 && b.north <= 90.0 && b.south <= b.north &&
         b.west >= -180.0 && b.west <= 180.0 && b.east >= -180.0 && b.east <= 180.0;
}

std::optional<BoundingBox> parse_bbox(std::string_view text) {
  double v[4];
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    auto comma = text.find(',', pos);
    bool last = i == 3;
    if (last != (comma == std::string_view::npos)) return std::nullopt;
    auto part = trim(text.substr(pos, last ? std::string_view::npos : comma - pos));
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      return std::nullopt;
    }
    pos = comma + 1;
  }
  BoundingBox box{v[0], v[1], v[2], v[3]};
  if (!is_valid(box)) return std::nullopt;
  return box;
}

GeoHashCell GeoHashCell::parse(std::string_view code) {
  if (code.size() < kMinGeohashPrecision || code.size() > kMaxGeohashPrecision) {
    throw Error(ErrorCode::InvalidArgument, "geohash length must be 1..12");
  }
  for (char c : code) {
    if (alphabet_index(c) < 0) {
      throw Error(ErrorCode::InvalidArgument, "invalid geohash character");
    }
  }
  return GeoHashCell(std::string(code));
}

CellCoord GeoHashCell::coord() const {
  CellCoord c{precision(), 0, 0};
  int bit = 0;
  for (char ch : code_) {
    int v = alphabet_index(ch);
    for (int i = 4; i >= 0; --i, ++bit) {
      std::uint32_t b = (v >> i) & 1;
      if (bit % 2 == 0) {
        c.col = (c.col << 1) | b;
      } else {
        c.row = (c.row << 1) | b;
      }
    }
  }
  return c;
}

GeoHashCell GeoHashCell::from_coord(CellCoord c) {
  if (c.precision < kMinGeohashPrecision || c.precision > kMaxGeohashPrecision) {
    throw Error(ErrorCode::PrecisionOutOfRange, "geohash precision must be 1..12");
  }
  int lon_bits = geohash_lon_bits(c.precision);
  int lat_bits = geohash_lat_bits(c.precision);
  std::string code;
  code.reserve(c.precision);
  int lon_left = lon_bits, lat_left = lat_bits;
  int value = 0, nbits = 0;
  for (int bit = 0; bit < 5 * c.precision; ++bit) {
    std::uint32_t b;
    if (bit % 2 == 0) {
      b = (c.col >> --lon_left) & 1;
    } else {
      b = (c.row >> --lat_left) & 1;
    }
    value = (value << 1) | static_cast<int>(b);
    if (++nbits == 5) {
      code.push_back(kGeohashAlphabet[value]);
      value = 0;
      nbits = 0;
    }
  }
  return GeoHashCell(std::move(code));
}

BoundingBox GeoHashCell::bounds() const {
  auto c = coord();
  double width = 360.0 / std::ldexp(1.0, geohash_lon_bits(c.precision));
  double height = 180.0 / std::ldexp(1.0, geohash_lat_bits(c.precision));
  BoundingBox b;
  b.west = -180.0 + c.col * width;
  b.east = b.west + width;
  b.south = -90.0 + c.row * height;
  b.north = b.south + height;
  return b;
}

GeoPoint GeoHashCell::center() const {
  auto b = bounds();
  return {(b.south + b.north) / 2, (b.west + b.east) / 2};
}

bool GeoHashCell::contains(GeoPoint p) const {
  return geohash_coord(p, precision()) == coord();
}

CellCoord geohash_coord(GeoPoint p, int precision) {
  if (precision < kMinGeohashPrecision || precision > kMaxGeohashPrecision) {
    throw Error(ErrorCode::PrecisionOutOfRange, "geohash precision must be 1..12");
  }
  return {precision, halve(p.lat, -90.0, 90.0, geohash_lat_bits(precision)),
          halve(p.lon, -180.0, 180.0, geohash_lon_bits(precision))};
}

GeoHashCell geohash_encode(GeoPoint p, int precision) {
  return GeoHashCell::from_coord(geohash_coord(p, precision));
}

std::set<GeoHashCell> cell_neighbors(const GeoHashCell& cell) {
  auto c = cell.coord();
  auto rows = static_cast<std::int64_t>(1) << geohash_lat_bits(c.precision);
  auto cols = static_cast<std::int64_t>(1) << geohash_lon_bits(c.precision);
  std::set<GeoHashCell> out;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      std::int64_t r = static_cast<std::int64_t>(c.row) + dr;
      if (r < 0 || r >= rows) continue;
      std::int64_t col = (static_cast<std::int64_t>(c.col) + dc + cols) % cols;
      auto n = GeoHashCell::from_coord(
          {c.precision, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(col)});
      if (n != cell) out.insert(std::move(n));
    }
  }
  return out;
}

}  // namespace rui
