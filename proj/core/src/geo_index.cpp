#include "rui/geo_index.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace rui {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::uint64_t pack(std::uint32_t row, std::uint32_t col) {
  return (static_cast<std::uint64_t>(row) << 32) | col;
}

bool in_ranges(std::int64_t v, const auto& ranges) {
  return std::any_of(ranges.begin(), ranges.end(),
                     [v](const auto& r) { return v >= r.lo && v <= r.hi; });
}

}  // namespace

GeoIndex::GeoIndex(int precision) : precision_(precision) {
  if (precision < kMinGeohashPrecision || precision > kMaxGeohashPrecision) {
    throw Error(ErrorCode::PrecisionOutOfRange, "geohash precision must be 1..12");
  }
}

GeoIndex::GeoIndex(const GeoIndex& other) {
  std::shared_lock lock(other.mu_);
  precision_ = other.precision_;
  entries_ = other.entries_;
  cells_ = other.cells_;
}

GeoIndex& GeoIndex::operator=(const GeoIndex& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  precision_ = other.precision_;
  entries_ = other.entries_;
  cells_ = other.cells_;
  return *this;
}

std::uint64_t GeoIndex::cell_key(GeoPoint p) const {
  auto c = geohash_coord(p, precision_);
  return pack(c.row, c.col);
}

void GeoIndex::insert(const std::string& id, GeoPoint p) {
  if (!is_valid(p)) throw Error(ErrorCode::InvalidArgument, "invalid point");
  auto key = cell_key(p);
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.try_emplace(id, Entry{p, key});
  if (!inserted) {
    auto old = cells_.find(it->second.cell);
    old->second.erase(id);
    if (old->second.empty()) cells_.erase(old);
    it->second = Entry{p, key};
  }
  cells_[key].insert(id);
}

void GeoIndex::remove(const std::string& id) {
  std::unique_lock lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownId, "unknown id " + id);
  auto cell = cells_.find(it->second.cell);
  cell->second.erase(id);
  if (cell->second.empty()) cells_.erase(cell);
  entries_.erase(it);
}

void GeoIndex::clear() {
  std::unique_lock lock(mu_);
  entries_.clear();
  cells_.clear();
}

bool GeoIndex::contains(const std::string& id) const {
  std::shared_lock lock(mu_);
  return entries_.count(id) != 0;
}

std::optional<GeoPoint> GeoIndex::location(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second.point;
}

std::size_t GeoIndex::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// Gathers ids from cells whose (row, col) fall in the given index ranges.
// Enumerates the ranges when that is cheaper than walking occupied cells.
void GeoIndex::collect(const std::vector<Range>& rows, const std::vector<Range>& cols,
                       std::vector<std::string>& out) const {
  std::uint64_t row_count = 0, col_count = 0;
  for (const auto& r : rows) row_count += static_cast<std::uint64_t>(r.hi - r.lo + 1);
  for (const auto& c : cols) col_count += static_cast<std::uint64_t>(c.hi - c.lo + 1);
  bool enumerate = row_count * col_count <= cells_.size();
  if (enumerate) {
    for (const auto& r : rows) {
      for (auto row = r.lo; row <= r.hi; ++row) {
        for (const auto& c : cols) {
          for (auto col = c.lo; col <= c.hi; ++col) {
            auto it = cells_.find(pack(static_cast<std::uint32_t>(row),
                                       static_cast<std::uint32_t>(col)));
            if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
          }
        }
      }
    }
    return;
  }
  for (const auto& [key, ids] : cells_) {
    auto row = static_cast<std::int64_t>(key >> 32);
    auto col = static_cast<std::int64_t>(key & 0xffffffffu);
    if (in_ranges(row, rows) && in_ranges(col, cols)) {
      out.insert(out.end(), ids.begin(), ids.end());
    }
  }
}

namespace {

// Index range of cells overlapping [lo, hi] degrees along one axis, widened by
// one cell on each side so that boundary rounding can never drop a cell.
template <typename R>
R axis_range(double lo, double hi, double origin, double span, int bits) {
  auto cells = static_cast<std::int64_t>(1) << bits;
  double width = span / static_cast<double>(cells);
  auto a = static_cast<std::int64_t>(std::floor((lo - origin) / width)) - 1;
  auto b = static_cast<std::int64_t>(std::floor((hi - origin) / width)) + 1;
  return R{std::clamp<std::int64_t>(a, 0, cells - 1), std::clamp<std::int64_t>(b, 0, cells - 1)};
}

}  // namespace

std::vector<std::string> GeoIndex::query_radius(GeoPoint center, double radius_m) const {
  if (!(radius_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  if (!is_valid(center)) throw Error(ErrorCode::InvalidArgument, "invalid center");

  int lat_bits = geohash_lat_bits(precision_);
  int lon_bits = geohash_lon_bits(precision_);
  double angular = radius_m / kEarthRadiusM;

  std::vector<Range> rows, cols;
  bool whole_lon = false;
  if (angular >= std::numbers::pi) {
    rows.push_back(axis_range<Range>(-90.0, 90.0, -90.0, 180.0, lat_bits));
    whole_lon = true;
  } else {
    double dlat = angular * kRadToDeg;
    double south = center.lat - dlat;
    double north = center.lat + dlat;
    rows.push_back(axis_range<Range>(std::max(south, -90.0), std::min(north, 90.0), -90.0,
                                     180.0, lat_bits));
    if (south <= -90.0 || north >= 90.0) {
      whole_lon = true;  // cap covers a pole
    } else {
      // Widest longitude reach of a spherical cap.
      double ratio = std::sin(angular) / std::cos(center.lat / kRadToDeg);
      if (ratio >= 1.0) {
        whole_lon = true;
      } else {
        double dlon = std::asin(ratio) * kRadToDeg;
        double west = center.lon - dlon;
        double east = center.lon + dlon;
        if (west < -180.0) {
          cols.push_back(axis_range<Range>(west + 360.0, 180.0, -180.0, 360.0, lon_bits));
          cols.push_back(axis_range<Range>(-180.0, east, -180.0, 360.0, lon_bits));
        } else if (east >= 180.0) {
          cols.push_back(axis_range<Range>(west, 180.0, -180.0, 360.0, lon_bits));
          cols.push_back(axis_range<Range>(-180.0, east - 360.0, -180.0, 360.0, lon_bits));
        } else {
          cols.push_back(axis_range<Range>(west, east, -180.0, 360.0, lon_bits));
        }
      }
    }
  }
  if (whole_lon) cols = {axis_range<Range>(-180.0, 180.0, -180.0, 360.0, lon_bits)};

  std::vector<std::string> candidates;
  std::vector<std::string> out;
  {
    std::shared_lock lock(mu_);
    collect(rows, cols, candidates);
    for (auto& id : candidates) {
      if (haversine_m(center, entries_.at(id).point) <= radius_m) out.push_back(std::move(id));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> GeoIndex::query_viewport(const BoundingBox& box) const {
  if (!is_valid(box)) throw Error(ErrorCode::InvalidArgument, "invalid bounding box");
  int lat_bits = geohash_lat_bits(precision_);
  int lon_bits = geohash_lon_bits(precision_);
  std::vector<Range> rows{axis_range<Range>(box.south, box.north, -90.0, 180.0, lat_bits)};
  std::vector<Range> cols;
  if (box.wraps()) {
    cols.push_back(axis_range<Range>(box.west, 180.0, -180.0, 360.0, lon_bits));
    cols.push_back(axis_range<Range>(-180.0, box.east, -180.0, 360.0, lon_bits));
  } else {
    cols.push_back(axis_range<Range>(box.west, box.east, -180.0, 360.0, lon_bits));
  }

  std::vector<std::string> candidates;
  std::vector<std::string> out;
  {
    std::shared_lock lock(mu_);
    collect(rows, cols, candidates);
    for (auto& id : candidates) {
      if (box.contains(entries_.at(id).point)) out.push_back(std::move(id));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void GeoIndex::dump(std::ostream& out) const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<std::string, std::string>> lines;
  lines.reserve(entries_.size());
  for (const auto& [id, e] : entries_) {
    lines.emplace_back(geohash_encode(e.point, precision_).code(), id);
  }
  std::sort(lines.begin(), lines.end());
  auto old_precision = out.precision(17);
  for (const auto& [hash, id] : lines) {
    const auto& p = entries_.at(id).point;
    out << hash << ' ' << id << ' ' << p.lat << ' ' << p.lon << '\n';
  }
  out.precision(old_precision);
}

GeoIndex GeoIndex::load_dump(std::istream& in, int precision) {
  GeoIndex idx(precision);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string hash, id;
    GeoPoint p;
    if (!(ls >> hash >> id >> p.lat >> p.lon)) {
      throw Error(ErrorCode::InvalidArgument, "bad dump line " + std::to_string(line_no));
    }
    idx.insert(id, p);
  }
  return idx;
}

bool GeoIndex::operator==(const GeoIndex& other) const {
  if (this == &other) return true;
  std::shared_lock a(mu_);
  std::shared_lock b(other.mu_);
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [id, e] : entries_) {
    auto it = other.entries_.find(id);
    if (it == other.entries_.end() || !(it->second.point == e.point)) return false;
  }
  return true;
}

}  // namespace rui
