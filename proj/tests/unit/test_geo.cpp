#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rui/error.hpp"
#include "rui/geo.hpp"
#include "support.hpp"

using namespace rui;
namespace oracle = rui::test::oracle;

TEST_SUITE("geo") {

TEST_CASE("haversine matches the law-of-cosines oracle") {
  double expected = oracle::law_of_cosines_m({0, 0}, {0, 1});
  CHECK(expected == doctest::Approx(6'371'000.0 * std::numbers::pi / 180.0).epsilon(1e-12));
  CHECK(std::abs(haversine_m({0, 0}, {0, 1}) - expected) <= 0.01);
  CHECK(std::abs(haversine_m({0, 0}, {0, 1}) - 111194.93) < 0.01);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 1000; ++i) {
    GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    CHECK(haversine_m(a, b) == haversine_m(b, a));
    CHECK(haversine_m(a, a) == 0.0);
    // acos is ill-conditioned near 0 and pi; compare away from those.
    double d = oracle::law_of_cosines_m(a, b);
    if (d > 1000 && d < std::numbers::pi * kEarthRadiusM - 1000)
      CHECK(std::abs(haversine_m(a, b) - d) < 0.01);
  }
}

TEST_CASE("haversine handles antipodes and the antimeridian") {
  CHECK(haversine_m({0, 0}, {0, -180}) == doctest::Approx(std::numbers::pi * kEarthRadiusM));
  CHECK(haversine_m({10, 179.5}, {10, -179.5}) == doctest::Approx(haversine_m({10, 0}, {10, 1})));
}

TEST_CASE("geohash known values") {
  CHECK(oracle::geohash(0, 0, 1) == "s");
  CHECK(geohash_encode({0, 0}, 1).code() == "s");
  CHECK(oracle::geohash(57.64911, 10.40744, 11) == "u4pruydqqvj");
  CHECK(geohash_encode({57.64911, 10.40744}, 11).code() == "u4pruydqqvj");
  CHECK(kGeohashAlphabet == "0123456789bcdefghjkmnpqrstuvwxyz");
}

TEST_CASE("geohash agrees with the interval-halving oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 2000; ++i) {
    GeoPoint p{lat(rng), lon(rng)};
    int precision = 1 + i % 12;
    auto cell = geohash_encode(p, precision);
    REQUIRE(cell.code() == oracle::geohash(p.lat, p.lon, precision));
    CHECK(cell.contains(p));
    CHECK(GeoHashCell::parse(cell.code()).contains(p));
  }
  // poles and edges
  for (GeoPoint p : {GeoPoint{90, 0}, GeoPoint{-90, -180}, GeoPoint{0, 179.9999999}, GeoPoint{-90, 0}}) {
    for (int k = 1; k <= 12; ++k) {
      CHECK(geohash_encode(p, k).code() == oracle::geohash(p.lat, p.lon, k));
      CHECK(geohash_encode(p, k).contains(p));
    }
  }
}

TEST_CASE("geohash prefix property") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 500; ++i) {
    GeoPoint p{lat(rng), lon(rng)};
    for (int k = 1; k <= 11; ++k) {
      auto a = geohash_encode(p, k).code();
      auto b = geohash_encode(p, k + 1).code();
      REQUIRE(b.substr(0, a.size()) == a);
    }
  }
}

TEST_CASE("geohash precision out of range") {
  CHECK_THROWS_AS(geohash_encode({0, 0}, 0), Error);
  CHECK_THROWS_AS(geohash_encode({0, 0}, 13), Error);
  try {
    geohash_encode({0, 0}, 13);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PrecisionOutOfRange);
  }
  CHECK_THROWS_AS(GeoHashCell::parse("a"), Error);  // 'a' is not in the alphabet
  CHECK_THROWS_AS(GeoHashCell::parse(""), Error);
}

TEST_CASE("cell bounds nest and coordinates round-trip") {
  auto cell = geohash_encode({8.3695, 124.856}, 6);
  auto b = cell.bounds();
  CHECK(b.south <= 8.3695);
  CHECK(b.north >= 8.3695);
  CHECK(b.west <= 124.856);
  CHECK(b.east >= 124.856);
  CHECK(GeoHashCell::from_coord(cell.coord()) == cell);
  auto parent = GeoHashCell::parse(cell.code().substr(0, 5)).bounds();
  CHECK(parent.south <= b.south);
  CHECK(parent.north >= b.north);
  CHECK(cell.contains(cell.center()));
}

TEST_CASE("neighbors are mutual") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (int i = 0; i < 300; ++i) {
    auto cell = geohash_encode({lat(rng), lon(rng)}, 1 + i % 6);
    for (const auto& n : cell_neighbors(cell)) {
      CHECK(n.precision() == cell.precision());
      CHECK(cell_neighbors(n).count(cell) == 1);
      CHECK(n != cell);
    }
  }
}

TEST_CASE("interior cells have 8 neighbors, polar cells fewer") {
  CHECK(cell_neighbors(geohash_encode({8.3695, 124.856}, 6)).size() == 8);
  // Wrapping across the antimeridian keeps 8.
  CHECK(cell_neighbors(geohash_encode({0.1, 179.99}, 4)).size() == 8);

  // Every cell of the northernmost row at precision 2.
  const int precision = 2;
  std::uint32_t top = (1u << geohash_lat_bits(precision)) - 1;
  std::uint32_t cols = 1u << geohash_lon_bits(precision);
  for (std::uint32_t c = 0; c < cols; ++c) {
    auto cell = GeoHashCell::from_coord({precision, top, c});
    CHECK(cell.bounds().north == 90.0);
    CHECK(cell_neighbors(cell).size() < 8);
    CHECK(cell_neighbors(cell).size() == 5);
  }
}

TEST_CASE("bounding boxes") {
  auto box = parse_bbox("-10,170,10,-170");
  REQUIRE(box);
  CHECK(box->wraps());
  CHECK(box->contains({0, 175}));
  CHECK(box->contains({0, -175}));
  CHECK_FALSE(box->contains({0, 0}));
  CHECK(BoundingBox::world().contains({90, -180}));
  CHECK_FALSE(parse_bbox("10,0,-10,5"));  // south > north
  CHECK_FALSE(parse_bbox("1,2,3"));
  CHECK_FALSE(parse_bbox("a,b,c,d"));
  CHECK_FALSE(parse_bbox("0,0,95,1"));
}

}
