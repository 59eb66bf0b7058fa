#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "rui/geo.hpp"
#include "rui/geo_index.hpp"

namespace {

std::vector<rui::GeoPoint> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  std::vector<rui::GeoPoint> pts(n);
  for (auto& p : pts) p = {lat(rng), lon(rng)};
  return pts;
}

rui::GeoIndex build_index(const std::vector<rui::GeoPoint>& pts) {
  rui::GeoIndex idx;
  for (std::size_t i = 0; i < pts.size(); ++i) idx.insert("p" + std::to_string(i), pts[i]);
  return idx;
}

}  // namespace

static void BM_GeohashEncode(benchmark::State& state) {
  auto pts = random_points(1024, 1);
  int precision = static_cast<int>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rui::geohash_encode(pts[i++ & 1023], precision));
  }
}
BENCHMARK(BM_GeohashEncode)->Arg(6)->Arg(12);

static void BM_Haversine(benchmark::State& state) {
  auto pts = random_points(1024, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rui::haversine_m(pts[i & 1023], pts[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Haversine);

// 25 km around random centers: the common "what is near me" query.
static void BM_RadiusIndex(benchmark::State& state) {
  auto pts = random_points(static_cast<std::size_t>(state.range(0)), 3);
  auto idx = build_index(pts);
  auto centers = random_points(256, 4);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(idx.query_radius(centers[i++ & 255], 25'000));
}
BENCHMARK(BM_RadiusIndex)->Arg(1000)->Arg(100000);

static void BM_RadiusScan(benchmark::State& state) {
  auto pts = random_points(static_cast<std::size_t>(state.range(0)), 3);
  auto centers = random_points(256, 4);
  std::size_t i = 0;
  for (auto _ : state) {
    std::vector<std::size_t> hits;
    auto c = centers[i++ & 255];
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (rui::haversine_m(c, pts[k]) <= 25'000) hits.push_back(k);
    benchmark::DoNotOptimize(hits);
  }
}
BENCHMARK(BM_RadiusScan)->Arg(1000)->Arg(100000);

// A city-sized viewport, roughly 0.5 x 0.5 degrees.
static void BM_ViewportIndex(benchmark::State& state) {
  auto pts = random_points(static_cast<std::size_t>(state.range(0)), 5);
  auto idx = build_index(pts);
  auto corners = random_points(256, 6);
  std::size_t i = 0;
  for (auto _ : state) {
    auto c = corners[i++ & 255];
    double s = std::min(c.lat, 89.0);
    benchmark::DoNotOptimize(idx.query_viewport({s, c.lon, s + 0.5, c.lon + 0.5 >= 180 ? c.lon + 0.5 - 360 : c.lon + 0.5}));
  }
}
BENCHMARK(BM_ViewportIndex)->Arg(1000)->Arg(100000);

static void BM_ViewportScan(benchmark::State& state) {
  auto pts = random_points(static_cast<std::size_t>(state.range(0)), 5);
  auto corners = random_points(256, 6);
  std::size_t i = 0;
  for (auto _ : state) {
    auto c = corners[i++ & 255];
    double s = std::min(c.lat, 89.0);
    rui::BoundingBox box{s, c.lon, s + 0.5, c.lon + 0.5 >= 180 ? c.lon + 0.5 - 360 : c.lon + 0.5};
    std::vector<std::size_t> hits;
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (box.contains(pts[k])) hits.push_back(k);
    benchmark::DoNotOptimize(hits);
  }
}
BENCHMARK(BM_ViewportScan)->Arg(1000)->Arg(100000);

static void BM_IndexInsert(benchmark::State& state) {
  auto pts = random_points(4096, 7);
  rui::GeoIndex idx;
  std::size_t i = 0;
  for (auto _ : state) {
    idx.insert("p" + std::to_string(i & 4095), pts[i & 4095]);
    ++i;
  }
}
BENCHMARK(BM_IndexInsert);
