#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "rui/quality.hpp"

namespace {

std::vector<rui::quality::SurveyResponse> survey(int respondents) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> score(1, 5);
  std::vector<rui::quality::SurveyResponse> out;
  for (int r = 0; r < respondents; ++r)
    for (auto id : rui::quality::CharacteristicCatalog::iso25010().sub_ids())
      out.push_back({"r" + std::to_string(r), std::string(id), score(rng)});
  return out;
}

}  // namespace

static void BM_LikertBand(benchmark::State& state) {
  int h = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rui::quality::likert_band(h / 100.0));
    if (++h > 500) h = 100;
  }
}
BENCHMARK(BM_LikertBand);

static void BM_RenderReport(benchmark::State& state) {
  auto responses = survey(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rui::quality::render_report(responses));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(responses.size()));
}
BENCHMARK(BM_RenderReport)->Arg(30)->Arg(1000);
BENCHMARK_MAIN();
