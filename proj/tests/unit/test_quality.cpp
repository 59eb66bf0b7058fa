#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rui/error.hpp"
#include "rui/quality.hpp"
#include "support.hpp"

using namespace rui;
using namespace rui::quality;
namespace oracle = rui::test::oracle;

namespace {

std::map<std::string, double> table_means() {
  std::map<std::string, double> m;
  for (const auto& row : oracle::evaluation_table()) m[row.sub_id] = row.mean;
  return m;
}

std::vector<SurveyResponse> constant_responses(int score, int respondents = 1) {
  std::vector<SurveyResponse> out;
  for (int r = 0; r < respondents; ++r)
    for (auto id : CharacteristicCatalog::iso25010().sub_ids())
      out.push_back({"r" + std::to_string(r), std::string(id), score});
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("quality") {

TEST_CASE("catalog has 31 unique sub-characteristics") {
  const auto& cat = CharacteristicCatalog::iso25010();
  CHECK(cat.sub_count() == 31);
  CHECK(cat.characteristics().size() == 8);
  std::set<std::string_view> ids(cat.sub_ids().begin(), cat.sub_ids().end());
  CHECK(ids.size() == 31);
  CHECK(cat.contains("testability"));
  for (const auto& row : oracle::evaluation_table()) {
    REQUIRE(cat.contains(row.sub_id));
    CHECK(cat.characteristic_of(row.sub_id)->name == row.characteristic);
  }
}

TEST_CASE("catalog file matches the in-code catalog") {
  std::ostringstream ss;
  CharacteristicCatalog::iso25010().write_csv(ss);
  CHECK(ss.str() == test::read_file(RUI_CATALOG_CSV));
}

TEST_CASE("published band examples") {
  CHECK(label(likert_band(4.21)) == "Excellent");
  CHECK(label(likert_band(3.41)) == "Very Good");
  CHECK(label(likert_band(1.00)) == "Poor");
  CHECK(label(likert_band(1.80)) == "Poor");
  CHECK(label(likert_band(1.81)) == "Fair");
  CHECK(label(likert_band(2.60)) == "Fair");
  CHECK(label(likert_band(2.61)) == "Good");
  CHECK(label(likert_band(3.40)) == "Good");
  CHECK(label(likert_band(4.20)) == "Very Good");
  CHECK(label(likert_band(5.00)) == "Excellent");
}

TEST_CASE("banding is total and disjoint over the two-decimal grid") {
  for (int h = 100; h <= 500; ++h) {
    auto expected = oracle::band_label_hundredths(h);
    REQUIRE(!expected.empty());
    REQUIRE(expected != "AMBIGUOUS");
    CAPTURE(h);
    CHECK(label(likert_band(h / 100.0)) == expected);
  }
}

TEST_CASE("gap values band by their rounded value") {
  CHECK(label(likert_band(1.804)) == "Poor");
  CHECK(label(likert_band(1.805)) == "Fair");
  CHECK(label(likert_band(4.205)) == "Excellent");
  CHECK(label(likert_band(4.2049)) == "Very Good");
}

TEST_CASE("out of scale") {
  CHECK(code_of([] { likert_band(0.99); }) == ErrorCode::OutOfScale);
  CHECK(code_of([] { likert_band(5.01); }) == ErrorCode::OutOfScale);
  CHECK(code_of([] { likert_band(0.994); }) == ErrorCode::OutOfScale);
}

TEST_CASE("round half up") {
  CHECK(round2(4.235) == 4.24);
  CHECK(round2(4.2355) == 4.24);
  CHECK(round2(4.2349) == 4.23);
  CHECK(round2(1.005) == 1.01);
  CHECK(round2(13.0 / 3.0) == 4.33);
}

TEST_CASE("sub means") {
  auto all5 = sub_means(constant_responses(5, 3));
  CHECK(all5.size() == 31);
  for (const auto& [id, m] : all5) CHECK(m == 5.0);

  auto responses = constant_responses(4);
  auto& cap = *std::find_if(responses.begin(), responses.end(),
                            [](auto& r) { return r.sub_characteristic_id == "capacity"; });
  cap.score = 4;
  responses.push_back({"r1b", "capacity", 4});
  responses.push_back({"r1c", "capacity", 5});
  auto means = sub_means(responses);
  CHECK(round2(means.at("capacity")) == 4.33);
  CHECK(means.at("capacity") == doctest::Approx((4 + 4 + 5) / 3.0));
}

TEST_CASE("sub means errors") {
  auto r = constant_responses(4);
  r.push_back({"r9", "portability_of_fish", 4});
  CHECK(code_of([&] { sub_means(r); }) == ErrorCode::UnknownSubCharacteristic);

  r = constant_responses(4);
  r.push_back(r.front());
  CHECK(code_of([&] { sub_means(r); }) == ErrorCode::DuplicateResponse);

  r = constant_responses(4);
  r.back().score = 6;
  CHECK(code_of([&] { sub_means(r); }) == ErrorCode::OutOfScale);

  r = constant_responses(4);
  r.pop_back();
  CHECK(code_of([&] { sub_means(r); }) == ErrorCode::EmptySubCharacteristic);

  CHECK(code_of([] { sub_means({}); }) == ErrorCode::EmptySubCharacteristic);
}

TEST_CASE("overall average") {
  std::vector<double> fours(31, 4.0);
  CHECK(overall_average(fours) == 4.0);
  std::vector<double> short_list(30, 4.0);
  CHECK(code_of([&] { overall_average(short_list); }) == ErrorCode::WrongItemCount);

  // Independent summation over the published column.
  std::vector<double> column;
  double sum = 0;
  for (const auto& row : oracle::evaluation_table()) {
    column.push_back(row.mean);
    sum += row.mean;
  }
  CHECK(column.size() == 31);
  CHECK(sum == doctest::Approx(131.3));
  CHECK(overall_average(column) == doctest::Approx(sum / 31.0));
  CHECK(round2(overall_average(column)) == 4.24);
  CHECK(oracle::evaluation_table_printed_overall() == 4.21);
  CHECK(label(likert_band(4.21)) == label(likert_band(4.24)));
}

TEST_CASE("engineered responses reproduce every published row label") {
  auto responses = test::responses_for_means(table_means());
  auto report = render_report(responses, &published_evaluation());
  REQUIRE(report.rows.size() == 31);
  for (const auto& row : oracle::evaluation_table()) {
    auto it = std::find_if(report.rows.begin(), report.rows.end(),
                           [&](const SubRow& r) { return r.id == row.sub_id; });
    REQUIRE(it != report.rows.end());
    CAPTURE(row.sub_id);
    CHECK(it->mean == doctest::Approx(row.mean));
    CHECK(label(it->band) == row.label);
  }
  CHECK(std::abs(report.overall - 4.24) <= 0.005);
  CHECK(label(report.overall_band) == "Excellent");
  REQUIRE(report.published);
  CHECK(report.published->published_overall == 4.21);
  CHECK(report.published->recomputed_overall == 4.24);
  CHECK(report.published->difference == doctest::Approx(0.03));
  CHECK(report.published->labels_agree);

  auto table = format_table(report);
  CHECK(table.find("4.24") != std::string::npos);
  CHECK(table.find("4.21") != std::string::npos);
  CHECK(table.find("Capacity") != std::string::npos);

  auto j = to_json(report);
  CHECK(j["overall_average"].get<double>() == 4.24);
  CHECK(j["overall_interpretation"] == "Excellent");
  CHECK(j["published"]["overall_average"].get<double>() == 4.21);
  CHECK(j["published"]["recomputed_overall_average"].get<double>() == 4.24);
}

TEST_CASE("published reference matches the table fixture") {
  const auto& ref = published_evaluation();
  CHECK(ref.overall == oracle::evaluation_table_printed_overall());
  CHECK(ref.overall_label == "Excellent");
  CHECK(ref.sub_means == table_means());
}

TEST_CASE("single respondent scoring 3 everywhere is Good") {
  auto report = render_report(constant_responses(3));
  for (const auto& row : report.rows) CHECK(label(row.band) == "Good");
  for (const auto& c : report.characteristics) CHECK(label(c.band) == "Good");
  CHECK(report.overall == 3.0);
  CHECK(label(report.overall_band) == "Good");
  CHECK_FALSE(report.published);
}

TEST_CASE("permutation invariance, monotonicity and scale bounds") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> score(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    auto responses = constant_responses(1, 4);
    for (auto& r : responses) r.score = score(rng);
    auto base = render_report(responses);
    CHECK(base.overall >= 1.0);
    CHECK(base.overall <= 5.0);

    auto shuffled = responses;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto again = render_report(shuffled);
    CHECK(again.overall_exact == base.overall_exact);
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
      CHECK(again.rows[i].mean == base.rows[i].mean);
      CHECK(again.rows[i].band == base.rows[i].band);
    }

    auto raised = responses;
    auto& pick = raised[std::uniform_int_distribution<std::size_t>(0, raised.size() - 1)(rng)];
    if (pick.score < 5) ++pick.score;
    auto up = render_report(raised);
    CHECK(up.overall_exact >= base.overall_exact);
    for (std::size_t i = 0; i < base.rows.size(); ++i)
      CHECK(up.rows[i].mean_exact >= base.rows[i].mean_exact);
  }
}

TEST_CASE("responses CSV parsing") {
  std::istringstream ok(test::responses_csv(constant_responses(4)));
  auto parsed = parse_responses_csv(ok);
  CHECK(parsed.problems.empty());
  CHECK(parsed.responses.size() == 31);

  std::istringstream bad(
      "respondent_id,sub_characteristic_id,score\n"
      "r1,capacity,4\n"
      "r1,capacity,5\n"
      "r2,nonsense,3\n"
      "r3,capacity,7\n"
      "r4,capacity\n"
      "r5,capacity,x\n");
  parsed = parse_responses_csv(bad);
  std::vector<std::size_t> lines;
  for (const auto& p : parsed.problems) lines.push_back(p.line);
  CHECK(lines == std::vector<std::size_t>{3, 4, 5, 6, 7});

  std::istringstream header("who,what,score\n");
  CHECK(parse_responses_csv(header).problems.size() == 1);

  std::istringstream empty("");
  parsed = parse_responses_csv(empty);
  CHECK(parsed.problems.empty());
  CHECK(parsed.responses.empty());
}

}
