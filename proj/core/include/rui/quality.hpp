#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rui/error.hpp"

namespace rui::quality {

struct SubCharacteristic {
  std::string_view id;
  std::string_view name;
};

struct Characteristic {
  std::string_view id;
  std::string_view name;
  std::span<const SubCharacteristic> subs;
};

// The ISO/IEC 25010 product-quality model used by the survey instrument:
// 8 characteristics, 31 sub-characteristics, in presentation order.
class CharacteristicCatalog {
 public:
  static const CharacteristicCatalog& iso25010();

  std::span<const Characteristic> characteristics() const { return characteristics_; }
  std::size_t sub_count() const { return order_.size(); }
  // Sub-characteristic ids in catalog order.
  const std::vector<std::string_view>& sub_ids() const { return order_; }
  bool contains(std::string_view sub_id) const;
  const Characteristic* characteristic_of(std::string_view sub_id) const;
  const SubCharacteristic* find(std::string_view sub_id) const;

  // "characteristic_id,sub_characteristic_id,name" CSV with a header row.
  void write_csv(std::ostream& out) const;

 private:
  CharacteristicCatalog();
  std::span<const Characteristic> characteristics_;
  std::vector<std::string_view> order_;
};

enum class LikertBand { Poor, Fair, Good, VeryGood, Excellent };

std::string_view label(LikertBand band);

// Round half up to two decimals. Values that sit on a .xx5 boundary up to
// binary representation error round up.
double round2(double value);

// Maps a mean to its qualitative band. The value is rounded to two decimals
// first, which closes the gaps between the published ranges (1.80 | 1.81).
// Throws Error(OutOfScale) outside [1.00, 5.00].
LikertBand likert_band(double mean);

struct SurveyResponse {
  std::string respondent_id;
  std::string sub_characteristic_id;
  int score = 0;  // 1..5
};

// Unrounded arithmetic mean per sub-characteristic, for every catalog entry.
// Throws UnknownSubCharacteristic, DuplicateResponse, OutOfScale (score not
// in 1..5) or EmptySubCharacteristic.
std::map<std::string, double> sub_means(std::span<const SurveyResponse> responses);

// Unweighted mean of exactly the catalog's sub-characteristic means. Throws
// WrongItemCount.
double overall_average(std::span<const double> sub_means);

// Figures printed alongside the evaluation being reproduced, kept so a report
// can show them next to the recomputed values instead of silently adopting
// them.
struct PublishedReference {
  std::string source;
  double overall = 0.0;
  std::string overall_label;
  std::map<std::string, double> sub_means;
};

// The 31 sub-characteristic means and overall figure of the published
// evaluation result table.
const PublishedReference& published_evaluation();

struct SubRow {
  std::string characteristic_id;
  std::string characteristic;
  std::string id;
  std::string name;
  std::size_t responses = 0;
  double mean_exact = 0.0;
  double mean = 0.0;  // rounded
  LikertBand band = LikertBand::Poor;
};

struct CharacteristicRow {
  std::string id;
  std::string name;
  double mean_exact = 0.0;
  double mean = 0.0;
  LikertBand band = LikertBand::Poor;
};

struct PublishedComparison {
  std::string source;
  double published_overall = 0.0;
  std::string published_label;
  double recomputed_overall = 0.0;  // rounded
  double difference = 0.0;          // recomputed - published, rounded
  bool labels_agree = false;
  std::string note;
};

struct QualityReport {
  std::vector<SubRow> rows;
  std::vector<CharacteristicRow> characteristics;
  std::size_t respondents = 0;
  double overall_exact = 0.0;
  double overall = 0.0;
  LikertBand overall_band = LikertBand::Poor;
  std::optional<PublishedComparison> published;
};

QualityReport render_report(std::span<const SurveyResponse> responses,
                            const PublishedReference* reference = nullptr);

std::string format_table(const QualityReport& report);
nlohmann::json to_json(const QualityReport& report);

struct CsvProblem {
  std::size_t line = 0;
  std::string message;
};

struct ParsedResponses {
  std::vector<SurveyResponse> responses;
  std::vector<CsvProblem> problems;
};

// Reads "respondent_id,sub_characteristic_id,score". Every offending line is
// reported; unknown ids, duplicates and out-of-range scores included.
ParsedResponses parse_responses_csv(std::istream& in);

}  // namespace rui::quality
