#include "rui/quality.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "rui/csv.hpp"
#include "rui/domain.hpp"

namespace rui::quality {

using nlohmann::json;

namespace {

constexpr std::array<SubCharacteristic, 3> kFunctional{{
    {"functional_completeness", "Functional Completeness"},
    {"functional_correctness", "Functional Correctness"},
    {"functional_appropriateness", "Functional Appropriateness"},
}};
constexpr std::array<SubCharacteristic, 3> kPerformance{{
    {"time_behavior", "Time-behavior"},
    {"capacity", "Capacity"},
    {"resource_utilization", "Resource Utilization"},
}};
constexpr std::array<SubCharacteristic, 2> kCompatibility{{
    {"co_existence", "Co-existence"},
    {"interoperability", "Interoperability"},
}};
constexpr std::array<SubCharacteristic, 6> kUsability{{
    {"appropriateness_recognizability", "Appropriateness Recognizability"},
    {"learnability", "Learnability"},
    {"operability", "Operability"},
    {"user_error_protection", "User error protection"},
    {"user_interface_aesthetics", "User interface aesthetics"},
    {"accessibility", "Accessibility"},
}};
constexpr std::array<SubCharacteristic, 4> kReliability{{
    {"maturity", "Maturity"},
    {"availability", "Availability"},
    {"fault_tolerance", "Fault tolerance"},
    {"recoverability", "Recoverability"},
}};
constexpr std::array<SubCharacteristic, 5> kSecurity{{
    {"confidentiality", "Confidentiality"},
    {"integrity", "Integrity"},
    {"non_repudiation", "Non-repudiation"},
    {"accountability", "Accountability"},
    {"authenticity", "Authenticity"},
}};
constexpr std::array<SubCharacteristic, 5> kMaintainability{{
    {"modularity", "Modularity"},
    {"reusability", "Reusability"},
    {"analyzability", "Analyzability"},
    {"modifiability", "Modifiability"},
    {"testability", "Testability"},
}};
constexpr std::array<SubCharacteristic, 3> kPortability{{
    {"adaptability", "Adaptability"},
    {"installability", "Installability"},
    {"replaceability", "Replaceability"},
}};

const std::array<Characteristic, 8> kCharacteristics{{
    {"functional_suitability", "Functional Suitability", kFunctional},
    {"performance_efficiency", "Performance Efficiency", kPerformance},
    {"compatibility", "Compatibility", kCompatibility},
    {"usability", "Usability", kUsability},
    {"reliability", "Reliability", kReliability},
    {"security", "Security", kSecurity},
    {"maintainability", "Maintainability", kMaintainability},
    {"portability", "Portability", kPortability},
}};

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  auto len = utf8_length(s);
  if (len < width) out.append(width - len, ' ');
  return out;
}

}  // namespace

CharacteristicCatalog::CharacteristicCatalog() : characteristics_(kCharacteristics) {
  for (const auto& c : characteristics_) {
    for (const auto& s : c.subs) order_.push_back(s.id);
  }
}

const CharacteristicCatalog& CharacteristicCatalog::iso25010() {
  static const CharacteristicCatalog catalog;
  return catalog;
}

bool CharacteristicCatalog::contains(std::string_view sub_id) const {
  return find(sub_id) != nullptr;
}

const Characteristic* CharacteristicCatalog::characteristic_of(std::string_view sub_id) const {
  for (const auto& c : characteristics_) {
    for (const auto& s : c.subs) {
      if (s.id == sub_id) return &c;
    }
  }
  return nullptr;
}

const SubCharacteristic* CharacteristicCatalog::find(std::string_view sub_id) const {
  for (const auto& c : characteristics_) {
    for (const auto& s : c.subs) {
      if (s.id == sub_id) return &s;
    }
  }
  return nullptr;
}

void CharacteristicCatalog::write_csv(std::ostream& out) const {
  out << "characteristic_id,sub_characteristic_id,name\n";
  for (const auto& c : characteristics_) {
    for (const auto& s : c.subs) out << c.id << ',' << s.id << ',' << s.name << '\n';
  }
}

std::string_view label(LikertBand band) {
  switch (band) {
    case LikertBand::Poor: return "Poor";
    case LikertBand::Fair: return "Fair";
    case LikertBand::Good: return "Good";
    case LikertBand::VeryGood: return "Very Good";
    case LikertBand::Excellent: return "Excellent";
  }
  return "Poor";
}

double round2(double value) { return std::floor(value * 100.0 + 0.5 + 1e-9) / 100.0; }

LikertBand likert_band(double mean) {
  if (!std::isfinite(mean)) throw Error(ErrorCode::OutOfScale, "mean is not a number");
  auto hundredths = std::llround(round2(mean) * 100.0);
  if (hundredths < 100 || hundredths > 500) {
    throw Error(ErrorCode::OutOfScale, "mean " + fixed2(mean) + " is outside 1.00..5.00");
  }
  if (hundredths <= 180) return LikertBand::Poor;
  if (hundredths <= 260) return LikertBand::Fair;
  if (hundredths <= 340) return LikertBand::Good;
  if (hundredths <= 420) return LikertBand::VeryGood;
  return LikertBand::Excellent;
}

std::map<std::string, double> sub_means(std::span<const SurveyResponse> responses) {
  const auto& catalog = CharacteristicCatalog::iso25010();
  std::map<std::string, std::pair<long, long>> sums;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : responses) {
    if (!catalog.contains(r.sub_characteristic_id)) {
      throw Error(ErrorCode::UnknownSubCharacteristic,
                  "unknown sub-characteristic '" + r.sub_characteristic_id + "'");
    }
    if (r.score < 1 || r.score > 5) {
      throw Error(ErrorCode::OutOfScale, "score " + std::to_string(r.score) + " is not 1..5");
    }
    if (!seen.emplace(r.respondent_id, r.sub_characteristic_id).second) {
      throw Error(ErrorCode::DuplicateResponse, "respondent '" + r.respondent_id +
                                                    "' answered '" + r.sub_characteristic_id +
                                                    "' twice");
    }
    auto& s = sums[r.sub_characteristic_id];
    s.first += r.score;
    s.second += 1;
  }
  std::map<std::string, double> means;
  std::string missing;
  for (auto id : catalog.sub_ids()) {
    auto it = sums.find(std::string(id));
    if (it == sums.end()) {
      missing += missing.empty() ? "" : ", ";
      missing += id;
      continue;
    }
    means[std::string(id)] =
        static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::EmptySubCharacteristic, "no responses for: " + missing);
  }
  return means;
}

double overall_average(std::span<const double> means) {
  auto expected = CharacteristicCatalog::iso25010().sub_count();
  if (means.size() != expected) {
    throw Error(ErrorCode::WrongItemCount, "expected " + std::to_string(expected) +
                                               " sub-characteristic means, got " +
                                               std::to_string(means.size()));
  }
  double total = 0.0;
  for (double m : means) total += m;
  return total / static_cast<double>(means.size());
}

const PublishedReference& published_evaluation() {
  static const PublishedReference ref{
      "ISO/IEC 25010 evaluation result table (as printed)",
      4.21,
      "Excellent",
      {
          {"functional_completeness", 4.1}, {"functional_correctness", 4.0},
          {"functional_appropriateness", 4.0}, {"time_behavior", 4.0},
          {"capacity", 4.3}, {"resource_utilization", 4.1},
          {"co_existence", 4.0}, {"interoperability", 3.8},
          {"appropriateness_recognizability", 3.8}, {"learnability", 4.6},
          {"operability", 3.8}, {"user_error_protection", 4.5},
          {"user_interface_aesthetics", 4.0}, {"accessibility", 3.8},
          {"maturity", 4.5}, {"availability", 4.6},
          {"fault_tolerance", 4.3}, {"recoverability", 4.1},
          {"confidentiality", 4.1}, {"integrity", 4.3},
          {"non_repudiation", 4.6}, {"accountability", 4.8},
          {"authenticity", 4.0}, {"modularity", 4.0},
          {"reusability", 4.1}, {"analyzability", 4.3},
          {"modifiability", 4.7}, {"testability", 4.5},
          {"adaptability", 4.5}, {"installability", 4.5},
          {"replaceability", 4.6},
      }};
  return ref;
}

QualityReport render_report(std::span<const SurveyResponse> responses,
                            const PublishedReference* reference) {
  const auto& catalog = CharacteristicCatalog::iso25010();
  auto means = sub_means(responses);

  std::map<std::string, std::size_t> counts;
  std::set<std::string> respondents;
  for (const auto& r : responses) {
    ++counts[r.sub_characteristic_id];
    respondents.insert(r.respondent_id);
  }

  QualityReport report;
  report.respondents = respondents.size();
  std::vector<double> ordered;
  for (const auto& c : catalog.characteristics()) {
    double total = 0.0;
    for (const auto& s : c.subs) {
      SubRow row;
      row.characteristic_id = c.id;
      row.characteristic = c.name;
      row.id = s.id;
      row.name = s.name;
      row.responses = counts[std::string(s.id)];
      row.mean_exact = means.at(std::string(s.id));
      row.mean = round2(row.mean_exact);
      row.band = likert_band(row.mean);
      total += row.mean_exact;
      ordered.push_back(row.mean_exact);
      report.rows.push_back(std::move(row));
    }
    CharacteristicRow crow{std::string(c.id), std::string(c.name), 0.0, 0.0, LikertBand::Poor};
    crow.mean_exact = total / static_cast<double>(c.subs.size());
    crow.mean = round2(crow.mean_exact);
    crow.band = likert_band(crow.mean);
    report.characteristics.push_back(std::move(crow));
  }
  report.overall_exact = overall_average(ordered);
  report.overall = round2(report.overall_exact);
  report.overall_band = likert_band(report.overall);

  if (reference) {
    PublishedComparison cmp;
    cmp.source = reference->source;
    cmp.published_overall = reference->overall;
    cmp.published_label = reference->overall_label;
    cmp.recomputed_overall = report.overall;
    cmp.difference = round2(report.overall - reference->overall);
    cmp.labels_agree = label(report.overall_band) == reference->overall_label;
    if (std::llround(report.overall * 100) == std::llround(reference->overall * 100)) {
      cmp.note = "recomputed overall matches the published figure";
    } else {
      cmp.note = "published overall " + fixed2(reference->overall) +
                 " differs from the recomputed mean of the sub-characteristic means (" +
                 fixed2(report.overall) + "); the published figure is shown as printed";
    }
    report.published = std::move(cmp);
  }
  return report;
}

std::string format_table(const QualityReport& report) {
  constexpr std::size_t kCharWidth = 24;
  constexpr std::size_t kSubWidth = 33;
  std::string out;
  out += pad("Characteristics", kCharWidth) + pad("Sub-Characteristics", kSubWidth) +
         pad("Mean", 7) + "Verbal Interpretation\n";
  out += std::string(kCharWidth + kSubWidth + 7 + 21, '-') + "\n";
  std::string current;
  for (const auto& row : report.rows) {
    bool first = row.characteristic_id != current;
    current = row.characteristic_id;
    out += pad(first ? row.characteristic : "", kCharWidth) + pad(row.name, kSubWidth) +
           pad(fixed2(row.mean), 7) + std::string(label(row.band)) + "\n";
  }
  out += std::string(kCharWidth + kSubWidth + 7 + 21, '-') + "\n";
  for (const auto& c : report.characteristics) {
    out += pad(c.name + " (mean)", kCharWidth + kSubWidth) + pad(fixed2(c.mean), 7) +
           std::string(label(c.band)) + "\n";
  }
  out += std::string(kCharWidth + kSubWidth + 7 + 21, '-') + "\n";
  out += pad("Overall Average", kCharWidth + kSubWidth) + pad(fixed2(report.overall), 7) +
         std::string(label(report.overall_band)) + "\n";
  if (report.published) {
    const auto& p = *report.published;
    out += pad("Published Overall (as printed)", kCharWidth + kSubWidth) +
           pad(fixed2(p.published_overall), 7) + p.published_label + "\n";
    out += "Note: " + p.note + "\n";
  }
  return out;
}

json to_json(const QualityReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back(json{{"characteristic_id", r.characteristic_id},
                        {"characteristic", r.characteristic},
                        {"sub_characteristic_id", r.id},
                        {"sub_characteristic", r.name},
                        {"responses", r.responses},
                        {"mean", r.mean},
                        {"mean_unrounded", r.mean_exact},
                        {"interpretation", label(r.band)}});
  }
  json chars = json::array();
  for (const auto& c : report.characteristics) {
    chars.push_back(json{{"characteristic_id", c.id},
                         {"characteristic", c.name},
                         {"mean", c.mean},
                         {"mean_unrounded", c.mean_exact},
                         {"interpretation", label(c.band)}});
  }
  json j{{"respondents", report.respondents},
         {"sub_characteristics", std::move(rows)},
         {"characteristics", std::move(chars)},
         {"overall_average", report.overall},
         {"overall_average_unrounded", report.overall_exact},
         {"overall_interpretation", label(report.overall_band)}};
  if (report.published) {
    const auto& p = *report.published;
    j["published"] = json{{"source", p.source},
                          {"overall_average", p.published_overall},
                          {"overall_interpretation", p.published_label},
                          {"recomputed_overall_average", p.recomputed_overall},
                          {"difference", p.difference},
                          {"interpretations_agree", p.labels_agree},
                          {"note", p.note}};
  }
  return j;
}

ParsedResponses parse_responses_csv(std::istream& in) {
  const auto& catalog = CharacteristicCatalog::iso25010();
  ParsedResponses out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      bool ok = fields && fields->size() == 3 && trim((*fields)[0]) == "respondent_id" &&
                trim((*fields)[1]) == "sub_characteristic_id" && trim((*fields)[2]) == "score";
      if (!ok) {
        out.problems.push_back(
            {line_no, "header must be respondent_id,sub_characteristic_id,score"});
        return out;
      }
      continue;
    }
    if (!fields || fields->size() != 3) {
      out.problems.push_back({line_no, "expected 3 fields"});
      continue;
    }
    SurveyResponse r{trim((*fields)[0]), trim((*fields)[1]), 0};
    auto score_text = trim((*fields)[2]);
    auto [ptr, ec] =
        std::from_chars(score_text.data(), score_text.data() + score_text.size(), r.score);
    if (r.respondent_id.empty()) {
      out.problems.push_back({line_no, "respondent_id is empty"});
    } else if (!catalog.contains(r.sub_characteristic_id)) {
      out.problems.push_back(
          {line_no, "UnknownSubCharacteristic '" + r.sub_characteristic_id + "'"});
    } else if (ec != std::errc{} || ptr != score_text.data() + score_text.size() ||
               r.score < 1 || r.score > 5) {
      out.problems.push_back({line_no, "score must be an integer 1..5"});
    } else if (!seen.emplace(r.respondent_id, r.sub_characteristic_id).second) {
      out.problems.push_back({line_no, "duplicate response for (" + r.respondent_id + ", " +
                                           r.sub_characteristic_id + ")"});
    } else {
      out.responses.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace rui::quality
