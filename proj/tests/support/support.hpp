#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rui/domain.hpp"
#include "rui/geo.hpp"
#include "rui/quality.hpp"
#include "rui/time.hpp"

namespace rui::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path fixture_path(std::string_view name);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Minimal byte strings that pass media-type sniffing.
std::string fake_jpeg(std::size_t size, std::uint32_t seed = 0);
std::string fake_png(std::size_t size, std::uint32_t seed = 0);

// The report-form values of the roadside accident example.
nlohmann::json accident_draft();
nlohmann::json random_draft(std::mt19937_64& rng);

// Deterministic clock advancing one millisecond per call.
class StepClock {
 public:
  explicit StepClock(Timestamp start = from_micros(1'700'000'000'000'000)) : now_(start) {}
  Timestamp operator()() {
    now_ += std::chrono::milliseconds(1);
    return now_;
  }

 private:
  Timestamp now_;
};

// ---- independent oracles --------------------------------------------------

namespace oracle {

// Great-circle distance via the spherical law of cosines.
double law_of_cosines_m(GeoPoint a, GeoPoint b);

// Geohash by explicit per-character interval halving.
std::string geohash(double lat, double lon, int precision);

std::vector<std::string> scan_radius(const std::map<std::string, GeoPoint>& points,
                                     GeoPoint center, double radius_m);
std::vector<std::string> scan_box(const std::map<std::string, GeoPoint>& points, double south,
                                  double west, double north, double east);

// Round half up to two decimals by decimal string arithmetic.
std::string two_decimals(double value);

// Published-table rows read from the fixture file.
struct TableRow {
  std::string characteristic;
  std::string sub_id;
  double mean = 0.0;
  std::string label;
};
std::vector<TableRow> evaluation_table();
double evaluation_table_printed_overall();

// Table 1 label for a value by comparing integer hundredths against the
// published range ends.
std::string band_label_hundredths(int hundredths);

}  // namespace oracle

// Ten respondents per sub-characteristic whose scores average exactly to the
// given one-decimal means.
std::vector<quality::SurveyResponse> responses_for_means(
    const std::map<std::string, double>& means, int respondents = 10);
std::string responses_csv(const std::vector<quality::SurveyResponse>& responses);

// ---- processes ------------------------------------------------------------

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs a program to completion with extra environment entries.
CommandResult run_command(const std::vector<std::string>& argv,
                          const std::vector<std::pair<std::string, std::string>>& env = {});

// `rui serve` running as a child process.
class ServeProcess {
 public:
  ServeProcess(const std::string& binary, const std::filesystem::path& data_dir,
               const std::vector<std::pair<std::string, std::string>>& env = {});
  ~ServeProcess();
  ServeProcess(const ServeProcess&) = delete;
  ServeProcess& operator=(const ServeProcess&) = delete;

  // Waits for the "listening on" line; false on timeout or early exit.
  bool wait_ready(std::chrono::milliseconds timeout = std::chrono::seconds(10));
  int port() const { return port_; }
  void kill_hard();
  // SIGTERM and wait; returns the exit code.
  int terminate();

 private:
  pid_t pid_ = -1;
  std::filesystem::path out_path_;
  TempDir logs_;
  int port_ = -1;
};

std::string rui_binary();

}  // namespace rui::test
