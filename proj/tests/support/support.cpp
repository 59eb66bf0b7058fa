#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <fcntl.h>
#include <fstream>
#include <numbers>
#include <regex>
#include <spawn.h>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

extern char** environ;

namespace rui::test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "rui-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixture_path(std::string_view name) { return fs::path(RUI_TEST_FIXTURES_DIR) / name; }

std::string rui_binary() { return RUI_TEST_BINARY; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

namespace {

std::string filler(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::string s(n, '\0');
  for (auto& c : s) c = static_cast<char>(rng() & 0xff);
  return s;
}

}  // namespace

std::string fake_jpeg(std::size_t size, std::uint32_t seed) {
  std::string head("\xFF\xD8\xFF\xE0", 4);
  if (size < 6) size = 6;
  return head + filler(size - 6, seed) + std::string("\xFF\xD9", 2);
}

std::string fake_png(std::size_t size, std::uint32_t seed) {
  std::string head("\x89PNG\r\n\x1a\n", 8);
  if (size < 8) size = 8;
  return head + filler(size - 8, seed);
}

nlohmann::json accident_draft() {
  return {{"title", "Car Accident in the road"},
          {"kind", "Car Accident"},
          {"address", "Mangima Manolo Fortich Bukidnon"},
          {"description", "Overturned truck blocking one lane"},
          {"location", {{"lat", 8.3695}, {"lon", 124.8560}}}};
}

nlohmann::json random_draft(std::mt19937_64& rng) {
  static const char* kinds[] = {"accident", "construction", "landslide",
                                "road repair", "obstruction", "other"};
  static const char* places[] = {"Mangima", "Dalirig", "Poblacion", "Sumilao", "Kalugmanan",
                                 "Lingion", "Tankulan", "Alae"};
  std::uniform_int_distribution<int> k(0, 5), p(0, 7);
  std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 179.999);
  std::string kind = kinds[k(rng)];
  std::string place = places[p(rng)];
  nlohmann::json d{{"title", kind + " at " + place},
                   {"kind", kind},
                   {"address", place + ", Manolo Fortich"},
                   {"description", "generated"},
                   {"location", {{"lat", lat(rng)}, {"lon", lon(rng)}}}};
  if (kind == "other") d["kind_label"] = "fallen tree";
  return d;
}

namespace oracle {

double law_of_cosines_m(GeoPoint a, GeoPoint b) {
  constexpr double deg = std::numbers::pi / 180.0;
  double c = std::sin(a.lat * deg) * std::sin(b.lat * deg) +
             std::cos(a.lat * deg) * std::cos(b.lat * deg) * std::cos((b.lon - a.lon) * deg);
  c = std::clamp(c, -1.0, 1.0);
  return 6'371'000.0 * std::acos(c);
}

std::string geohash(double lat, double lon, int precision) {
  static const char* alphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
  double lat_lo = -90, lat_hi = 90, lon_lo = -180, lon_hi = 180;
  bool lon_turn = true;
  std::string out;
  for (int c = 0; c < precision; ++c) {
    int idx = 0;
    for (int b = 0; b < 5; ++b) {
      idx <<= 1;
      if (lon_turn) {
        double mid = (lon_lo + lon_hi) / 2;
        if (lon >= mid) {
          idx |= 1;
          lon_lo = mid;
        } else {
          lon_hi = mid;
        }
      } else {
        double mid = (lat_lo + lat_hi) / 2;
        if (lat >= mid) {
          idx |= 1;
          lat_lo = mid;
        } else {
          lat_hi = mid;
        }
      }
      lon_turn = !lon_turn;
    }
    out += alphabet[idx];
  }
  return out;
}

std::vector<std::string> scan_radius(const std::map<std::string, GeoPoint>& points,
                                     GeoPoint center, double radius_m) {
  std::vector<std::string> out;
  for (const auto& [id, p] : points)
    if (haversine_m(center, p) <= radius_m) out.push_back(id);
  return out;
}

std::vector<std::string> scan_box(const std::map<std::string, GeoPoint>& points, double south,
                                  double west, double north, double east) {
  std::vector<std::string> out;
  for (const auto& [id, p] : points) {
    if (p.lat < south || p.lat > north) continue;
    bool in_lon = west <= east ? (p.lon >= west && p.lon <= east)
                               : (p.lon >= west || p.lon <= east);
    if (in_lon) out.push_back(id);
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int hundredths(const std::string& text) {
  auto dot = text.find('.');
  return std::stoi(text.substr(0, dot)) * 100 + std::stoi(text.substr(dot + 1));
}

}  // namespace

std::vector<TableRow> evaluation_table() {
  std::vector<TableRow> out;
  for (const auto& r : read_csv_rows(fixture_path("evaluation_table.csv"))) {
    if (r.at(0) == "Overall") continue;
    out.push_back({r.at(0), r.at(1), std::stod(r.at(2)), r.at(3)});
  }
  return out;
}

double evaluation_table_printed_overall() {
  for (const auto& r : read_csv_rows(fixture_path("evaluation_table.csv")))
    if (r.at(0) == "Overall") return std::stod(r.at(2));
  throw std::runtime_error("overall row missing");
}

std::string band_label_hundredths(int h) {
  static const auto rows = read_csv_rows(fixture_path("likert_ranges.csv"));
  std::string found;
  for (const auto& r : rows) {
    if (hundredths(r.at(1)) <= h && h <= hundredths(r.at(2))) {
      if (!found.empty()) return "AMBIGUOUS";
      found = r.at(3);
    }
  }
  return found;
}

}  // namespace oracle

std::vector<quality::SurveyResponse> responses_for_means(const std::map<std::string, double>& means,
                                                         int respondents) {
  std::vector<quality::SurveyResponse> out;
  for (const auto& [id, mean] : means) {
    long total = std::lround(mean * respondents);
    long base = total / respondents;
    long extra = total % respondents;
    for (int r = 0; r < respondents; ++r) {
      int score = static_cast<int>(base + (r < extra ? 1 : 0));
      out.push_back({"r" + std::to_string(r + 1), id, score});
    }
  }
  return out;
}

std::string responses_csv(const std::vector<quality::SurveyResponse>& responses) {
  std::string s = "respondent_id,sub_characteristic_id,score\n";
  for (const auto& r : responses)
    s += r.respondent_id + "," + r.sub_characteristic_id + "," + std::to_string(r.score) + "\n";
  return s;
}

// ---- processes ------------------------------------------------------------

namespace {

std::vector<std::string> merged_env(const std::vector<std::pair<std::string, std::string>>& extra) {
  std::vector<std::string> env;
  for (char** e = environ; *e; ++e) {
    std::string entry(*e);
    auto key = entry.substr(0, entry.find('='));
    bool overridden = std::any_of(extra.begin(), extra.end(),
                                  [&](const auto& kv) { return kv.first == key; });
    if (!overridden) env.push_back(entry);
  }
  for (const auto& [k, v] : extra) env.push_back(k + "=" + v);
  return env;
}

pid_t spawn(const std::vector<std::string>& argv,
            const std::vector<std::pair<std::string, std::string>>& env, const fs::path& out,
            const fs::path& err) {
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, 2, err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  auto env_strings = merged_env(env);
  std::vector<char*> envp;
  for (auto& e : env_strings) envp.push_back(e.data());
  envp.push_back(nullptr);

  pid_t pid = -1;
  int rc = posix_spawn(&pid, args[0], &actions, nullptr, args.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::runtime_error("posix_spawn failed for " + argv.at(0));
  return pid;
}

int wait_exit(pid_t pid) {
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

CommandResult run_command(const std::vector<std::string>& argv,
                          const std::vector<std::pair<std::string, std::string>>& env) {
  TempDir logs;
  auto out = logs / "out";
  auto err = logs / "err";
  pid_t pid = spawn(argv, env, out, err);
  CommandResult r;
  r.exit_code = wait_exit(pid);
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

ServeProcess::ServeProcess(const std::string& binary, const fs::path& data_dir,
                           const std::vector<std::pair<std::string, std::string>>& env) {
  out_path_ = logs_ / "out";
  pid_ = spawn({binary, "serve", "--bind", "127.0.0.1:0", "--data", data_dir.string()}, env,
               out_path_, logs_ / "err");
}

ServeProcess::~ServeProcess() {
  if (pid_ > 0) kill_hard();
}

bool ServeProcess::wait_ready(std::chrono::milliseconds timeout) {
  static const std::regex listening(R"(listening on http://[^:]+:(\d+))");
  auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    std::smatch m;
    auto text = read_file(out_path_);
    if (std::regex_search(text, m, listening)) {
      port_ = std::stoi(m[1].str());
      return true;
    }
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      return false;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return false;
}

void ServeProcess::kill_hard() {
  if (pid_ <= 0) return;
  ::kill(pid_, SIGKILL);
  wait_exit(pid_);
  pid_ = -1;
}

int ServeProcess::terminate() {
  if (pid_ <= 0) return -1;
  ::kill(pid_, SIGTERM);
  int code = wait_exit(pid_);
  pid_ = -1;
  return code;
}

}  // namespace rui::test
