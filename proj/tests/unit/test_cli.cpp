#include <doctest.h>

#include "http_support.hpp"

using namespace rui;
using namespace rui::test;
using nlohmann::json;

namespace {

std::vector<std::pair<std::string, std::string>> admin_env() {
  return {{"RUI_ADMIN_USER", kAdminUser}, {"RUI_ADMIN_PASS_HASH", admin_hash()}};
}

std::map<std::string, double> table_means() {
  std::map<std::string, double> m;
  for (const auto& row : oracle::evaluation_table()) m[row.sub_id] = row.mean;
  return m;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(run_command({rui_binary()}).exit_code == 1);
  CHECK(run_command({rui_binary(), "launch"}).exit_code == 1);
  auto r = run_command({rui_binary(), "eval", "--responses", "x.csv", "--verbose"});
  CHECK(r.exit_code == 1);
  CHECK_FALSE(r.err.empty());
  CHECK(run_command({rui_binary(), "seed"}).exit_code == 1);
  CHECK(run_command({rui_binary(), "--help"}).exit_code == 0);
}

TEST_CASE("serve answers and shuts down cleanly") {
  TempDir dir;
  ServeProcess serve(rui_binary(), dir / "data", admin_env());
  REQUIRE(serve.wait_ready());
  auto cli = make_client(serve.port());
  auto res = cli.Get("/api/v1/updates");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto sub = submit_multipart(cli, accident_draft());
  REQUIRE(sub);
  CHECK(sub->status == 201);
  CHECK(serve.terminate() == 0);

  // Everything acknowledged is there after a restart.
  ServeProcess again(rui_binary(), dir / "data", admin_env());
  REQUIRE(again.wait_ready());
  auto cli2 = make_client(again.port());
  auto token = login(cli2);
  REQUIRE(token);
  auto listing = body_json(cli2.Get("/api/v1/admin/reports", bearer(*token)));
  CHECK(listing["items"].size() == 1);
}

TEST_CASE("serve exit codes") {
  TempDir dir;
  write_file(dir / "file", "not a directory");
  auto storage = run_command({rui_binary(), "serve", "--bind", "127.0.0.1:0", "--data",
                              (dir / "file" / "data").string()});
  CHECK(storage.exit_code == 3);

  ServeProcess holder(rui_binary(), dir / "a");
  REQUIRE(holder.wait_ready());
  auto busy = run_command({rui_binary(), "serve", "--bind",
                           "127.0.0.1:" + std::to_string(holder.port()), "--data",
                           (dir / "b").string()});
  CHECK(busy.exit_code == 2);

  auto locked = run_command({rui_binary(), "serve", "--bind", "127.0.0.1:0", "--data",
                             (dir / "a").string()});
  CHECK(locked.exit_code == 3);

  CHECK(run_command({rui_binary(), "serve", "--bind", "nonsense"}).exit_code == 1);
}

TEST_CASE("seed: insert, idempotent rerun, atomic rejection") {
  TempDir dir;
  auto data = (dir / "data").string();
  auto fixture = fixture_path("seed_reports.json").string();
  auto first = run_command({rui_binary(), "seed", "--file", fixture, "--data", data});
  CHECK(first.exit_code == 0);
  CHECK(first.out.find("inserted 10") != std::string::npos);
  auto second = run_command({rui_binary(), "seed", "--file", fixture, "--data", data});
  CHECK(second.exit_code == 0);
  CHECK(second.out.find("inserted 0, skipped 10") != std::string::npos);

  auto log_before = read_file(dir / "data" / "reports.log");
  auto bad = run_command({rui_binary(), "seed", "--file",
                          fixture_path("seed_bad_coordinate.json").string(), "--data", data,
                          "--approve-all"});
  CHECK(bad.exit_code == 4);
  CHECK(bad.err.find("CoordinateOutOfRange") != std::string::npos);
  CHECK(read_file(dir / "data" / "reports.log") == log_before);

  write_file(dir / "notjson.json", "{");
  CHECK(run_command({rui_binary(), "seed", "--file", (dir / "notjson.json").string(), "--data",
                     data})
            .exit_code == 4);

  // The admin listing shows exactly the ten pending fixtures.
  ServeProcess serve(rui_binary(), dir / "data", admin_env());
  REQUIRE(serve.wait_ready());
  auto cli = make_client(serve.port());
  auto token = login(cli);
  REQUIRE(token);
  auto listing = body_json(cli.Get("/api/v1/admin/reports?state=pending", bearer(*token)));
  CHECK(listing["items"].size() == 10);
  CHECK(public_feed_ids(cli).empty());
}

TEST_CASE("seed --approve-all publishes") {
  TempDir dir;
  auto r = run_command({rui_binary(), "seed", "--file", fixture_path("seed_reports.json").string(),
                        "--data", (dir / "data").string(), "--approve-all"});
  CHECK(r.exit_code == 0);
  auto exported = run_command({rui_binary(), "export", "--data", (dir / "data").string(),
                               "--state", "approved"});
  CHECK(exported.exit_code == 0);
  auto j = json::parse(exported.out);
  CHECK(j["reports"].size() == 10);
  CHECK(j["events"].size() == 10);
  auto dump = run_command({rui_binary(), "export", "--data", (dir / "data").string(), "--format",
                           "geo-dump"});
  CHECK(std::count(dump.out.begin(), dump.out.end(), '\n') == 10);
}

TEST_CASE("eval of the published column") {
  TempDir dir;
  write_file(dir / "responses.csv", responses_csv(responses_for_means(table_means())));
  auto r = run_command({rui_binary(), "eval", "--responses", (dir / "responses.csv").string(),
                        "--out", (dir / "report.json").string(), "--table",
                        "--compare-published"});
  REQUIRE(r.exit_code == 0);
  auto j = json::parse(read_file(dir / "report.json"));
  CHECK(j["overall_interpretation"] == "Excellent");
  CHECK(std::abs(j["overall_average"].get<double>() - 4.24) <= 0.005);
  CHECK(j["published"]["overall_average"] == 4.21);
  CHECK(r.out.find("4.24") != std::string::npos);
  CHECK(r.out.find("4.21") != std::string::npos);

  auto plain = run_command({rui_binary(), "eval", "--responses", (dir / "responses.csv").string()});
  CHECK(plain.exit_code == 0);
  CHECK(json::parse(plain.out)["overall_average"] == 4.24);
}

TEST_CASE("eval input errors") {
  TempDir dir;
  write_file(dir / "empty.csv", "");
  auto empty = run_command({rui_binary(), "eval", "--responses", (dir / "empty.csv").string(),
                            "--out", (dir / "o.json").string()});
  CHECK(empty.exit_code == 5);
  CHECK(empty.err.find("EmptySubCharacteristic") != std::string::npos);

  write_file(dir / "bad.csv",
             "respondent_id,sub_characteristic_id,score\nr1,capacity,9\nr1,bogus,3\n");
  auto bad = run_command({rui_binary(), "eval", "--responses", (dir / "bad.csv").string(),
                          "--out", (dir / "o.json").string()});
  CHECK(bad.exit_code == 5);
  CHECK(bad.err.find(":2:") != std::string::npos);
  CHECK(bad.err.find(":3:") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "o.json"));
}

}
