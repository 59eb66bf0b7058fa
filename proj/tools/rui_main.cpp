#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rui/api_server.hpp"
#include "rui/config.hpp"
#include "rui/domain.hpp"
#include "rui/error.hpp"
#include "rui/feed_service.hpp"
#include "rui/quality.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kBindFailed = 2,
  kStorage = 3,
  kSeedInvalid = 4,
  kEvalInvalid = 5,
};

struct ServeArgs {
  std::string bind;
  std::string data;
  std::string gazetteer;
  double rate_limit = -1;
};

int cmd_serve(const ServeArgs& args) {
  rui::ServiceConfig config;
  try {
    config = rui::ServiceConfig::from_env();
  } catch (const rui::Error& e) {
    std::cerr << "rui serve: " << e.what() << "\n";
    return kUsage;
  }
  if (!args.bind.empty()) config.bind_addr = args.bind;
  if (!args.data.empty()) config.data_dir = args.data;
  if (!args.gazetteer.empty()) config.gazetteer_path = args.gazetteer;
  if (args.rate_limit > 0) config.rate_limit_per_min = args.rate_limit;

  auto addr = rui::split_host_port(config.bind_addr);
  if (!addr) {
    std::cerr << "rui serve: bad bind address '" << config.bind_addr << "'\n";
    return kUsage;
  }

  // Every thread started below inherits this mask, so the signals are only
  // ever delivered to the sigwait thread.
  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  std::unique_ptr<rui::GeocodingProvider> geocoder;
  try {
    geocoder = rui::make_geocoder(config);
  } catch (const rui::Error& e) {
    std::cerr << "rui serve: geocoder: " << e.what() << "\n";
    return kUsage;
  }

  std::unique_ptr<rui::FeedService> feed;
  try {
    rui::FeedServiceOptions opts;
    opts.data_dir = config.data_dir;
    feed = std::make_unique<rui::FeedService>(std::move(opts));
  } catch (const rui::Error& e) {
    std::cerr << "rui serve: storage: " << e.what() << "\n";
    return kStorage;
  }
  const auto& rec = feed->recovery();
  if (rec.discarded_bytes > 0)
    std::cerr << "rui serve: discarded " << rec.discarded_bytes
              << " bytes of incomplete log tail (" << rec.problem << ")\n";
  if (config.admin_user.empty() || config.admin_pass_hash.empty())
    std::cerr << "rui serve: RUI_ADMIN_USER / RUI_ADMIN_PASS_HASH not set; admin login disabled\n";

  rui::ApiServer server(*feed, geocoder.get(), config.api_config());
  int port = server.bind(addr->first, addr->second);
  if (port < 0) {
    std::cerr << "rui serve: cannot bind " << config.bind_addr << "\n";
    return kBindFailed;
  }
  std::cout << "listening on http://" << addr->first << ":" << port << std::endl;

  std::thread waiter([&server, sigs] {
    int sig = 0;
    sigwait(&sigs, &sig);
    server.stop();
  });
  server.run();
  // run() only returns after stop(); make sure the waiter is not stuck.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();

  try {
    feed->snapshot();
  } catch (const rui::Error& e) {
    std::cerr << "rui serve: final snapshot: " << e.what() << "\n";
    return kStorage;
  }
  return kOk;
}

int cmd_seed(const std::string& file, const std::string& data, bool approve_all) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "rui seed: cannot read " << file << "\n";
    return kSeedInvalid;
  }
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    std::cerr << "rui seed: " << file << " is not valid JSON\n";
    return kSeedInvalid;
  }
  if (doc.is_object() && doc.contains("reports")) doc = doc["reports"];
  if (!doc.is_array()) {
    std::cerr << "rui seed: expected an array of reports\n";
    return kSeedInvalid;
  }
  std::vector<nlohmann::json> drafts(doc.begin(), doc.end());

  std::unique_ptr<rui::FeedService> feed;
  try {
    rui::FeedServiceOptions opts;
    opts.data_dir = data;
    feed = std::make_unique<rui::FeedService>(std::move(opts));
  } catch (const rui::Error& e) {
    std::cerr << "rui seed: storage: " << e.what() << "\n";
    return kStorage;
  }
  try {
    auto result = feed->seed(drafts, approve_all);
    feed->snapshot();
    std::cout << "inserted " << result.inserted << ", skipped " << result.skipped << "\n";
  } catch (const rui::Error& e) {
    if (e.code() == rui::ErrorCode::StorageFailure) {
      std::cerr << "rui seed: storage: " << e.what() << "\n";
      return kStorage;
    }
    std::cerr << "rui seed: " << e.what() << "\n";
    return kSeedInvalid;
  }
  return kOk;
}

int cmd_eval(const std::string& responses, const std::string& out, bool table,
             bool compare_published) {
  std::ifstream in(responses);
  if (!in) {
    std::cerr << "rui eval: cannot read " << responses << "\n";
    return kEvalInvalid;
  }
  auto parsed = rui::quality::parse_responses_csv(in);
  if (!parsed.problems.empty()) {
    for (const auto& p : parsed.problems)
      std::cerr << responses << ":" << p.line << ": " << p.message << "\n";
    return kEvalInvalid;
  }

  rui::quality::QualityReport report;
  try {
    report = rui::quality::render_report(
        parsed.responses, compare_published ? &rui::quality::published_evaluation() : nullptr);
  } catch (const rui::Error& e) {
    std::cerr << "rui eval: " << rui::to_string(e.code()) << ": " << e.what() << "\n";
    return kEvalInvalid;
  }

  std::string json_text = rui::quality::to_json(report).dump(2) + "\n";
  if (!out.empty() && out != "-") {
    std::ofstream o(out, std::ios::binary | std::ios::trunc);
    o << json_text;
    if (!o) {
      std::cerr << "rui eval: cannot write " << out << "\n";
      return kStorage;
    }
  }
  if (table)
    std::cout << rui::quality::format_table(report);
  else if (out.empty() || out == "-")
    std::cout << json_text;
  return kOk;
}

int cmd_export(const std::string& data, const std::string& state, const std::string& format,
               const std::string& out) {
  std::unique_ptr<rui::FeedService> feed;
  try {
    rui::FeedServiceOptions opts;
    opts.data_dir = data;
    feed = std::make_unique<rui::FeedService>(std::move(opts));
  } catch (const rui::Error& e) {
    std::cerr << "rui export: storage: " << e.what() << "\n";
    return kStorage;
  }

  std::ostringstream body;
  if (format == "geo-dump") {
    feed->index_snapshot().dump(body);
  } else {
    std::optional<rui::ReportState> only;
    if (state != "all") only = rui::parse_report_state(state);
    if (state != "all" && !only) {
      std::cerr << "rui export: unknown state '" << state << "'\n";
      return kUsage;
    }
    auto reports = feed->all_reports();
    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
      if (a.submitted_at != b.submitted_at) return a.submitted_at > b.submitted_at;
      return a.id > b.id;
    });
    nlohmann::json doc{{"reports", nlohmann::json::array()}, {"events", nlohmann::json::array()}};
    for (const auto& r : reports) {
      if (only && r.state != *only) continue;
      doc["reports"].push_back(rui::to_json(r));
      if (auto ev = feed->event_for(r.id)) doc["events"].push_back(rui::to_json(*ev));
    }
    body << doc.dump(2) << "\n";
  }

  if (out.empty() || out == "-") {
    std::cout << body.str();
  } else {
    std::ofstream o(out, std::ios::binary | std::ios::trunc);
    o << body.str();
    if (!o) {
      std::cerr << "rui export: cannot write " << out << "\n";
      return kStorage;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road updates service"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--bind", serve.bind, "host:port (default RUI_BIND_ADDR)");
  serve_cmd->add_option("--data", serve.data, "Data directory (default RUI_DATA_DIR)");
  serve_cmd->add_option("--gazetteer", serve.gazetteer, "Gazetteer CSV for the stub geocoder");
  serve_cmd->add_option("--rate-limit", serve.rate_limit, "Submissions per minute per client");

  std::string seed_file, seed_data = "data";
  bool approve_all = false;
  auto* seed_cmd = app.add_subcommand("seed", "Load fixture reports");
  seed_cmd->add_option("--file", seed_file, "JSON array of report drafts")->required();
  seed_cmd->add_option("--data", seed_data, "Data directory");
  seed_cmd->add_flag("--approve-all", approve_all, "Approve every inserted report");

  std::string eval_responses, eval_out;
  bool eval_table = false, eval_published = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score a quality survey");
  eval_cmd->add_option("--responses", eval_responses, "respondent_id,sub_characteristic_id,score CSV")
      ->required();
  eval_cmd->add_option("--out", eval_out, "Write the JSON report here");
  eval_cmd->add_flag("--table", eval_table, "Print the tabular report to stdout");
  eval_cmd->add_flag("--compare-published", eval_published,
                     "Show the published overall figure next to the recomputed one");

  std::string export_data = "data", export_state = "all", export_format = "json", export_out;
  auto* export_cmd = app.add_subcommand("export", "Dump stored reports");
  export_cmd->add_option("--data", export_data, "Data directory");
  export_cmd->add_option("--state", export_state, "pending|approved|denied|all");
  export_cmd->add_option("--format", export_format, "json|geo-dump")
      ->check(CLI::IsMember({"json", "geo-dump"}));
  export_cmd->add_option("--out", export_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*serve_cmd) return cmd_serve(serve);
    if (*seed_cmd) return cmd_seed(seed_file, seed_data, approve_all);
    if (*eval_cmd) return cmd_eval(eval_responses, eval_out, eval_table, eval_published);
    if (*export_cmd) return cmd_export(export_data, export_state, export_format, export_out);
  } catch (const std::exception& e) {
    std::cerr << "rui: " << e.what() << "\n";
    return kStorage;
  }
  return kUsage;
}
