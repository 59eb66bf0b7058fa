#include "rui/api_server.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <iostream>
#include <map>

#include "rui/digest.hpp"

namespace rui {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status, json{{"error", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ValidationFailed:
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadCursor: return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::AlreadyDecided:
    case ErrorCode::ConflictDetected: return 409;
    case ErrorCode::AttachmentTooLarge: return 413;
    case ErrorCode::UnsupportedMediaType: return 415;
    case ErrorCode::MissingDenyReason: return 422;
    case ErrorCode::StorageFailure:
    case ErrorCode::ProviderUnavailable: return 503;
    default: return 500;
  }
}

std::string_view wire_code(ErrorCode code) {
  // A lost compare-and-set is reported the same way as a plain repeat.
  if (code == ErrorCode::ConflictDetected) return "AlreadyDecided";
  return to_string(code);
}

void send_failure(httplib::Response& res, const Error& e) {
  if (auto* v = dynamic_cast<const ValidationError*>(&e)) {
    json fields = json::array();
    for (const auto& f : v->errors()) {
      fields.push_back(json{{"field", f.field}, {"code", to_string(f.code)}, {"message", f.message}});
    }
    send_json(res, 400,
              json{{"error", "ValidationErrors"}, {"message", "report failed validation"},
                   {"fields", std::move(fields)}});
    return;
  }
  int status = status_for(e.code());
  std::string message = e.what();
  if (e.code() == ErrorCode::StorageFailure) {
    std::cerr << "rui: storage failure: " << e.what() << "\n";
    message = "storage is unavailable";
  } else if (status == 500) {
    message = "internal error";
  }
  send_error(res, status, wire_code(e.code()), message);
}

std::optional<json> parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string bearer_token(const httplib::Request& req) {
  auto header = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.size() <= kPrefix.size() || header.compare(0, kPrefix.size(), kPrefix) != 0) {
    return {};
  }
  return trim(std::string_view(header).substr(kPrefix.size()));
}

std::size_t parse_page_size(const httplib::Request& req, std::size_t fallback) {
  if (!req.has_param("page_size")) return fallback;
  auto text = req.get_param_value("page_size");
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v < 1 || v > kMaxPageSize) {
    throw Error(ErrorCode::InvalidArgument, "page_size must be an integer 1..100");
  }
  return v;
}

std::optional<std::string> cursor_param(const httplib::Request& req) {
  if (!req.has_param("cursor")) return std::nullopt;
  auto c = req.get_param_value("cursor");
  if (c.empty()) return std::nullopt;
  return c;
}

json page_json(const FeedPage& page) {
  json items = json::array();
  for (const auto& u : page.items) items.push_back(to_json(u));
  return json{{"items", std::move(items)},
              {"next_cursor", page.next_cursor ? json(*page.next_cursor) : json(nullptr)}};
}

}  // namespace

ApiServer::ApiServer(FeedService& feed, const GeocodingProvider* geocoder, ApiConfig config)
    : feed_(feed),
      geocoder_(geocoder),
      config_(std::move(config)),
      auth_(config_.admin_user, config_.admin_pass_hash),
      sessions_(config_.session_ttl, config_.clock),
      submit_limiter_(std::max(1.0, config_.submissions_per_minute),
                      std::max(1.0, config_.submissions_per_minute), config_.clock),
      login_limiter_(std::max(1.0, config_.login_failures_per_minute),
                     std::max(1.0, config_.login_failures_per_minute), config_.clock),
      server_(std::make_unique<httplib::Server>()) {
  server_->set_payload_max_length(config_.max_body_bytes);
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // silently share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    switch (res.status) {
      case 404: send_error(res, 404, "NotFound", "no such resource"); break;
      case 413: send_error(res, 413, "PayloadTooLarge", "request body exceeds the limit"); break;
      default: send_error(res, res.status, "HttpError", "request failed"); break;
    }
  });
  server_->set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        send_error(res, 500, "InternalError", "internal error");
      });

  add_route("POST", R"(/api/v1/admin/login)", false, true, &ApiServer::handle_login);
  add_route("POST", R"(/api/v1/admin/logout)", true, true, &ApiServer::handle_logout);
  add_route("GET", R"(/api/v1/admin/reports)", true, false, &ApiServer::handle_admin_list);
  add_route("GET", R"(/api/v1/admin/reports/([A-Za-z0-9_-]+))", true, false,
            &ApiServer::handle_admin_get);
  add_route("POST", R"(/api/v1/admin/reports/([A-Za-z0-9_-]+)/decision)", true, true,
            &ApiServer::handle_decision);
  add_route("POST", R"(/api/v1/reports)", false, true, &ApiServer::handle_submit);
  add_route("GET", R"(/api/v1/updates)", false, false, &ApiServer::handle_updates);
  add_route("GET", R"(/api/v1/updates/([A-Za-z0-9_-]+))", false, false,
            &ApiServer::handle_update);
  add_route("GET", R"(/api/v1/catalog/incident-kinds)", false, false, &ApiServer::handle_kinds);
  add_route("GET", R"(/api/v1/geocode)", false, false, &ApiServer::handle_geocode);
  add_route("GET", R"(/attachments/([^/]+))", false, false, &ApiServer::handle_attachment);
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::add_route(const char* method, const char* pattern, bool admin_only, bool mutates,
                          Handler handler) {
  routes_.push_back({method, pattern, admin_only, mutates});
  auto wrapped = [this, admin_only, handler](const httplib::Request& req,
                                             httplib::Response& res) {
    try {
      if (admin_only && !authorized(req)) {
        send_error(res, 401, "Unauthorized", "a valid admin token is required");
        return;
      }
      (this->*handler)(req, res);
    } catch (const Error& e) {
      send_failure(res, e);
    } catch (const std::exception& e) {
      std::cerr << "rui: unhandled error: " << e.what() << "\n";
      send_error(res, 500, "InternalError", "internal error");
    }
  };
  if (std::string_view(method) == "GET") {
    server_->Get(pattern, wrapped);
  } else {
    server_->Post(pattern, wrapped);
  }
}

bool ApiServer::authorized(const httplib::Request& req) {
  return sessions_.validate(bearer_token(req)).has_value();
}

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) port_ = -1;
  return port_;
}

void ApiServer::run() { server_->listen_after_bind(); }

int ApiServer::start(const std::string& host, int port) {
  if (bind(host, port) < 0) return -1;
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
  return port_;
}

void ApiServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

void ApiServer::handle_login(const httplib::Request& req, httplib::Response& res) {
  const auto& client = req.remote_addr;
  if (!login_limiter_.would_allow(client)) {
    send_error(res, 429, "TooManyAttempts", "too many failed logins, try again later");
    return;
  }
  auto body = parse_body(req);
  if (!body || !body->is_object() || !(*body)["username"].is_string() ||
      !(*body)["password"].is_string()) {
    send_error(res, 400, "InvalidArgument", "expected {username, password}");
    return;
  }
  auto username = (*body)["username"].get<std::string>();
  auto password = (*body)["password"].get<std::string>();
  if (!auth_.check(username, password)) {
    login_limiter_.consume(client);
    send_error(res, 401, "InvalidCredentials", "invalid username or password");
    return;
  }
  auto session = sessions_.create(username);
  send_json(res, 200,
            json{{"token", session.token}, {"expires_at", format_rfc3339(session.expires_at)}});
}

void ApiServer::handle_logout(const httplib::Request& req, httplib::Response& res) {
  sessions_.revoke(bearer_token(req));
  res.status = 204;
}

void ApiServer::handle_submit(const httplib::Request& req, httplib::Response& res) {
  if (!submit_limiter_.try_acquire(req.remote_addr)) {
    send_error(res, 429, "RateLimited", "too many submissions, try again later");
    return;
  }
  json draft;
  std::vector<ImageUpload> images;
  if (req.is_multipart_form_data()) {
    if (!req.has_file("report")) {
      throw ValidationError({{"report", FieldErrorCode::MissingField, "report part is required"}});
    }
    try {
      draft = json::parse(req.get_file_value("report").content);
    } catch (const json::exception&) {
      throw ValidationError(
          {{"report", FieldErrorCode::InvalidFormat, "report part must be JSON"}});
    }
    // Parts named image, image[0], image[1], ... in index order.
    std::multimap<long, const httplib::MultipartFormData*> parts;
    for (const auto& [name, part] : req.files) {
      if (name == "image") {
        parts.emplace(-1, &part);
      } else if (name.size() > 7 && name.rfind("image[", 0) == 0 && name.back() == ']') {
        long idx = 0;
        auto digits = std::string_view(name).substr(6, name.size() - 7);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (ec == std::errc{} && ptr == digits.data() + digits.size()) parts.emplace(idx, &part);
      }
    }
    for (const auto& [idx, part] : parts) images.push_back({part->content, part->content_type});
  } else {
    auto body = parse_body(req);
    if (!body) {
      throw ValidationError({{"report", FieldErrorCode::InvalidFormat, "body must be JSON"}});
    }
    draft = std::move(*body);
  }
  auto id = feed_.submit_report(draft, std::move(images));
  send_json(res, 201, json{{"id", id}, {"state", "pending"}});
}

void ApiServer::handle_updates(const httplib::Request& req, httplib::Response& res) {
  FeedQuery q;
  q.page_size = parse_page_size(req, config_.default_page_size);
  q.cursor = cursor_param(req);
  if (req.has_param("bbox")) {
    q.viewport = parse_bbox(req.get_param_value("bbox"));
    if (!q.viewport) {
      throw Error(ErrorCode::InvalidArgument, "bbox must be south,west,north,east in degrees");
    }
  }
  if (req.has_param("since")) {
    q.since = parse_rfc3339(req.get_param_value("since"));
    if (!q.since) throw Error(ErrorCode::InvalidArgument, "since must be an RFC 3339 timestamp");
  }
  if (req.has_param("q")) {
    auto text = trim(req.get_param_value("q"));
    if (text.empty()) throw Error(ErrorCode::InvalidArgument, "q must not be blank");
    q.text = text;
  }

  auto generation = feed_.visibility_generation();
  auto page = feed_.list_feed(q);

  std::string basis = std::to_string(generation) + "|" + req.get_param_value("bbox") + "|" +
                      req.get_param_value("since") + "|" + req.get_param_value("q") + "|" +
                      q.cursor.value_or("") + "|" + std::to_string(q.page_size);
  if (!page.items.empty()) {
    basis += "|" + page.items.front().id + "|" + format_rfc3339(page.items.front().submitted_at);
  }
  auto etag = "W/\"" + sha256_hex(basis).substr(0, 32) + "\"";
  res.set_header("ETag", etag);
  res.set_header("Cache-Control", "no-cache");
  if (req.get_header_value("If-None-Match") == etag) {
    res.status = 304;
    return;
  }
  send_json(res, 200, page_json(page));
}

void ApiServer::handle_update(const httplib::Request& req, httplib::Response& res) {
  auto update = feed_.find(req.matches[1].str());
  if (!update || !publicly_visible(*update)) {
    send_error(res, 404, "NotFound", "no such update");
    return;
  }
  send_json(res, 200, to_json(*update));
}

void ApiServer::handle_admin_list(const httplib::Request& req, httplib::Response& res) {
  auto state_text = req.has_param("state") ? req.get_param_value("state") : "pending";
  auto state = parse_report_state(state_text);
  if (!state) throw Error(ErrorCode::InvalidArgument, "state must be pending, approved or denied");
  auto page = feed_.list_by_state(*state, cursor_param(req),
                                  parse_page_size(req, kMaxPageSize));
  json items = json::array();
  for (const auto& u : page.items) {
    auto j = to_json(u);
    auto event = feed_.event_for(u.id);
    j["moderation"] = event ? to_json(*event) : json(nullptr);
    items.push_back(std::move(j));
  }
  send_json(res, 200,
            json{{"items", std::move(items)},
                 {"next_cursor", page.next_cursor ? json(*page.next_cursor) : json(nullptr)}});
}

void ApiServer::handle_admin_get(const httplib::Request& req, httplib::Response& res) {
  auto id = req.matches[1].str();
  auto update = feed_.find(id);
  if (!update) throw Error(ErrorCode::NotFound, "no report with id " + id);
  auto j = to_json(*update);
  auto event = feed_.event_for(id);
  j["moderation"] = event ? to_json(*event) : json(nullptr);
  send_json(res, 200, j);
}

void ApiServer::handle_decision(const httplib::Request& req, httplib::Response& res) {
  auto id = req.matches[1].str();
  auto body = parse_body(req);
  if (!body || !body->is_object() || !(*body)["action"].is_string()) {
    throw Error(ErrorCode::InvalidArgument, "expected {action, reason}");
  }
  auto action = parse_moderation_action((*body)["action"].get<std::string>());
  if (!action) throw Error(ErrorCode::InvalidArgument, "action must be approve or deny");
  std::string reason;
  if (body->contains("reason") && (*body)["reason"].is_string()) {
    reason = (*body)["reason"].get<std::string>();
  }
  auto session = sessions_.validate(bearer_token(req));
  auto decision = feed_.decide(id, *action, session ? session->admin_id : "admin", reason);
  send_json(res, 200,
            json{{"report", to_json(decision.update)}, {"event", to_json(decision.event)}});
}

void ApiServer::handle_attachment(const httplib::Request& req, httplib::Response& res) {
  auto hash = req.matches[1].str();
  auto access = is_sha256_hex(hash) ? feed_.attachment(hash) : std::nullopt;
  if (!access || (!access->publicly_visible && !authorized(req))) {
    send_error(res, 404, "NotFound", "no such attachment");
    return;
  }
  auto bytes = feed_.read_attachment(hash);
  if (!bytes) {
    send_error(res, 404, "NotFound", "no such attachment");
    return;
  }
  res.set_header("ETag", "\"" + hash + "\"");
  res.set_header("Cache-Control", access->publicly_visible ? "public, max-age=31536000, immutable"
                                                           : "private, no-store");
  res.status = 200;
  res.set_content(std::move(*bytes), access->meta.media_type);
}

void ApiServer::handle_kinds(const httplib::Request&, httplib::Response& res) {
  json items = json::array();
  for (auto kind : all_incident_kinds()) {
    items.push_back(json{{"id", to_string(kind)},
                         {"name", display_name(kind)},
                         {"requires_label", kind == IncidentKind::Other}});
  }
  send_json(res, 200, json{{"items", std::move(items)}});
}

void ApiServer::handle_geocode(const httplib::Request& req, httplib::Response& res) {
  if (!req.has_param("address")) throw Error(ErrorCode::InvalidArgument, "address is required");
  if (!geocoder_) throw Error(ErrorCode::ProviderUnavailable, "no geocoder configured");
  send_json(res, 200, to_json(geocoder_->geocode(req.get_param_value("address"))));
}

}  // namespace rui
