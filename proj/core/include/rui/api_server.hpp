#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "rui/auth.hpp"
#include "rui/feed_service.hpp"
#include "rui/geocoder.hpp"
#include "rui/rate_limiter.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace rui {

struct ApiConfig {
  std::string admin_user;
  std::string admin_pass_hash;
  double submissions_per_minute = 10;
  double login_failures_per_minute = 10;
  std::chrono::seconds session_ttl{8 * 60 * 60};
  std::size_t max_body_bytes = 30u * 1024 * 1024;
  std::size_t default_page_size = 20;
  Clock clock = system_now;
};

struct RouteInfo {
  std::string method;
  std::string pattern;  // regex as registered
  bool admin_only = false;
  bool mutates = false;
};

// HTTP boundary over a FeedService. Public routes are anonymous; every route
// flagged admin_only requires "Authorization: Bearer <token>" from
// POST /api/v1/admin/login.
class ApiServer {
 public:
  ApiServer(FeedService& feed, const GeocodingProvider* geocoder, ApiConfig config);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Serves until stop(); requires a successful bind().
  void run();
  // bind() then run() on a background thread; returns the port or -1.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  int port() const { return port_; }
  const std::vector<RouteInfo>& routes() const { return routes_; }

 private:
  using Handler = void (ApiServer::*)(const httplib::Request&, httplib::Response&);
  void add_route(const char* method, const char* pattern, bool admin_only, bool mutates,
                 Handler handler);
  bool authorized(const httplib::Request& req);

  void handle_login(const httplib::Request& req, httplib::Response& res);
  void handle_logout(const httplib::Request& req, httplib::Response& res);
  void handle_submit(const httplib::Request& req, httplib::Response& res);
  void handle_updates(const httplib::Request& req, httplib::Response& res);
  void handle_update(const httplib::Request& req, httplib::Response& res);
  void handle_admin_list(const httplib::Request& req, httplib::Response& res);
  void handle_admin_get(const httplib::Request& req, httplib::Response& res);
  void handle_decision(const httplib::Request& req, httplib::Response& res);
  void handle_attachment(const httplib::Request& req, httplib::Response& res);
  void handle_kinds(const httplib::Request& req, httplib::Response& res);
  void handle_geocode(const httplib::Request& req, httplib::Response& res);

  FeedService& feed_;
  const GeocodingProvider* geocoder_;
  ApiConfig config_;
  Authenticator auth_;
  SessionStore sessions_;
  RateLimiter submit_limiter_;
  RateLimiter login_limiter_;
  std::unique_ptr<httplib::Server> server_;
  std::vector<RouteInfo> routes_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace rui
