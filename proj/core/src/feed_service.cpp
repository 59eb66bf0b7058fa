#include "rui/feed_service.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <system_error>

#include "rui/digest.hpp"

namespace rui {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kSnapshotsKept = 2;

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_media_type(std::string_view declared) {
  auto semi = declared.find(';');
  auto base = ascii_lower(trim(declared.substr(0, semi)));
  if (base == "image/jpg" || base == "image/pjpeg") return "image/jpeg";
  return base;
}

bool valid_fixture_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

fs::path snapshot_name(const fs::path& dir, std::uint64_t offset) {
  char name[48];
  std::snprintf(name, sizeof name, "snapshot-%020llu.json",
                static_cast<unsigned long long>(offset));
  return dir / name;
}

std::vector<std::pair<std::uint64_t, fs::path>> list_snapshots(const fs::path& dir) {
  std::vector<std::pair<std::uint64_t, fs::path>> out;
  std::error_code ec;
  for (const auto& f : fs::directory_iterator(dir, ec)) {
    auto name = f.path().filename().string();
    if (name.size() != 34 || name.rfind("snapshot-", 0) != 0 ||
        name.substr(29) != ".json") {
      continue;
    }
    std::uint64_t offset = 0;
    auto digits = name.substr(9, 20);
    auto [ptr, err] = std::from_chars(digits.data(), digits.data() + digits.size(), offset);
    if (err == std::errc{} && ptr == digits.data() + digits.size()) {
      out.emplace_back(offset, f.path());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return out;
}

bool contains_ci(const std::string& haystack, const std::string& lowered_needle) {
  return ascii_lower(haystack).find(lowered_needle) != std::string::npos;
}

}  // namespace

std::string sniff_media_type(std::string_view bytes) {
  static constexpr std::string_view kPng("\x89PNG\r\n\x1a\n", 8);
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8 &&
      static_cast<unsigned char>(bytes[2]) == 0xFF) {
    return "image/jpeg";
  }
  if (bytes.substr(0, kPng.size()) == kPng) return "image/png";
  return {};
}

std::string encode_cursor(Timestamp ts, std::string_view id) {
  return hex_encode("c1:" + std::to_string(to_micros(ts)) + ":" + std::string(id));
}

std::pair<Timestamp, std::string> decode_cursor(std::string_view cursor) {
  std::string raw;
  if (!hex_decode(cursor, raw) || raw.rfind("c1:", 0) != 0) {
    throw Error(ErrorCode::BadCursor, "malformed cursor");
  }
  auto colon = raw.find(':', 3);
  if (colon == std::string::npos || colon + 1 >= raw.size()) {
    throw Error(ErrorCode::BadCursor, "malformed cursor");
  }
  std::int64_t micros = 0;
  auto [ptr, ec] = std::from_chars(raw.data() + 3, raw.data() + colon, micros);
  if (ec != std::errc{} || ptr != raw.data() + colon) {
    throw Error(ErrorCode::BadCursor, "malformed cursor");
  }
  return {from_micros(micros), raw.substr(colon + 1)};
}

FeedService::FeedService(FeedServiceOptions options)
    : options_(std::move(options)),
      blobs_([&] {
        std::error_code ec;
        fs::create_directories(options_.data_dir / "snapshots", ec);
        if (ec) {
          throw Error(ErrorCode::StorageFailure,
                      "cannot create data directory: " + ec.message());
        }
        return options_.data_dir / "blobs";
      }()),
      approved_index_(options_.geo_precision) {
  if (!options_.clock) options_.clock = system_now;
  if (!options_.make_id) options_.make_id = [] { return random_hex(12); };

  auto lock_path = options_.data_dir / "LOCK";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw Error(ErrorCode::StorageFailure, "cannot open data directory lock");
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::StorageFailure, "data directory is in use by another process");
  }
  try {
    log_ = std::make_unique<RecordLog>(options_.data_dir / "reports.log");
    recover();
  } catch (...) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw;
  }
}

FeedService::~FeedService() {
  if (lock_fd_ >= 0) ::close(lock_fd_);
}

void FeedService::hook(std::string_view stage) const {
  if (options_.fault_hook) options_.fault_hook(stage);
}

void FeedService::recover() {
  auto snapshot_dir = options_.data_dir / "snapshots";
  std::uint64_t offset = 0;
  for (const auto& [snap_offset, path] : list_snapshots(snapshot_dir)) {
    if (snap_offset > log_->size()) continue;
    try {
      std::ifstream in(path);
      auto doc = json::parse(in);
      if (doc.at("log_offset").get<std::uint64_t>() != snap_offset) continue;
      for (const auto& r : doc.at("reports")) apply_report(road_update_from_json(r));
      for (const auto& e : doc.at("events")) {
        auto ev = moderation_event_from_json(e);
        events_[ev.report_id] = ev;
      }
      offset = snap_offset;
      recovery_.from_snapshot = true;
      recovery_.snapshot_offset = snap_offset;
      break;
    } catch (const std::exception&) {
      reports_.clear();
      events_.clear();
      for (auto& s : by_state_) s.clear();
      blob_refs_.clear();
      approved_index_.clear();
    }
  }

  auto replay = log_->replay(offset);
  for (const auto& record : replay.records) apply_record(record);
  recovery_.records_replayed = replay.records.size();
  recovery_.discarded_bytes = replay.discarded_bytes;
  recovery_.problem = replay.problem;
}

void FeedService::apply_record(const json& record) {
  auto type = record.value("type", std::string{});
  if (type == "report") {
    auto update = road_update_from_json(record.at("report"));
    if (reports_.count(update.id)) {
      throw Error(ErrorCode::StorageFailure, "log repeats report " + update.id);
    }
    apply_report(update);
  } else if (type == "decision") {
    apply_event(moderation_event_from_json(record.at("event")));
  } else if (type == "batch") {
    for (const auto& inner : record.at("records")) apply_record(inner);
  } else {
    throw Error(ErrorCode::StorageFailure, "unknown log record type '" + type + "'");
  }
}

void FeedService::apply_report(const RoadUpdate& update) {
  reports_[update.id] = update;
  by_state_[static_cast<std::size_t>(update.state)].insert({update.submitted_at, update.id});
  for (const auto& a : update.attachments) {
    auto& ref = blob_refs_[a.content_hash];
    ref.meta = a;
    ref.reports.insert(update.id);
  }
  if (update.state == ReportState::Approved) {
    approved_index_.insert(update.id, update.location);
    ++visibility_generation_;
  }
}

void FeedService::apply_event(const ModerationEvent& event) {
  auto it = reports_.find(event.report_id);
  if (it == reports_.end()) {
    throw Error(ErrorCode::StorageFailure, "decision for unknown report " + event.report_id);
  }
  auto decision = transition(it->second, event.action, event.actor, event.reason, event.at);
  by_state_[static_cast<std::size_t>(it->second.state)].erase(
      {it->second.submitted_at, it->second.id});
  it->second = decision.update;
  by_state_[static_cast<std::size_t>(it->second.state)].insert(
      {it->second.submitted_at, it->second.id});
  events_[event.report_id] = decision.event;
  if (it->second.state == ReportState::Approved) {
    approved_index_.insert(it->second.id, it->second.location);
    ++visibility_generation_;
  }
}

void FeedService::append_locked(const json& record, bool* durable) {
  hook("before_append");
  try {
    log_->append(record);
    if (durable) *durable = true;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::StorageFailure, e.what());
  }
  ++appends_since_snapshot_;
  hook("after_append");
}

std::string FeedService::new_id_locked() {
  for (;;) {
    auto id = options_.make_id();
    if (!reports_.count(id)) return id;
  }
}

std::string FeedService::submit_report(const json& draft, std::vector<ImageUpload> images) {
  auto errors = check_draft(draft, images.size());
  if (!errors.empty()) throw ValidationError(std::move(errors));

  std::vector<Attachment> attachments;
  attachments.reserve(images.size());
  for (auto& image : images) {
    if (image.bytes.size() > kMaxAttachmentBytes) {
      throw Error(ErrorCode::AttachmentTooLarge, "attachment exceeds 5 MiB");
    }
    auto declared = normalize_media_type(image.media_type);
    auto sniffed = sniff_media_type(image.bytes);
    bool declared_ok = declared.empty() || declared == "application/octet-stream" ||
                       declared == sniffed;
    if (sniffed.empty() || !declared_ok) {
      throw Error(ErrorCode::UnsupportedMediaType, "attachments must be JPEG or PNG images");
    }
    attachments.push_back({sha256_hex(image.bytes), sniffed, image.bytes.size()});
  }

  std::lock_guard write(write_mu_);
  auto update = validate_report(draft, new_id_locked(), options_.clock(), attachments);

  std::vector<std::string> created;
  bool durable = false;
  try {
    for (const auto& image : images) {
      auto put = blobs_.put(image.bytes);
      if (put.created) created.push_back(put.hash);
      hook("after_blob");
    }
    append_locked(json{{"type", "report"}, {"report", to_json(update)}}, &durable);
  } catch (...) {
    // Once the record is in the log the blobs belong to it.
    for (const auto& hash : durable ? std::vector<std::string>{} : created) {
      if (!blob_refs_.count(hash)) {
        try {
          blobs_.remove(hash);
        } catch (const Error&) {
          // Left for sweep_blobs.
        }
      }
    }
    throw;
  }

  {
    std::unique_lock state(state_mu_);
    apply_report(update);
  }
  if (options_.snapshot_every && appends_since_snapshot_ >= options_.snapshot_every) {
    snapshot_locked();
  }
  return update.id;
}

SeedResult FeedService::seed(const std::vector<json>& drafts, bool approve_all,
                             std::string_view actor) {
  std::lock_guard write(write_mu_);
  auto now = options_.clock();
  SeedResult result;
  std::vector<RoadUpdate> fresh;
  std::set<std::string> seen;
  std::string problems;

  for (std::size_t i = 0; i < drafts.size(); ++i) {
    const auto& draft = drafts[i];
    std::string id;
    if (draft.is_object() && draft.contains("id")) {
      if (!draft["id"].is_string() || !valid_fixture_id(draft["id"].get<std::string>())) {
        problems += "record " + std::to_string(i) + ": invalid id\n";
        continue;
      }
      id = draft["id"].get<std::string>();
    } else {
      id = "fx-" + sha256_hex(draft.dump()).substr(0, 24);
    }
    try {
      auto update = validate_report(draft, id, now);
      if (reports_.count(id) || !seen.insert(id).second) {
        ++result.skipped;
        continue;
      }
      fresh.push_back(std::move(update));
    } catch (const ValidationError& e) {
      problems += "record " + std::to_string(i) + ": " + e.what() + "\n";
    }
  }
  if (!problems.empty()) throw Error(ErrorCode::InvalidArgument, problems);
  if (fresh.empty()) return result;

  std::vector<ModerationEvent> events;
  json records = json::array();
  for (const auto& u : fresh) {
    records.push_back(json{{"type", "report"}, {"report", to_json(u)}});
    if (approve_all) {
      auto d = transition(u, ModerationAction::Approve, actor, "", now);
      records.push_back(json{{"type", "decision"}, {"event", to_json(d.event)}});
      events.push_back(d.event);
    }
  }
  append_locked(json{{"type", "batch"}, {"records", std::move(records)}});
  {
    std::unique_lock state(state_mu_);
    for (const auto& u : fresh) apply_report(u);
    for (const auto& e : events) apply_event(e);
  }
  result.inserted = fresh.size();
  return result;
}

Decision FeedService::decide(const std::string& id, ModerationAction action,
                             std::string_view actor, std::string_view reason) {
  std::lock_guard write(write_mu_);
  auto it = reports_.find(id);
  if (it == reports_.end()) throw Error(ErrorCode::NotFound, "no report with id " + id);
  // Compare-and-set: the expected state is Pending, checked under the writer
  // lock against the latest committed state.
  auto decision = transition(it->second, action, actor, reason, options_.clock());
  append_locked(json{{"type", "decision"}, {"event", to_json(decision.event)}});
  {
    std::unique_lock state(state_mu_);
    apply_event(decision.event);
  }
  if (options_.snapshot_every && appends_since_snapshot_ >= options_.snapshot_every) {
    snapshot_locked();
  }
  return decision;
}

template <typename Pred>
FeedPage FeedService::page_over(const OrderedIds& ids, const std::optional<std::string>& cursor,
                                std::size_t page_size, Pred&& keep) const {
  if (page_size < 1 || page_size > kMaxPageSize) {
    throw Error(ErrorCode::InvalidArgument, "page_size must be 1..100");
  }
  auto it = ids.begin();
  if (cursor) {
    auto [ts, id] = decode_cursor(*cursor);
    it = ids.upper_bound(OrderKey{ts, id});
  }
  FeedPage page;
  for (; it != ids.end(); ++it) {
    const auto& update = reports_.at(it->id);
    if (!keep(update)) continue;
    if (page.items.size() == page_size) {
      const auto& last = page.items.back();
      page.next_cursor = encode_cursor(last.submitted_at, last.id);
      break;
    }
    page.items.push_back(update);
  }
  return page;
}

FeedPage FeedService::list_feed(const FeedQuery& q) const {
  std::optional<std::string> needle;
  if (q.text) {
    auto t = trim(*q.text);
    if (t.empty()) throw Error(ErrorCode::InvalidArgument, "search text must not be empty");
    needle = ascii_lower(t);
  }
  auto keep = [&](const RoadUpdate& u) {
    if (!publicly_visible(u)) return false;
    if (q.since && u.submitted_at < *q.since) return false;
    if (needle && !contains_ci(u.title, *needle) && !contains_ci(u.address, *needle) &&
        !contains_ci(u.description, *needle)) {
      return false;
    }
    return true;
  };

  std::shared_lock state(state_mu_);
  const auto& approved = by_state_[static_cast<std::size_t>(ReportState::Approved)];
  if (!q.viewport) return page_over(approved, q.cursor, q.page_size, keep);

  OrderedIds in_view;
  for (auto& id : approved_index_.query_viewport(*q.viewport)) {
    auto ts = reports_.at(id).submitted_at;
    in_view.insert({ts, std::move(id)});
  }
  return page_over(in_view, q.cursor, q.page_size, keep);
}

FeedPage FeedService::search_updates(std::string_view q, std::optional<std::string> cursor,
                                     std::size_t page_size) const {
  FeedQuery query;
  query.text = std::string(q);
  query.cursor = std::move(cursor);
  query.page_size = page_size;
  return list_feed(query);
}

FeedPage FeedService::list_by_state(ReportState state_filter, std::optional<std::string> cursor,
                                    std::size_t page_size) const {
  std::shared_lock state(state_mu_);
  return page_over(by_state_[static_cast<std::size_t>(state_filter)], cursor, page_size,
                   [](const RoadUpdate&) { return true; });
}

std::optional<RoadUpdate> FeedService::find(const std::string& id) const {
  std::shared_lock state(state_mu_);
  auto it = reports_.find(id);
  if (it == reports_.end()) return std::nullopt;
  return it->second;
}

std::optional<ModerationEvent> FeedService::event_for(const std::string& id) const {
  std::shared_lock state(state_mu_);
  auto it = events_.find(id);
  if (it == events_.end()) return std::nullopt;
  return it->second;
}

std::vector<RoadUpdate> FeedService::all_reports() const {
  std::shared_lock state(state_mu_);
  std::vector<RoadUpdate> out;
  out.reserve(reports_.size());
  for (const auto& s : by_state_) {
    for (const auto& key : s) out.push_back(reports_.at(key.id));
  }
  std::sort(out.begin(), out.end(), [](const RoadUpdate& a, const RoadUpdate& b) {
    return NewestFirst{}({a.submitted_at, a.id}, {b.submitted_at, b.id});
  });
  return out;
}

std::vector<ModerationEvent> FeedService::all_events() const {
  std::shared_lock state(state_mu_);
  std::vector<ModerationEvent> out;
  for (const auto& [id, e] : events_) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.at != b.at ? a.at < b.at : a.report_id < b.report_id;
  });
  return out;
}

std::size_t FeedService::report_count() const {
  std::shared_lock state(state_mu_);
  return reports_.size();
}

std::optional<AttachmentAccess> FeedService::attachment(std::string_view hash) const {
  std::shared_lock state(state_mu_);
  auto it = blob_refs_.find(std::string(hash));
  if (it == blob_refs_.end()) return std::nullopt;
  AttachmentAccess access{it->second.meta, false};
  for (const auto& id : it->second.reports) {
    if (publicly_visible(reports_.at(id))) {
      access.publicly_visible = true;
      break;
    }
  }
  return access;
}

std::optional<std::string> FeedService::read_attachment(std::string_view hash) const {
  return blobs_.get(hash);
}

std::vector<std::string> FeedService::sweep_blobs(bool remove) {
  std::lock_guard write(write_mu_);
  std::set<std::string> referenced;
  for (const auto& [hash, ref] : blob_refs_) referenced.insert(hash);
  return blobs_.sweep(referenced, remove);
}

GeoIndex FeedService::index_snapshot() const {
  std::shared_lock state(state_mu_);
  return approved_index_;
}

void FeedService::snapshot() {
  std::lock_guard write(write_mu_);
  snapshot_locked();
}

void FeedService::snapshot_locked() {
  json reports = json::array();
  json events = json::array();
  for (const auto& s : by_state_) {
    for (const auto& key : s) reports.push_back(to_json(reports_.at(key.id)));
  }
  for (const auto& [id, e] : events_) events.push_back(to_json(e));
  auto offset = log_->size();
  json doc{{"format", 1}, {"log_offset", offset}, {"reports", std::move(reports)},
           {"events", std::move(events)}};
  auto dir = options_.data_dir / "snapshots";
  write_file_atomic(snapshot_name(dir, offset), doc.dump());
  appends_since_snapshot_ = 0;

  auto all = list_snapshots(dir);
  for (std::size_t i = kSnapshotsKept; i < all.size(); ++i) {
    std::error_code ec;
    fs::remove(all[i].second, ec);
  }
}

}  // namespace rui
