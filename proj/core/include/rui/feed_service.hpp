#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "rui/blob_store.hpp"
#include "rui/domain.hpp"
#include "rui/geo.hpp"
#include "rui/geo_index.hpp"
#include "rui/record_log.hpp"
#include "rui/time.hpp"

namespace rui {

inline constexpr std::uint64_t kMaxAttachmentBytes = 5ull * 1024 * 1024;
inline constexpr std::size_t kMaxPageSize = 100;

struct ImageUpload {
  std::string bytes;
  std::string media_type;  // as declared by the client; may be empty
};

// "image/jpeg" or "image/png" from magic bytes, otherwise empty.
std::string sniff_media_type(std::string_view bytes);

struct FeedServiceOptions {
  std::filesystem::path data_dir;
  int geo_precision = GeoIndex::kDefaultPrecision;
  // Write a snapshot after this many log appends; 0 disables.
  std::size_t snapshot_every = 1000;
  Clock clock = system_now;
  // Defaults to 96 random bits as hex.
  std::function<std::string()> make_id;
  // Test seam: invoked at named points of the write paths and may throw to
  // simulate a crash or I/O failure there. Stages: "after_blob",
  // "before_append", "after_append". A throw at after_append models a crash
  // after the write became durable; the instance must then be discarded and
  // the directory reopened.
  std::function<void(std::string_view stage)> fault_hook;
};

struct FeedQuery {
  std::optional<BoundingBox> viewport;
  std::optional<Timestamp> since;
  std::optional<std::string> text;
  std::optional<std::string> cursor;
  std::size_t page_size = 20;
};

struct FeedPage {
  std::vector<RoadUpdate> items;
  std::optional<std::string> next_cursor;
};

struct RecoveryReport {
  bool from_snapshot = false;
  std::uint64_t snapshot_offset = 0;
  std::size_t records_replayed = 0;
  std::uint64_t discarded_bytes = 0;
  std::string problem;
};

struct SeedResult {
  std::size_t inserted = 0;
  std::size_t skipped = 0;
};

struct AttachmentAccess {
  Attachment meta;
  bool publicly_visible = false;
};

// Application layer over the record log, blob store and geo index.
//
// Writes are serialized and each one is durable before it returns. Reads run
// against the in-memory state under a shared lock that writers only hold for
// the brief in-memory apply. Moderation decisions are compare-and-set on the
// report state: of two racing decisions exactly one wins, the other gets
// AlreadyDecided.
class FeedService {
 public:
  // Opens (creating if needed) and recovers the data directory. Throws
  // Error(StorageFailure).
  explicit FeedService(FeedServiceOptions options);
  ~FeedService();
  FeedService(const FeedService&) = delete;
  FeedService& operator=(const FeedService&) = delete;

  const RecoveryReport& recovery() const { return recovery_; }
  const std::filesystem::path& data_dir() const { return options_.data_dir; }

  // Persists a Pending report and its images atomically: either the report
  // and every attachment exist afterwards, or nothing new does.
  std::string submit_report(const nlohmann::json& draft, std::vector<ImageUpload> images = {});

  // Inserts fixture drafts as one atomic batch. Ids come from the draft's
  // "id" or are derived from its content, so re-seeding is idempotent.
  // Throws ValidationError-carrying Error(InvalidArgument) before writing
  // anything if any draft is invalid.
  SeedResult seed(const std::vector<nlohmann::json>& drafts, bool approve_all,
                  std::string_view actor = "seed");

  // Throws NotFound, AlreadyDecided or MissingDenyReason.
  Decision decide(const std::string& id, ModerationAction action, std::string_view actor,
                  std::string_view reason);

  // Approved updates, newest first (submitted_at, then id, descending).
  FeedPage list_feed(const FeedQuery& query) const;
  FeedPage search_updates(std::string_view q, std::optional<std::string> cursor = {},
                          std::size_t page_size = 20) const;
  // Admin view of one lifecycle state, same ordering.
  FeedPage list_by_state(ReportState state, std::optional<std::string> cursor = {},
                         std::size_t page_size = 20) const;

  std::optional<RoadUpdate> find(const std::string& id) const;
  std::optional<ModerationEvent> event_for(const std::string& id) const;
  std::vector<RoadUpdate> all_reports() const;
  std::vector<ModerationEvent> all_events() const;
  std::size_t report_count() const;

  std::optional<AttachmentAccess> attachment(std::string_view hash) const;
  std::optional<std::string> read_attachment(std::string_view hash) const;
  // Unreferenced blobs; deleted when remove is true.
  std::vector<std::string> sweep_blobs(bool remove);
  const BlobStore& blobs() const { return blobs_; }

  // Changes whenever the publicly visible set changes.
  std::uint64_t visibility_generation() const { return visibility_generation_.load(); }

  // Copy of the approved-update index (for dumps and diagnostics).
  GeoIndex index_snapshot() const;

  void snapshot();

 private:
  struct OrderKey {
    Timestamp ts;
    std::string id;
  };
  struct NewestFirst {
    bool operator()(const OrderKey& a, const OrderKey& b) const {
      if (a.ts != b.ts) return a.ts > b.ts;
      return a.id > b.id;
    }
  };
  using OrderedIds = std::set<OrderKey, NewestFirst>;

  struct BlobRef {
    Attachment meta;
    std::set<std::string> reports;
  };

  void recover();
  void apply_record(const nlohmann::json& record);
  void apply_report(const RoadUpdate& update);
  void apply_event(const ModerationEvent& event);
  void append_locked(const nlohmann::json& record, bool* durable = nullptr);
  void snapshot_locked();
  void hook(std::string_view stage) const;
  std::string new_id_locked();

  template <typename Pred>
  FeedPage page_over(const OrderedIds& ids, const std::optional<std::string>& cursor,
                     std::size_t page_size, Pred&& keep) const;

  FeedServiceOptions options_;
  int lock_fd_ = -1;
  std::unique_ptr<RecordLog> log_;
  BlobStore blobs_;
  RecoveryReport recovery_;
  std::size_t appends_since_snapshot_ = 0;

  std::mutex write_mu_;
  mutable std::shared_mutex state_mu_;
  std::unordered_map<std::string, RoadUpdate> reports_;
  std::unordered_map<std::string, ModerationEvent> events_;
  std::array<OrderedIds, 3> by_state_;
  std::unordered_map<std::string, BlobRef> blob_refs_;
  GeoIndex approved_index_;
  std::atomic<std::uint64_t> visibility_generation_{0};
};

// Cursor encoding shared with tests: opaque to clients.
std::string encode_cursor(Timestamp ts, std::string_view id);
// Throws Error(BadCursor).
std::pair<Timestamp, std::string> decode_cursor(std::string_view cursor);

}  // namespace rui
