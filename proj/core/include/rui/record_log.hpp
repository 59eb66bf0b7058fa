#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rui {

struct LogReplay {
  std::vector<nlohmann::json> records;
  std::uint64_t end_offset = 0;       // byte offset just past the last good record
  std::uint64_t discarded_bytes = 0;  // torn or corrupt tail that was cut off
  std::string problem;                // why the tail was discarded, empty if clean
};

// Append-only file of checksummed JSON records, one per line:
//
//   <length:8 hex> <crc32:8 hex> <json>\n
//
// length counts the JSON bytes; crc32 (zlib polynomial) covers the same
// bytes. append() returns only after the record is on stable storage.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path path);
  ~RecordLog();
  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  // Reads records starting at from_offset. A record that is incomplete or
  // fails its checksum ends the replay; it and everything after it are
  // truncated away so later appends start on a clean boundary.
  LogReplay replay(std::uint64_t from_offset = 0);

  // Returns the end offset after the write.
  std::uint64_t append(const nlohmann::json& record);

  std::uint64_t size() const { return size_; }
  const std::filesystem::path& path() const { return path_; }

  static std::string encode(const nlohmann::json& record);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::uint64_t size_ = 0;
};

// Writes bytes to path via a temp file, fsync and rename, then fsyncs the
// directory. Throws Error(StorageFailure).
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
void fsync_directory(const std::filesystem::path& dir);

}  // namespace rui
