#include "rui/record_log.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>

#include "rui/digest.hpp"
#include "rui/error.hpp"

namespace rui {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHeaderSize = 18;  // "llllllll cccccccc "

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::StorageFailure, what + ": " + std::strerror(errno));
}

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

bool parse_hex32(std::string_view s, std::uint32_t& out) {
  std::string raw;
  if (s.size() != 8 || !hex_decode(s, raw)) return false;
  out = 0;
  for (unsigned char c : raw) out = (out << 8) | c;
  return true;
}

void write_all(int fd, std::string_view bytes, const std::string& what) {
  while (!bytes.empty()) {
    ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(what);
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

void fsync_directory(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) fail("open directory " + dir.filename().string());
  int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) fail("fsync directory");
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp-" + random_hex(6);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail("create " + path.filename().string());
  try {
    write_all(fd, bytes, "write " + path.filename().string());
    if (::fsync(fd) != 0) fail("fsync");
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    fail("rename " + path.filename().string());
  }
  fsync_directory(path.parent_path());
}

RecordLog::RecordLog(fs::path path) : path_(std::move(path)) {
  bool existed = fs::exists(path_);
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) fail("open log");
  struct stat st {};
  if (::fstat(fd_, &st) != 0) fail("stat log");
  size_ = static_cast<std::uint64_t>(st.st_size);
  if (!existed) fsync_directory(path_.parent_path());
}

RecordLog::~RecordLog() {
  if (fd_ >= 0) ::close(fd_);
}

std::string RecordLog::encode(const nlohmann::json& record) {
  auto body = record.dump();
  char header[kHeaderSize + 1];
  std::snprintf(header, sizeof header, "%08x %08x ", static_cast<unsigned>(body.size()),
                static_cast<unsigned>(crc_of(body)));
  std::string out;
  out.reserve(kHeaderSize + body.size() + 1);
  out.append(header, kHeaderSize);
  out += body;
  out.push_back('\n');
  return out;
}

LogReplay RecordLog::replay(std::uint64_t from_offset) {
  LogReplay r;
  if (from_offset > size_) {
    throw Error(ErrorCode::StorageFailure, "log is shorter than the snapshot offset");
  }
  std::string data(size_ - from_offset, '\0');
  std::size_t got = 0;
  while (got < data.size()) {
    ssize_t n = ::pread(fd_, data.data() + got, data.size() - got,
                        static_cast<off_t>(from_offset + got));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("read log");
    }
    if (n == 0) break;
    got += static_cast<std::size_t>(n);
  }
  data.resize(got);

  std::size_t pos = 0;
  while (pos < data.size()) {
    std::string_view rest(data.data() + pos, data.size() - pos);
    std::uint32_t length = 0, crc = 0;
    if (rest.size() < kHeaderSize) {
      r.problem = "partial record header";
      break;
    }
    if (!parse_hex32(rest.substr(0, 8), length) || rest[8] != ' ' ||
        !parse_hex32(rest.substr(9, 8), crc) || rest[17] != ' ') {
      r.problem = "malformed record header";
      break;
    }
    if (rest.size() < kHeaderSize + length + 1) {
      r.problem = "partial record body";
      break;
    }
    auto body = rest.substr(kHeaderSize, length);
    if (rest[kHeaderSize + length] != '\n' || crc_of(body) != crc) {
      r.problem = "checksum mismatch";
      break;
    }
    try {
      r.records.push_back(nlohmann::json::parse(body));
    } catch (const nlohmann::json::exception&) {
      r.problem = "record is not valid JSON";
      break;
    }
    pos += kHeaderSize + length + 1;
  }
  r.end_offset = from_offset + pos;
  r.discarded_bytes = size_ - r.end_offset;
  if (r.discarded_bytes > 0) {
    if (::ftruncate(fd_, static_cast<off_t>(r.end_offset)) != 0) fail("truncate log");
    if (::fsync(fd_) != 0) fail("fsync log");
    size_ = r.end_offset;
  }
  return r;
}

std::uint64_t RecordLog::append(const nlohmann::json& record) {
  auto line = encode(record);
  try {
    write_all(fd_, line, "append log");
    if (::fdatasync(fd_) != 0) fail("fsync log");
  } catch (...) {
    // Drop whatever part of the record made it out so the log stays clean.
    if (::ftruncate(fd_, static_cast<off_t>(size_)) == 0) ::fdatasync(fd_);
    throw;
  }
  size_ += line.size();
  return size_;
}

}  // namespace rui
