#include "rui/blob_store.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <system_error>

#include "rui/digest.hpp"
#include "rui/error.hpp"
#include "rui/record_log.hpp"

namespace rui {

namespace fs = std::filesystem;

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create blob directory: " + ec.message());
}

fs::path BlobStore::path_for(std::string_view hash) const {
  return root_ / std::string(hash.substr(0, 2)) / std::string(hash);
}

BlobStore::PutResult BlobStore::put(std::string_view bytes) {
  PutResult r{sha256_hex(bytes), false};
  auto path = path_for(r.hash);
  if (fs::exists(path)) return r;
  std::error_code ec;
  bool made_dir = fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create blob shard: " + ec.message());
  if (made_dir) fsync_directory(root_);
  write_file_atomic(path, bytes);
  r.created = true;
  return r;
}

std::optional<std::string> BlobStore::get(std::string_view hash) const {
  if (!is_sha256_hex(hash)) return std::nullopt;
  std::ifstream in(path_for(hash), std::ios::binary);
  if (!in) return std::nullopt;
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (sha256_hex(bytes) != hash) return std::nullopt;
  return bytes;
}

bool BlobStore::contains(std::string_view hash) const {
  return is_sha256_hex(hash) && fs::exists(path_for(hash));
}

void BlobStore::remove(std::string_view hash) {
  std::error_code ec;
  fs::remove(path_for(hash), ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot remove blob: " + ec.message());
}

std::vector<std::string> BlobStore::list() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& shard : fs::directory_iterator(root_, ec)) {
    if (!shard.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(shard.path())) {
      auto name = f.path().filename().string();
      if (f.is_regular_file() && is_sha256_hex(name)) out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> BlobStore::sweep(const std::set<std::string>& referenced, bool remove) {
  std::vector<std::string> garbage;
  for (const auto& hash : list()) {
    if (!referenced.count(hash)) garbage.push_back(hash);
  }
  if (remove) {
    for (const auto& hash : garbage) this->remove(hash);
  }
  return garbage;
}

std::vector<std::string> BlobStore::verify() const {
  std::vector<std::string> bad;
  for (const auto& hash : list()) {
    if (!get(hash)) bad.push_back(hash);
  }
  return bad;
}

}  // namespace rui
