#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rui {

// Content-addressed files under <root>/<first-2-hex>/<sha256-hex>. The key of
// every object is the digest of exactly its bytes, so identical uploads share
// one file.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  struct PutResult {
    std::string hash;
    bool created = false;  // false when the object already existed
  };

  // Durable before returning. Throws Error(StorageFailure).
  PutResult put(std::string_view bytes);

  // Returns nullopt when the object is missing or its bytes no longer match
  // the key.
  std::optional<std::string> get(std::string_view hash) const;
  bool contains(std::string_view hash) const;
  void remove(std::string_view hash);

  std::vector<std::string> list() const;

  // Objects not in `referenced`; removes them when `remove` is true.
  std::vector<std::string> sweep(const std::set<std::string>& referenced, bool remove);
  // Objects whose bytes no longer hash to their key.
  std::vector<std::string> verify() const;

  std::filesystem::path path_for(std::string_view hash) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace rui
