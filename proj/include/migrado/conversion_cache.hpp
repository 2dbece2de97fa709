#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "migrado/common.hpp"

namespace migrado {

struct CacheKey {
  std::string digest;  // of the stored original
  std::string target;  // media type, canonical string form
  std::string converter_id;
  std::string converter_version;

  std::string str() const { return digest + '|' + target + '|' + converter_id + '|' + converter_version; }

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheEntry {
  CacheKey key;
  std::shared_ptr<const Bytes> body;
  std::vector<std::string> notes;
  Timestamp created_at;
};

/// LRU over converted bodies, bounded by the total body size. Entries larger
/// than the whole capacity are not retained; a capacity of 0 disables
/// caching.
class ConversionCache {
 public:
  explicit ConversionCache(std::size_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::optional<CacheEntry> lookup(const CacheKey& key);
  void put(CacheEntry entry);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t total_bytes() const;
  std::size_t size() const;
  bool contains(const CacheKey& key) const;

 private:
  using Order = std::list<CacheEntry>;

  void evict_locked();

  const std::size_t capacity_;
  mutable std::mutex mutex_;
  Order order_;  // front = most recently used
  std::unordered_map<std::string, Order::iterator> index_;
  std::size_t total_ = 0;
};

}  // namespace migrado
