#include "migrado/conversion_cache.hpp"

namespace migrado {

std::optional<CacheEntry> ConversionCache::lookup(const CacheKey& key) {
  std::lock_guard lock(mutex_);
  auto it = index_.find(key.str());
  if (it == index_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return *it->second;
}

void ConversionCache::put(CacheEntry entry) {
  const std::size_t bytes = entry.body ? entry.body->size() : 0;
  if (bytes > capacity_ || capacity_ == 0) return;
  std::lock_guard lock(mutex_);
  auto k = entry.key.str();
  if (auto it = index_.find(k); it != index_.end()) {
    total_ -= it->second->body ? it->second->body->size() : 0;
    order_.erase(it->second);
    index_.erase(it);
  }
  order_.push_front(std::move(entry));
  index_.emplace(std::move(k), order_.begin());
  total_ += bytes;
  evict_locked();
}

void ConversionCache::evict_locked() {
  while (total_ > capacity_ && !order_.empty()) {
    auto& victim = order_.back();
    total_ -= victim.body ? victim.body->size() : 0;
    index_.erase(victim.key.str());
    order_.pop_back();
  }
}

std::size_t ConversionCache::total_bytes() const {
  std::lock_guard lock(mutex_);
  return total_;
}

std::size_t ConversionCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

bool ConversionCache::contains(const CacheKey& key) const {
  std::lock_guard lock(mutex_);
  return index_.count(key.str()) != 0;
}

}  // namespace migrado
