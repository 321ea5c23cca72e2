// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <list>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace genodkit {

std::string sha256_hex(std::string_view bytes);

struct CacheKey {
  std::string content_hash;
  std::string config_hash;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

CacheKey make_cache_key(std::string_view content, std::string_view config);

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& key) const noexcept;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::size_t entries = 0;
};

// Thread-safe LRU cache of serialized results with single-flight misses:
// concurrent callers missing on the same key share one computation.
class ResultCache {
 public:
  explicit ResultCache(std::size_t capacity) : capacity_(capacity) {}

  ResultCache(const ResultCache&) = delete;
  ResultCache& operator=(const ResultCache&) = delete;

  /// Returns the stored bytes on a hit; otherwise runs `compute`, stores the
  /// result and evicts the least recently used entry beyond capacity.
  /// Capacity 0 disables storage. Exceptions from `compute` propagate and
  /// leave nothing cached.
  std::string get_or_compute(const CacheKey& key, const std::function<std::string()>& compute,
                             bool* hit = nullptr);

  bool contains(const CacheKey& key) const;
  CacheStats stats() const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  struct Entry {
    CacheKey key;
    std::string value;
  };
  using List = std::list<Entry>;

  std::size_t capacity_;
  mutable std::mutex mutex_;
  List lru_;  // front = most recently used
  std::unordered_map<CacheKey, List::iterator, CacheKeyHash> index_;
  std::unordered_map<CacheKey, std::shared_future<std::string>, CacheKeyHash> inflight_;
  CacheStats stats_;
};

}  // namespace genodkit
