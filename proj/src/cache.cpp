// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/cache.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace genodkit {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

CacheKey make_cache_key(std::string_view content, std::string_view config) {
  return {sha256_hex(content), sha256_hex(config)};
}

std::size_t CacheKeyHash::operator()(const CacheKey& key) const noexcept {
  const std::size_t a = std::hash<std::string>{}(key.content_hash);
  const std::size_t b = std::hash<std::string>{}(key.config_hash);
  return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

std::string ResultCache::get_or_compute(const CacheKey& key,
                                        const std::function<std::string()>& compute, bool* hit) {
  std::unique_lock lock(mutex_);
  if (const auto it = index_.find(key); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    ++stats_.hits;
    if (hit != nullptr) *hit = true;
    return it->second->value;
  }
  if (hit != nullptr) *hit = false;
  ++stats_.misses;
  if (const auto it = inflight_.find(key); it != inflight_.end()) {
    // Someone is already computing this key; wait for their result.
    auto shared = it->second;
    lock.unlock();
    return shared.get();
  }
  std::promise<std::string> promise;
  inflight_.emplace(key, promise.get_future().share());
  lock.unlock();

  std::string value;
  try {
    value = compute();
  } catch (...) {
    lock.lock();
    inflight_.erase(key);
    lock.unlock();
    promise.set_exception(std::current_exception());
    throw;
  }

  lock.lock();
  inflight_.erase(key);
  if (capacity_ > 0) {
    lru_.push_front({key, value});
    index_[key] = lru_.begin();
    while (lru_.size() > capacity_) {
      index_.erase(lru_.back().key);
      lru_.pop_back();
      ++stats_.evictions;
    }
  }
  lock.unlock();
  promise.set_value(value);
  return value;
}

bool ResultCache::contains(const CacheKey& key) const {
  std::lock_guard lock(mutex_);
  return index_.contains(key);
}

CacheStats ResultCache::stats() const {
  std::lock_guard lock(mutex_);
  CacheStats s = stats_;
  s.entries = lru_.size();
  return s;
}

}  // namespace genodkit
