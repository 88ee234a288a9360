#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace rcl {

// Small fully-associative LRU map. Entries are kept MRU-first; capacities
// here are single digits so a linear scan beats anything fancier.
template <typename Key, typename Value>
class LruTable {
 public:
  using Entry = std::pair<Key, Value>;

  explicit LruTable(std::size_t capacity) : capacity_(capacity) {
    entries_.reserve(capacity);
  }

  /// Finds `key` and promotes it to MRU.
  Value* find(const Key& key) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.first == key; });
    if (it == entries_.end()) return nullptr;
    std::rotate(entries_.begin(), it, it + 1);
    return &entries_.front().second;
  }

  /// Lookup without touching recency.
  const Value* peek(const Key& key) const {
    for (const auto& e : entries_)
      if (e.first == key) return &e.second;
    return nullptr;
  }

  /// Inserts or overwrites `key` as MRU. Returns the entry evicted to make room.
  std::optional<Entry> put(const Key& key, Value value) {
    if (Value* v = find(key)) {
      *v = std::move(value);
      return std::nullopt;
    }
    if (capacity_ == 0) return Entry{key, std::move(value)};
    std::optional<Entry> evicted;
    if (entries_.size() == capacity_) {
      evicted = std::move(entries_.back());
      entries_.pop_back();
    }
    entries_.insert(entries_.begin(), Entry{key, std::move(value)});
    return evicted;
  }

  void clear() { entries_.clear(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::vector<Entry> entries_;
};

}  // namespace rcl
