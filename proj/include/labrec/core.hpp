/*
 * Copyright 2026 The labrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LABREC_CORE_HPP_
#define LABREC_CORE_HPP_

// Items, bags, the vocabulary that numbers items, and the packed unary
// bag-item matrix. Bit j of row u is set iff item j belongs to bag u. Rows
// are stored as 64-bit words; bits past column n-1 are always zero so that
// popcount kernels never need to mask.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace labrec {

using Word = std::uint64_t;
using ItemIndex = std::uint32_t;

inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t n) {
  return (n + kWordBits - 1) / kWordBits;
}

struct Item {
  std::size_t index = 0;
  std::string item_id;
  std::string name;
};

struct ItemSpec {
  std::string item_id;
  std::string name;  // empty means "use item_id"
};

// Ordered universe of items. Immutable once built.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws ParameterError on a duplicate or empty item_id.
  explicit Vocabulary(std::vector<ItemSpec> specs);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const Item& operator[](std::size_t index) const { return items_[index]; }
  std::span<const Item> items() const noexcept { return items_; }

  std::optional<std::size_t> find_id(std::string_view item_id) const;
  // Exact name first, then ASCII case-insensitive. Colliding names resolve
  // to the first-seen item.
  std::optional<std::size_t> find_name(std::string_view name) const;
  // item_id first, then name.
  std::optional<std::size_t> find(std::string_view id_or_name) const;

  std::vector<ItemSpec> specs() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b);

 private:
  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::string, std::size_t> by_folded_name_;
};

// A bag as it comes out of ingestion, keyed by source identifiers.
struct RawBag {
  std::string subject_id;
  std::string hadm_id;
  std::string charttime;
  std::vector<std::string> item_ids;  // distinct, in first-seen order
  // Optional display labels parallel to item_ids; empty when unknown.
  std::vector<std::string> item_names;
};

// A bag expressed in vocabulary indices.
struct Bag {
  std::vector<ItemIndex> item_indices;  // sorted, distinct, non-empty
  std::string subject_id;
  std::string charttime;
};

// Read-only view of one packed row.
struct RowView {
  std::span<const Word> words;
  std::size_t n = 0;
};

class PackedRow {
 public:
  explicit PackedRow(std::size_t n = 0) : n_(n), words_(words_for(n), 0) {}

  // Throws OutOfVocabulary when an index is >= n.
  static PackedRow from_indices(std::span<const ItemIndex> indices,
                                std::size_t n);

  void set(std::size_t j);
  bool test(std::size_t j) const {
    return (words_[j / kWordBits] >> (j % kWordBits)) & Word{1};
  }
  std::size_t size() const noexcept { return n_; }
  std::size_t count() const noexcept;
  std::vector<ItemIndex> indices() const;
  std::span<const Word> words() const noexcept { return words_; }
  RowView view() const noexcept { return {words_, n_}; }

  friend bool operator==(const PackedRow&, const PackedRow&) = default;

 private:
  std::size_t n_;
  std::vector<Word> words_;
};

// Unary m x n matrix with rows stored contiguously, ceil(n/64) words each.
class BagItemMatrix {
 public:
  explicit BagItemMatrix(std::size_t n = 0) : n_(n), words_per_row_(words_for(n)) {}
  // Rows given as index lists; throws OutOfVocabulary for an index >= n.
  BagItemMatrix(std::size_t n, std::span<const std::vector<ItemIndex>> rows);

  std::size_t rows() const noexcept { return popcounts_.size(); }
  std::size_t cols() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return words_per_row_; }

  RowView row(std::size_t u) const noexcept {
    return {std::span<const Word>(words_).subspan(u * words_per_row_,
                                                  words_per_row_),
            n_};
  }
  std::size_t popcount(std::size_t u) const noexcept { return popcounts_[u]; }
  bool test(std::size_t u, std::size_t j) const noexcept {
    return (words_[u * words_per_row_ + j / kWordBits] >> (j % kWordBits)) &
           Word{1};
  }
  std::vector<ItemIndex> row_indices(std::size_t u) const;

  friend bool operator==(const BagItemMatrix&, const BagItemMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<Word> words_;
  std::vector<std::uint32_t> popcounts_;
};

// Distinct item_ids in first-seen order across `raw_bags`. Display names are
// taken from RawBag::item_names when present. Throws EmptyDataset.
Vocabulary build_vocabulary(std::span<const RawBag> raw_bags);

// Maps raw bags onto vocabulary indices (sorted, deduplicated). Throws
// OutOfVocabulary for an unknown item_id and EmptyDataset for a bag with no
// items.
std::vector<Bag> index_bags(std::span<const RawBag> raw_bags,
                            const Vocabulary& vocabulary);

BagItemMatrix build_matrix(std::span<const Bag> bags,
                           const Vocabulary& vocabulary);

struct EncodedQuery {
  PackedRow row;
  std::vector<std::string> unknown_items;
};

// Accepts item_ids or names. Unrecognized entries are reported in
// unknown_items; throws EmptyQuery when nothing is recognized.
EncodedQuery encode_query(std::span<const std::string> items,
                          const Vocabulary& vocabulary);

}  // namespace labrec

#endif  // LABREC_CORE_HPP_
