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

#include "labrec/core.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

#include <fmt/format.h>

#include "labrec/error.hpp"

namespace labrec {
namespace {

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

template <typename Map>
std::optional<std::size_t> lookup(const Map& map, const std::string& key) {
  if (auto it = map.find(key); it != map.end()) return it->second;
  return std::nullopt;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<ItemSpec> specs) {
  items_.reserve(specs.size());
  for (auto& spec : specs) {
    if (spec.item_id.empty()) {
      throw ParameterError("empty item_id in vocabulary");
    }
    const std::size_t index = items_.size();
    if (!by_id_.emplace(spec.item_id, index).second) {
      throw ParameterError(fmt::format("duplicate item_id '{}'", spec.item_id));
    }
    std::string name = spec.name.empty() ? spec.item_id : std::move(spec.name);
    by_name_.emplace(name, index);
    by_folded_name_.emplace(fold_case(name), index);
    items_.push_back(Item{index, std::move(spec.item_id), std::move(name)});
  }
}

std::optional<std::size_t> Vocabulary::find_id(std::string_view item_id) const {
  return lookup(by_id_, std::string(item_id));
}

std::optional<std::size_t> Vocabulary::find_name(std::string_view name) const {
  if (auto hit = lookup(by_name_, std::string(name))) return hit;
  return lookup(by_folded_name_, fold_case(name));
}

std::optional<std::size_t> Vocabulary::find(std::string_view id_or_name) const {
  if (auto hit = find_id(id_or_name)) return hit;
  return find_name(id_or_name);
}

std::vector<ItemSpec> Vocabulary::specs() const {
  std::vector<ItemSpec> out;
  out.reserve(items_.size());
  for (const auto& item : items_) out.push_back({item.item_id, item.name});
  return out;
}

bool operator==(const Vocabulary& a, const Vocabulary& b) {
  return std::equal(a.items_.begin(), a.items_.end(), b.items_.begin(),
                    b.items_.end(), [](const Item& x, const Item& y) {
                      return x.index == y.index && x.item_id == y.item_id &&
                             x.name == y.name;
                    });
}

PackedRow PackedRow::from_indices(std::span<const ItemIndex> indices,
                                  std::size_t n) {
  PackedRow row(n);
  for (ItemIndex j : indices) row.set(j);
  return row;
}

void PackedRow::set(std::size_t j) {
  if (j >= n_) {
    throw OutOfVocabulary(fmt::format("index {} >= n={}", j, n_));
  }
  words_[j / kWordBits] |= Word{1} << (j % kWordBits);
}

std::size_t PackedRow::count() const noexcept {
  std::size_t total = 0;
  for (Word w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

namespace {

std::vector<ItemIndex> decode_words(std::span<const Word> words) {
  std::vector<ItemIndex> out;
  for (std::size_t w = 0; w < words.size(); ++w) {
    Word bits = words[w];
    while (bits != 0) {
      const int bit = std::countr_zero(bits);
      out.push_back(static_cast<ItemIndex>(w * kWordBits + bit));
      bits &= bits - 1;
    }
  }
  return out;
}

}  // namespace

std::vector<ItemIndex> PackedRow::indices() const { return decode_words(words_); }

BagItemMatrix::BagItemMatrix(std::size_t n,
                             std::span<const std::vector<ItemIndex>> rows)
    : n_(n), words_per_row_(words_for(n)) {
  words_.assign(rows.size() * words_per_row_, 0);
  popcounts_.reserve(rows.size());
  for (std::size_t u = 0; u < rows.size(); ++u) {
    Word* row = words_.data() + u * words_per_row_;
    for (ItemIndex j : rows[u]) {
      if (j >= n) {
        throw OutOfVocabulary(
            fmt::format("row {} references index {} >= n={}", u, j, n));
      }
      row[j / kWordBits] |= Word{1} << (j % kWordBits);
    }
    std::uint32_t count = 0;
    for (std::size_t w = 0; w < words_per_row_; ++w) {
      count += static_cast<std::uint32_t>(std::popcount(row[w]));
    }
    popcounts_.push_back(count);
  }
}

std::vector<ItemIndex> BagItemMatrix::row_indices(std::size_t u) const {
  return decode_words(row(u).words);
}

Vocabulary build_vocabulary(std::span<const RawBag> raw_bags) {
  if (raw_bags.empty()) throw EmptyDataset("no bags to build a vocabulary from");
  std::vector<ItemSpec> specs;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& bag : raw_bags) {
    for (std::size_t i = 0; i < bag.item_ids.size(); ++i) {
      const std::string& id = bag.item_ids[i];
      const std::string name =
          i < bag.item_names.size() ? bag.item_names[i] : std::string();
      auto [it, inserted] = seen.emplace(id, specs.size());
      if (inserted) {
        specs.push_back({id, name});
      } else if (specs[it->second].name.empty() && !name.empty()) {
        specs[it->second].name = name;
      }
    }
  }
  return Vocabulary(std::move(specs));
}

std::vector<Bag> index_bags(std::span<const RawBag> raw_bags,
                            const Vocabulary& vocabulary) {
  std::vector<Bag> bags;
  bags.reserve(raw_bags.size());
  for (const auto& raw : raw_bags) {
    Bag bag{{}, raw.subject_id, raw.charttime};
    bag.item_indices.reserve(raw.item_ids.size());
    for (const auto& id : raw.item_ids) {
      auto index = vocabulary.find_id(id);
      if (!index) {
        throw OutOfVocabulary(fmt::format("item_id '{}' not in vocabulary", id));
      }
      bag.item_indices.push_back(static_cast<ItemIndex>(*index));
    }
    std::sort(bag.item_indices.begin(), bag.item_indices.end());
    bag.item_indices.erase(
        std::unique(bag.item_indices.begin(), bag.item_indices.end()),
        bag.item_indices.end());
    if (bag.item_indices.empty()) {
      throw EmptyDataset(fmt::format("bag ({}, {}) has no items",
                                     raw.subject_id, raw.charttime));
    }
    bags.push_back(std::move(bag));
  }
  return bags;
}

BagItemMatrix build_matrix(std::span<const Bag> bags,
                           const Vocabulary& vocabulary) {
  std::vector<std::vector<ItemIndex>> rows;
  rows.reserve(bags.size());
  for (const auto& bag : bags) rows.push_back(bag.item_indices);
  return BagItemMatrix(vocabulary.size(), rows);
}

EncodedQuery encode_query(std::span<const std::string> items,
                          const Vocabulary& vocabulary) {
  EncodedQuery query{PackedRow(vocabulary.size()), {}};
  bool any = false;
  for (const auto& item : items) {
    if (auto index = vocabulary.find(item)) {
      query.row.set(*index);
      any = true;
    } else {
      query.unknown_items.push_back(item);
    }
  }
  if (!any) throw EmptyQuery("no recognized items in query");
  return query;
}

}  // namespace labrec
