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

#ifndef LABREC_BAG_IO_HPP_
#define LABREC_BAG_IO_HPP_

// Bags interchange format: JSON Lines, one bag per line.
//
//   {"subject_id":"10006","charttime":"2164-10-23 17:33:00","items":["50868","50882"]}
//
// Optional keys: "hadm_id" (string) and "names" (labels parallel to "items").
// Readers ignore keys they do not know.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "labrec/core.hpp"

namespace labrec {

void write_bags(std::ostream& out, std::span<const RawBag> bags);
void write_bags(const std::filesystem::path& path, std::span<const RawBag> bags);

// Throws IoError when the file cannot be opened, ParameterError naming the
// line on a malformed record.
std::vector<RawBag> read_bags(std::istream& in);
std::vector<RawBag> read_bags(const std::filesystem::path& path);

}  // namespace labrec

#endif  // LABREC_BAG_IO_HPP_
