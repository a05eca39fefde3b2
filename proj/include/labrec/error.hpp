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

#ifndef LABREC_ERROR_HPP_
#define LABREC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace labrec {

// Base of every error raised by the library. `is_user_error()` separates bad
// input (exit code 1 in the CLI) from internal failures (exit code 2).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, bool user_error = true)
      : std::runtime_error(what), user_error_(user_error) {}

  bool is_user_error() const noexcept { return user_error_; }

 private:
  bool user_error_;
};

#define LABREC_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

LABREC_DEFINE_ERROR(EmptyDataset);
LABREC_DEFINE_ERROR(OutOfVocabulary);
LABREC_DEFINE_ERROR(EmptyQuery);
LABREC_DEFINE_ERROR(DimensionError);
LABREC_DEFINE_ERROR(ParameterError);
LABREC_DEFINE_ERROR(IoError);
LABREC_DEFINE_ERROR(VersionError);
LABREC_DEFINE_ERROR(CorruptModel);

#undef LABREC_DEFINE_ERROR

// Raised when an input file lacks a required column; `column()` names it.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string column)
      : Error("SchemaError: missing required column " + column),
        column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

}  // namespace labrec

#endif  // LABREC_ERROR_HPP_
