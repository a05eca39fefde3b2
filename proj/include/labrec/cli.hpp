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

#ifndef LABREC_CLI_HPP_
#define LABREC_CLI_HPP_

#include <iosfwd>
#include <span>
#include <string>

namespace labrec {

// Exit codes: 0 success, 1 user or data error, 2 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Runs `labrec <args...>`; `args` excludes the program name. Results go to
// `out`, diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out,
            std::ostream& err);

}  // namespace labrec

#endif  // LABREC_CLI_HPP_
