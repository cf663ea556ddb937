/*
 * Copyright 2026 The FedMF Lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef FEDMF_CLI_HPP_
#define FEDMF_CLI_HPP_

#include <iosfwd>

namespace fedmf {

/// `fedmf <gen|train|attack|grid> --config <path> [--seed N] [--out DIR]`.
/// Returns 0 on success, 1 on validation errors, 2 on runtime or IO errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fedmf

#endif  // FEDMF_CLI_HPP_
