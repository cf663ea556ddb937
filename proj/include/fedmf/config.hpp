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
#ifndef FEDMF_CONFIG_HPP_
#define FEDMF_CONFIG_HPP_

// Run configuration: a sectioned `key = value` file. Sections are dataset,
// federation, defense, attack, output and grid. Every key is optional; a key
// that is not listed below is rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fedmf/attacks.hpp"
#include "fedmf/report.hpp"

namespace fedmf {

struct RunConfig {
  DatasetSpec dataset;
  std::uint64_t dataset_seed = 0;
  Scheme scheme = Scheme::kHorizontal;
  FedConfig fed;
  SideDataConfig side;
  AttackOptions attack;
  Party attacker = Party::kA;
  /// Directory holding transcript.txt (and truth.txt) for `attack`.
  std::filesystem::path transcript_dir;
  bool score = true;
  std::filesystem::path out_dir = "out";
  std::vector<Scheme> grid_schemes = {Scheme::kHorizontal, Scheme::kVertical, Scheme::kTransfer};
  std::vector<std::string> grid_defenses = {"none"};
  std::vector<std::uint64_t> grid_seeds = {1};

  /// Applies --seed: sets both the dataset and the federation seed.
  void override_seed(std::uint64_t seed);
  void validate() const;
  ExperimentGrid grid() const;
};

/// Throws kValidation naming section and key for unknown or malformed keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace fedmf

#endif  // FEDMF_CONFIG_HPP_
