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
#ifndef FEDMF_REPORT_HPP_
#define FEDMF_REPORT_HPP_

// Experiment grids over (scheme x defense x seed) and their resilience
// matrix: the measured counterpart of a qualitative weak/medium/strong
// comparison of the three federated settings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedmf/attacks.hpp"
#include "fedmf/datasets.hpp"
#include "fedmf/defenses.hpp"
#include "fedmf/fedsim.hpp"

namespace fedmf {

enum class DataSource { kSynthetic, kMovieLens };

struct DatasetSpec {
  DataSource source = DataSource::kSynthetic;
  Index n_users = 50;
  Index n_items = 40;
  double density = 0.1;
  double noise_sigma = 0.0;
  std::optional<RatingRange> clip;
  std::filesystem::path path;
  double test_fraction = 0.1;
};

struct PreparedData {
  RatingStore all;
  std::optional<GroundTruth> truth;
  IdMap users;
  IdMap items;
  TrainTest split;
};

/// Synthetic data is generated from `seed`; MovieLens data is loaded from
/// spec.path. Either way the train/test split uses `seed`.
PreparedData prepare_dataset(const DatasetSpec& spec, Index d, std::uint64_t seed);

struct ExperimentGrid {
  std::vector<Scheme> schemes;
  std::vector<DefenseConfig> defenses;
  std::vector<std::uint64_t> seeds;
  DatasetSpec dataset;
  FedConfig fed;
  SideDataConfig side;
  AttackOptions attack;
  Party attacker = Party::kA;

  void validate() const;
};

struct CellMetrics {
  double coverage = 0.0;
  double rating_mae = 0.0;
  double exact_rate = 0.0;
  double profile_cosine = 0.0;
  double id_leakage_count = 0.0;
  double model_rmse = 0.0;
};

struct Cell {
  Scheme scheme = Scheme::kHorizontal;
  std::string defense;
  std::uint64_t seed = 0;
  CellMetrics metrics;
};

/// Per-(scheme, defense) mean and sample standard deviation across seeds.
/// NaN entries (metric undefined for that run) are skipped.
struct CellSummary {
  Scheme scheme = Scheme::kHorizontal;
  std::string defense;
  Index n_seeds = 0;
  CellMetrics mean;
  CellMetrics stddev;
};

struct ResilienceMatrix {
  std::vector<Cell> cells;
  std::vector<CellSummary> summaries;
};

struct CellRun {
  Partition views;
  RatingStore test;
  FedRunResult run;
  AttackOutput attack;
  AttackReport report;
  double model_rmse = 0.0;
};

/// Cell-level defense: the grid's defense with seeds offset by the cell seed.
DefenseConfig cell_defense(const DefenseConfig& base, std::uint64_t seed);

/// partition -> train -> attack -> score for one grid coordinate.
CellRun run_cell(const ExperimentGrid& grid, Scheme scheme, const DefenseConfig& defense,
                 std::uint64_t seed);

ResilienceMatrix run_grid(const ExperimentGrid& grid);

std::vector<CellSummary> summarize(const std::vector<Cell>& cells);

enum class EmitFormat { kCsv, kPlotData, kTextSummary };

inline constexpr const char* kResilienceCsvHeader =
    "scheme,defense,seed,coverage,rating_mae,exact_rate,profile_cosine,id_leakage_count,"
    "model_rmse";

std::string render(const ResilienceMatrix& matrix, EmitFormat format);
void emit(const ResilienceMatrix& matrix, EmitFormat format, const std::filesystem::path& path);

/// Reads back the cells of a CSV produced by render(kCsv).
std::vector<Cell> parse_resilience_csv(const std::string& text);

}  // namespace fedmf

#endif  // FEDMF_REPORT_HPP_
