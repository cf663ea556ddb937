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
#include "fedmf/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "fedmf/error.hpp"
#include "fedmf/io.hpp"

namespace fedmf {

PreparedData prepare_dataset(const DatasetSpec& spec, Index d, std::uint64_t seed) {
  PreparedData out;
  if (spec.source == DataSource::kSynthetic) {
    SyntheticData syn = gen_synthetic(spec.n_users, spec.n_items, d, spec.density,
                                      spec.noise_sigma, seed, spec.clip);
    out.all = std::move(syn.store);
    out.truth = std::move(syn.truth);
    out.users = identity_id_map(out.all.n_users());
    out.items = identity_id_map(out.all.n_items());
  } else {
    LoadedRatings loaded = load_movielens(spec.path);
    out.all = std::move(loaded.store);
    out.users = std::move(loaded.users);
    out.items = std::move(loaded.items);
  }
  out.split = split(out.all, spec.test_fraction, seed);
  return out;
}

void ExperimentGrid::validate() const {
  if (schemes.empty()) throw Error(ErrorCode::kValidation, "grid has no schemes");
  if (defenses.empty()) throw Error(ErrorCode::kValidation, "grid has no defenses");
  if (seeds.empty()) throw Error(ErrorCode::kValidation, "grid has no seeds");
  fed.validate();
  for (const DefenseConfig& d : defenses) d.validate();
}

DefenseConfig cell_defense(const DefenseConfig& base, std::uint64_t seed) {
  DefenseConfig d = base;
  d.secureagg.mask_seed = base.secureagg.mask_seed + seed;
  d.dp.noise_seed = base.dp.noise_seed + seed;
  return d;
}

CellRun run_cell(const ExperimentGrid& grid, Scheme scheme, const DefenseConfig& defense,
                 std::uint64_t seed) {
  const PreparedData data = prepare_dataset(grid.dataset, grid.fed.hp.d, seed);
  CellRun out;
  out.views = partition(data.split.train, scheme, seed,
                        scheme == Scheme::kVertical ? std::optional(grid.side) : std::nullopt,
                        grid.fed.hp.d);
  out.test = data.split.test;
  FedConfig fed = grid.fed;
  fed.seed = seed;
  fed.defense = cell_defense(defense, seed);
  out.run = run_federated(out.views, fed);
  const PartyView view(out.run.transcript, grid.attacker);
  out.attack = run_attack(view, grid.attack);
  out.report = score(out.attack, out.run.transcript, grid.attack.exact_tolerance);
  out.model_rmse = test_rmse(out.run, out.views, out.test.empty() ? data.split.train : out.test);
  return out;
}

ResilienceMatrix run_grid(const ExperimentGrid& grid) {
  grid.validate();
  ResilienceMatrix out;
  for (Scheme scheme : grid.schemes) {
    for (const DefenseConfig& defense : grid.defenses) {
      for (std::uint64_t seed : grid.seeds) {
        try {
          const CellRun cell = run_cell(grid, scheme, defense, seed);
          const AttackReport& r = cell.report;
          out.cells.push_back({scheme, defense.label(), seed,
                               {r.coverage, r.rating_mae, r.exact_rate, r.profile_cosine,
                                static_cast<double>(r.id_leakage.size()), cell.model_rmse}});
        } catch (const Error& e) {
          throw Error(e.code(), "cell (" + std::string(to_string(scheme)) + ", " +
                                    defense.label() + ", seed " + std::to_string(seed) +
                                    "): " + e.what());
        }
      }
    }
  }
  out.summaries = summarize(out.cells);
  return out;
}

namespace {

constexpr double CellMetrics::*kMetricFields[] = {
    &CellMetrics::coverage,       &CellMetrics::rating_mae,       &CellMetrics::exact_rate,
    &CellMetrics::profile_cosine, &CellMetrics::id_leakage_count, &CellMetrics::model_rmse,
};
constexpr const char* kMetricNames[] = {"coverage",       "rating_mae",       "exact_rate",
                                        "profile_cosine", "id_leakage_count", "model_rmse"};

}  // namespace

std::vector<CellSummary> summarize(const std::vector<Cell>& cells) {
  std::vector<CellSummary> out;
  std::map<std::pair<Scheme, std::string>, std::size_t> slot;
  std::vector<std::vector<const Cell*>> groups;
  for (const Cell& c : cells) {
    auto [it, fresh] = slot.try_emplace({c.scheme, c.defense}, groups.size());
    if (fresh) {
      groups.emplace_back();
      out.push_back({c.scheme, c.defense, 0, {}, {}});
    }
    groups[it->second].push_back(&c);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    CellSummary& s = out[g];
    s.n_seeds = static_cast<Index>(groups[g].size());
    for (auto field : kMetricFields) {
      double sum = 0.0;
      Index n = 0;
      for (const Cell* c : groups[g]) {
        const double v = c->metrics.*field;
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
      }
      const double mean = n > 0 ? sum / static_cast<double>(n) : std::nan("");
      double ss = 0.0;
      for (const Cell* c : groups[g]) {
        const double v = c->metrics.*field;
        if (!std::isnan(v)) ss += (v - mean) * (v - mean);
      }
      s.mean.*field = mean;
      s.stddev.*field = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : (n == 1 ? 0.0 : std::nan(""));
    }
  }
  return out;
}

namespace {

std::string setting_name(Scheme s) {
  switch (s) {
    case Scheme::kHorizontal: return "Horizontal FedMF";
    case Scheme::kVertical: return "Vertical FedMF";
    case Scheme::kTransfer: return "Federated Transfer MF";
  }
  return "?";
}

std::string shared_params(Scheme s) {
  switch (s) {
    case Scheme::kHorizontal: return "whole model";
    case Scheme::kVertical: return "partial, none shared";
    case Scheme::kTransfer: return "partial, V shared";
  }
  return "?";
}

std::string fixed(double v, int prec) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace

std::string render(const ResilienceMatrix& matrix, EmitFormat format) {
  std::ostringstream out;
  switch (format) {
    case EmitFormat::kCsv: {
      out << kResilienceCsvHeader << "\n";
      for (const Cell& c : matrix.cells) {
        out << to_string(c.scheme) << ',' << c.defense << ',' << c.seed;
        for (auto field : kMetricFields) out << ',' << format_double(c.metrics.*field);
        out << "\n";
      }
      break;
    }
    case EmitFormat::kPlotData: {
      out << "# scheme defense seed";
      for (const char* name : kMetricNames) out << ' ' << name;
      out << "\n";
      for (const Cell& c : matrix.cells) {
        out << to_string(c.scheme) << ' ' << c.defense << ' ' << c.seed;
        for (auto field : kMetricFields) out << ' ' << format_double(c.metrics.*field);
        out << "\n";
      }
      break;
    }
    case EmitFormat::kTextSummary: {
      const std::vector<std::string> head = {"Problem setting", "Defense",  "Params shared",
                                             "Gradients",       "coverage", "rating_mae",
                                             "exact_rate",      "profile_cos", "ids_leaked",
                                             "model_rmse"};
      std::vector<std::vector<std::string>> rows;
      for (const CellSummary& s : matrix.summaries) {
        std::vector<std::string> row = {setting_name(s.scheme), s.defense, shared_params(s.scheme),
                                        s.scheme == Scheme::kVertical ? "collaborative" : "local"};
        for (auto field : kMetricFields) {
          const int prec = field == &CellMetrics::id_leakage_count ? 1 : 4;
          row.push_back(fixed(s.mean.*field, prec) + " +- " + fixed(s.stddev.*field, prec));
        }
        rows.push_back(std::move(row));
      }
      std::vector<std::size_t> width(head.size());
      for (std::size_t k = 0; k < head.size(); ++k) {
        width[k] = head[k].size();
        for (const auto& r : rows) width[k] = std::max(width[k], r[k].size());
      }
      const auto emit_row = [&](const std::vector<std::string>& r) {
        for (std::size_t k = 0; k < r.size(); ++k) {
          out << (k ? " | " : "") << (k + 1 < r.size() ? pad(r[k], width[k]) : r[k]);
        }
        out << "\n";
      };
      emit_row(head);
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 3;
      out << std::string(total - 3, '-') << "\n";
      for (const auto& r : rows) emit_row(r);
      out << "(mean +- stddev over seeds; '-' = not applicable)\n";
      break;
    }
  }
  return out.str();
}

void emit(const ResilienceMatrix& matrix, EmitFormat format, const std::filesystem::path& path) {
  write_file_atomic(path, render(matrix, format));
}

std::vector<Cell> parse_resilience_csv(const std::string& text) {
  std::vector<Cell> cells;
  auto lines = split_on(text, '\n');
  if (lines.empty() || trim(lines[0]) != kResilienceCsvHeader) {
    throw Error(ErrorCode::kParseError, "resilience CSV header mismatch");
  }
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (trim(lines[k]).empty()) continue;
    auto f = split_on(trim(lines[k]), ',');
    if (f.size() != 9) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(k + 1) + ": expected 9 fields");
    }
    Cell c;
    c.scheme = parse_scheme(f[0]);
    c.defense = std::string(f[1]);
    c.seed = static_cast<std::uint64_t>(parse_int(f[2], "seed"));
    for (std::size_t m = 0; m < 6; ++m) c.metrics.*kMetricFields[m] = parse_double(f[3 + m], kMetricNames[m]);
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace fedmf
