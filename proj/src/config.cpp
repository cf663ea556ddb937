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
#include "fedmf/config.hpp"

#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fedmf/error.hpp"
#include "fedmf/io.hpp"

namespace fedmf {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(RunConfig&, std::string_view)>;

std::uint64_t to_u64(std::string_view v, std::string_view what) {
  const long long x = parse_int(v, what);
  if (x < 0) throw Error(ErrorCode::kParseError, std::string(what) + " must be non-negative");
  return static_cast<std::uint64_t>(x);
}

Index to_index(std::string_view v, std::string_view what) {
  return static_cast<Index>(parse_int(v, what));
}

bool to_bool(std::string_view v, std::string_view what) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::kParseError, std::string(what) + ": expected a boolean, got '" +
                                          std::string(v) + "'");
}

template <typename T, typename F>
std::vector<T> to_list(std::string_view v, F&& one) {
  std::vector<T> out;
  for (std::string_view item : split_on(v, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(one(item));
  }
  return out;
}

RatingRange& clip_of(RunConfig& c) {
  if (!c.dataset.clip) c.dataset.clip = RatingRange{1.0, 5.0};
  return *c.dataset.clip;
}

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"dataset",
       {
           {"source", [](RunConfig& c, std::string_view v) {
              if (v == "synthetic") c.dataset.source = DataSource::kSynthetic;
              else if (v == "movielens") c.dataset.source = DataSource::kMovieLens;
              else throw Error(ErrorCode::kParseError, "unknown source '" + std::string(v) + "'");
            }},
           {"n_users", [](RunConfig& c, std::string_view v) { c.dataset.n_users = to_index(v, "n_users"); }},
           {"n_items", [](RunConfig& c, std::string_view v) { c.dataset.n_items = to_index(v, "n_items"); }},
           {"density", [](RunConfig& c, std::string_view v) { c.dataset.density = parse_double(v, "density"); }},
           {"noise_sigma", [](RunConfig& c, std::string_view v) { c.dataset.noise_sigma = parse_double(v, "noise_sigma"); }},
           {"clip_lo", [](RunConfig& c, std::string_view v) { clip_of(c).lo = parse_double(v, "clip_lo"); }},
           {"clip_hi", [](RunConfig& c, std::string_view v) { clip_of(c).hi = parse_double(v, "clip_hi"); }},
           {"path", [](RunConfig& c, std::string_view v) { c.dataset.path = std::string(v); }},
           {"test_fraction", [](RunConfig& c, std::string_view v) { c.dataset.test_fraction = parse_double(v, "test_fraction"); }},
           {"seed", [](RunConfig& c, std::string_view v) { c.dataset_seed = to_u64(v, "seed"); }},
       }},
      {"federation",
       {
           {"scheme", [](RunConfig& c, std::string_view v) { c.scheme = parse_scheme(v); }},
           {"rounds", [](RunConfig& c, std::string_view v) { c.fed.rounds = to_index(v, "rounds"); }},
           {"local_steps", [](RunConfig& c, std::string_view v) { c.fed.local_steps = to_index(v, "local_steps"); }},
           {"minibatch", [](RunConfig& c, std::string_view v) { c.fed.minibatch = parse_minibatch_rule(v); }},
           {"d", [](RunConfig& c, std::string_view v) { c.fed.hp.d = to_index(v, "d"); }},
           {"gamma", [](RunConfig& c, std::string_view v) { c.fed.hp.gamma = parse_double(v, "gamma"); }},
           {"lambda_u", [](RunConfig& c, std::string_view v) { c.fed.hp.lambda_u = parse_double(v, "lambda_u"); }},
           {"lambda_v", [](RunConfig& c, std::string_view v) { c.fed.hp.lambda_v = parse_double(v, "lambda_v"); }},
           {"seed", [](RunConfig& c, std::string_view v) { c.fed.seed = to_u64(v, "seed"); }},
           {"side_attrs", [](RunConfig& c, std::string_view v) { c.side.n_attrs = to_index(v, "side_attrs"); }},
           {"side_attrs_per_user", [](RunConfig& c, std::string_view v) { c.side.attrs_per_user = to_index(v, "side_attrs_per_user"); }},
           {"side_implicit_per_user", [](RunConfig& c, std::string_view v) { c.side.implicit_per_user = to_index(v, "side_implicit_per_user"); }},
           {"side_coverage", [](RunConfig& c, std::string_view v) { c.side.coverage = parse_double(v, "side_coverage"); }},
           {"side_factor_scale", [](RunConfig& c, std::string_view v) { c.side.factor_scale = parse_double(v, "side_factor_scale"); }},
       }},
      {"defense",
       {
           {"kind", [](RunConfig& c, std::string_view v) { c.fed.defense.kind = parse_defense_kind(v); }},
           {"field_bits", [](RunConfig& c, std::string_view v) { c.fed.defense.secureagg.field_bits = static_cast<int>(parse_int(v, "field_bits")); }},
           {"frac_bits", [](RunConfig& c, std::string_view v) { c.fed.defense.secureagg.frac_bits = static_cast<int>(parse_int(v, "frac_bits")); }},
           {"mask_seed", [](RunConfig& c, std::string_view v) { c.fed.defense.secureagg.mask_seed = to_u64(v, "mask_seed"); }},
           {"clip_norm", [](RunConfig& c, std::string_view v) { c.fed.defense.dp.clip_norm = parse_double(v, "clip_norm"); }},
           {"sigma", [](RunConfig& c, std::string_view v) { c.fed.defense.dp.sigma = parse_double(v, "sigma"); }},
           {"noise_seed", [](RunConfig& c, std::string_view v) { c.fed.defense.dp.noise_seed = to_u64(v, "noise_seed"); }},
       }},
      {"attack",
       {
           {"attacker", [](RunConfig& c, std::string_view v) { c.attacker = parse_party(v); }},
           {"transcript_dir", [](RunConfig& c, std::string_view v) { c.transcript_dir = std::string(v); }},
           {"score", [](RunConfig& c, std::string_view v) { c.score = to_bool(v, "score"); }},
           {"zero_tol", [](RunConfig& c, std::string_view v) { c.attack.zero_tol = parse_double(v, "zero_tol"); }},
           {"transfer_window", [](RunConfig& c, std::string_view v) { c.attack.transfer_window = to_index(v, "transfer_window"); }},
           {"direction_tol", [](RunConfig& c, std::string_view v) { c.attack.direction_tol = parse_double(v, "direction_tol"); }},
           {"max_iters", [](RunConfig& c, std::string_view v) { c.attack.max_iters = to_index(v, "max_iters"); }},
           {"step_tol", [](RunConfig& c, std::string_view v) { c.attack.step_tol = parse_double(v, "step_tol"); }},
           {"rating_lo", [](RunConfig& c, std::string_view v) { c.attack.rating_range.lo = parse_double(v, "rating_lo"); }},
           {"rating_hi", [](RunConfig& c, std::string_view v) { c.attack.rating_range.hi = parse_double(v, "rating_hi"); }},
           {"exact_tolerance", [](RunConfig& c, std::string_view v) { c.attack.exact_tolerance = parse_double(v, "exact_tolerance"); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); }},
       }},
      {"grid",
       {
           {"schemes", [](RunConfig& c, std::string_view v) {
              c.grid_schemes = to_list<Scheme>(v, [](std::string_view s) { return parse_scheme(s); });
            }},
           {"defenses", [](RunConfig& c, std::string_view v) {
              c.grid_defenses = to_list<std::string>(v, [](std::string_view s) { return std::string(s); });
            }},
           {"seeds", [](RunConfig& c, std::string_view v) {
              c.grid_seeds = to_list<std::uint64_t>(v, [](std::string_view s) { return to_u64(s, "seeds"); });
            }},
       }},
  };
  return table;
}

}  // namespace

void RunConfig::override_seed(std::uint64_t seed) {
  dataset_seed = seed;
  fed.seed = seed;
}

void RunConfig::validate() const {
  const auto bad = [](const std::string& where, const std::string& what) {
    throw Error(ErrorCode::kValidation, where + ": " + what);
  };
  if (dataset.n_users <= 0) bad("dataset.n_users", "must be positive");
  if (dataset.n_items <= 0) bad("dataset.n_items", "must be positive");
  if (!(dataset.density > 0.0 && dataset.density <= 1.0)) bad("dataset.density", "must be in (0, 1]");
  if (!(dataset.noise_sigma >= 0.0)) bad("dataset.noise_sigma", "must be >= 0");
  if (!(dataset.test_fraction >= 0.0 && dataset.test_fraction < 1.0)) {
    bad("dataset.test_fraction", "must be in [0, 1)");
  }
  if (dataset.clip && !(dataset.clip->lo < dataset.clip->hi)) bad("dataset.clip_lo", "must be below clip_hi");
  if (dataset.source == DataSource::kMovieLens && dataset.path.empty()) {
    bad("dataset.path", "required for source = movielens");
  }
  if (attack.transfer_window < 2) bad("attack.transfer_window", "must be at least 2");
  if (!(attack.rating_range.lo < attack.rating_range.hi)) bad("attack.rating_lo", "must be below rating_hi");
  if (grid_schemes.empty()) bad("grid.schemes", "must not be empty");
  if (grid_defenses.empty()) bad("grid.defenses", "must not be empty");
  if (grid_seeds.empty()) bad("grid.seeds", "must not be empty");
  try {
    fed.validate();
  } catch (const Error& e) {
    bad("federation/defense", e.what());
  }
  if (scheme == Scheme::kVertical) {
    try {
      side.validate(dataset.n_items);
    } catch (const Error& e) {
      bad("federation.side_*", e.what());
    }
  }
  for (const std::string& label : grid_defenses) {
    try {
      parse_defense_label(label, fed.defense).validate();
    } catch (const Error& e) {
      bad("grid.defenses", e.what());
    }
  }
}

ExperimentGrid RunConfig::grid() const {
  ExperimentGrid g;
  g.schemes = grid_schemes;
  for (const std::string& label : grid_defenses) {
    g.defenses.push_back(parse_defense_label(label, fed.defense));
  }
  g.seeds = grid_seeds;
  g.dataset = dataset;
  g.fed = fed;
  g.side = side;
  g.attack = attack;
  g.attacker = attacker;
  return g;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kValidation, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig config;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorCode::kValidation, "key '" + section + "' must be inside a section");
    }
    const auto sec = table.find(section);
    if (sec == table.end()) {
      throw Error(ErrorCode::kValidation, "unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) {
        throw Error(ErrorCode::kValidation, "unknown key '" + key + "' in section [" + section + "]");
      }
      try {
        it->second(config, trim(node.data()));
      } catch (const Error& e) {
        throw Error(ErrorCode::kValidation, section + "." + key + ": " + e.what());
      }
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

}  // namespace fedmf
