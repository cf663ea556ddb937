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
#include "fedmf/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedmf/config.hpp"
#include "fedmf/error.hpp"
#include "fedmf/io.hpp"
#include "fedmf/transcript_io.hpp"

namespace fedmf {

namespace fs = std::filesystem;

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct Loaded {
  RunConfig config;
  std::string text;
  fs::path out_dir;
};

Loaded load(const Args& args) {
  Loaded l;
  if (!fs::exists(args.config)) {
    throw Error(ErrorCode::kIoError, "config file not found: " + args.config);
  }
  l.text = read_file(args.config);
  l.config = parse_config(l.text);
  if (args.seed) l.config.override_seed(*args.seed);
  l.out_dir = args.out.empty() ? l.config.out_dir : fs::path(args.out);
  std::error_code ec;
  fs::create_directories(l.out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + l.out_dir.string() + ": " + ec.message());
  write_file_atomic(l.out_dir / "config.ini", l.text);
  return l;
}

std::string side_text(const VerticalSideData& side) {
  std::string s = "fedmf-side 1\n";
  write_matrix(s, "attr_dict", side.attr_dict);
  write_matrix(s, "implicit_dict", side.implicit_dict);
  for (const auto& [user, attrs] : side.user_attrs) {
    s += "user " + std::to_string(user) + " attrs";
    for (Index a : attrs) s += " " + std::to_string(a);
    s += " implicit";
    if (auto it = side.user_implicit.find(user); it != side.user_implicit.end()) {
      for (Index x : it->second) s += " " + std::to_string(x);
    }
    s += "\n";
  }
  return s;
}

int cmd_gen(const Args& args, std::ostream& out) {
  const Loaded l = load(args);
  const RunConfig& c = l.config;
  const PreparedData data = prepare_dataset(c.dataset, c.fed.hp.d, c.dataset_seed);
  write_movielens(data.all, data.users, data.items, l.out_dir / "ratings.tsv");
  write_movielens(data.split.train, data.users, data.items, l.out_dir / "train.tsv");
  write_movielens(data.split.test, data.users, data.items, l.out_dir / "test.tsv");
  write_id_map(data.users, l.out_dir / "users.map");
  write_id_map(data.items, l.out_dir / "items.map");
  if (data.truth) {
    std::string s = "fedmf-factors 1\n";
    write_matrix(s, "users", data.truth->true_users);
    write_matrix(s, "items", data.truth->true_items);
    write_file_atomic(l.out_dir / "factors.txt", s);
  }
  out << "gen: " << data.all.n_users() << " users, " << data.all.n_items() << " items, "
      << data.all.size() << " ratings (" << data.split.train.size() << " train, "
      << data.split.test.size() << " test) -> " << l.out_dir.string() << "\n";
  return 0;
}

int cmd_train(const Args& args, std::ostream& out) {
  const Loaded l = load(args);
  const RunConfig& c = l.config;
  const PreparedData data = prepare_dataset(c.dataset, c.fed.hp.d, c.dataset_seed);
  const Partition views =
      partition(data.split.train, c.scheme, c.fed.seed,
                c.scheme == Scheme::kVertical ? std::optional(c.side) : std::nullopt, c.fed.hp.d);
  const FedRunResult run = run_federated(views, c.fed);
  const double rmse =
      test_rmse(run, views, data.split.test.empty() ? data.split.train : data.split.test);
  write_transcript(run.transcript, l.out_dir / "transcript.txt");
  write_truth(run.transcript, l.out_dir / "truth.txt");
  std::string model = "fedmf-model 1\n";
  model += "test_rmse " + hex_double(rmse) + "\n";
  write_matrix(model, "a.users", run.model_a.users);
  write_matrix(model, "a.items", run.model_a.items);
  write_matrix(model, "b.users", run.model_b.users);
  write_matrix(model, "b.items", run.model_b.items);
  write_matrix(model, "user_offsets", run.user_offsets);
  write_file_atomic(l.out_dir / "model.txt", model);
  if (views.b.side) write_file_atomic(l.out_dir / "side.txt", side_text(*views.b.side));
  out << "train: " << to_string(c.scheme) << ", " << c.fed.rounds << " rounds, defense "
      << c.fed.defense.label() << ", test_rmse " << format_double(rmse) << " -> "
      << l.out_dir.string() << "\n";
  return 0;
}

int cmd_attack(const Args& args, std::ostream& out) {
  const Loaded l = load(args);
  const RunConfig& c = l.config;
  const fs::path in_dir = c.transcript_dir.empty() ? l.out_dir : c.transcript_dir;
  const fs::path transcript_path = in_dir / "transcript.txt";
  if (!fs::exists(transcript_path)) {
    throw Error(ErrorCode::kIoError, "transcript not found: " + transcript_path.string());
  }
  Transcript transcript = read_transcript(transcript_path);
  if (c.score) {
    const fs::path truth_path = in_dir / "truth.txt";
    if (!fs::exists(truth_path)) {
      throw Error(ErrorCode::kIoError, "ground-truth sidecar not found: " + truth_path.string());
    }
    read_truth(truth_path, transcript);
  }
  const PartyView view(transcript, c.attacker);
  const AttackOutput result = run_attack(view, c.attack);
  const AttackReport report = score(result, transcript, c.attack.exact_tolerance);
  write_file_atomic(l.out_dir / "report.txt", report_text(report));
  write_file_atomic(l.out_dir / "report.csv", report_csv(report));
  out << "attack: " << to_string(report.scheme) << " by " << to_string(report.attacker) << ", "
      << report.rows.size() << " inferred, coverage " << format_double(report.coverage)
      << ", rating_mae " << format_double(report.rating_mae) << " -> " << l.out_dir.string()
      << "\n";
  return 0;
}

int cmd_grid(const Args& args, std::ostream& out) {
  const Loaded l = load(args);
  const ResilienceMatrix matrix = run_grid(l.config.grid());
  emit(matrix, EmitFormat::kCsv, l.out_dir / "resilience.csv");
  emit(matrix, EmitFormat::kPlotData, l.out_dir / "resilience.dat");
  emit(matrix, EmitFormat::kTextSummary, l.out_dir / "resilience.txt");
  out << "grid: " << matrix.cells.size() << " cells -> " << l.out_dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated matrix factorization privacy lab"};
  app.require_subcommand(1, 1);
  Args args;
  using Handler = int (*)(const Args&, std::ostream&);
  const std::pair<const char*, const char*> commands[] = {
      {"gen", "Generate or load a rating dataset"},
      {"train", "Run federated training and write the transcript"},
      {"attack", "Run the honest-but-curious attack against a transcript"},
      {"grid", "Run a scheme x defense x seed grid"},
  };
  const Handler handlers[] = {cmd_gen, cmd_train, cmd_attack, cmd_grid};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "Config file")->required();
    sub->add_option("--seed", args.seed, "Overrides dataset.seed and federation.seed");
    sub->add_option("--out", args.out, "Output directory (default: output.dir)");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    for (std::size_t k = 0; k < subs.size(); ++k) {
      if (subs[k]->parsed()) return handlers[k](args, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kValidation:
      case ErrorCode::kInvalidArgument:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace fedmf
