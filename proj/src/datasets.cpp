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
#include "fedmf/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fedmf/error.hpp"
#include "fedmf/io.hpp"
#include "fedmf/rng.hpp"

namespace fedmf {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kHorizontal: return "horizontal";
    case Scheme::kVertical: return "vertical";
    case Scheme::kTransfer: return "transfer";
  }
  return "?";
}

std::string_view to_string(Party party) { return party == Party::kA ? "A" : "B"; }

Scheme parse_scheme(std::string_view text) {
  if (text == "horizontal") return Scheme::kHorizontal;
  if (text == "vertical") return Scheme::kVertical;
  if (text == "transfer") return Scheme::kTransfer;
  throw Error(ErrorCode::kParseError, "unknown scheme '" + std::string(text) + "'");
}

Party parse_party(std::string_view text) {
  if (text == "A" || text == "a") return Party::kA;
  if (text == "B" || text == "b") return Party::kB;
  throw Error(ErrorCode::kParseError, "unknown party '" + std::string(text) + "'");
}

namespace {

using Pair = std::pair<Index, Index>;

bool covers(const std::vector<Pair>& pairs, Index n, Index m) {
  std::vector<char> u(static_cast<std::size_t>(n), 0), v(static_cast<std::size_t>(m), 0);
  for (auto [i, j] : pairs) {
    u[static_cast<std::size_t>(i)] = 1;
    v[static_cast<std::size_t>(j)] = 1;
  }
  return std::all_of(u.begin(), u.end(), [](char c) { return c != 0; }) &&
         std::all_of(v.begin(), v.end(), [](char c) { return c != 0; });
}

std::vector<Pair> sample_pairs(Index n, Index m, Index count, Rng& rng,
                               std::unordered_set<std::uint64_t> taken = {}) {
  std::vector<Pair> out;
  const auto total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m);
  const auto need = static_cast<std::uint64_t>(count);
  if (2 * (need + taken.size()) > total) {
    // Dense request: shuffle the free cells.
    std::vector<std::uint64_t> free;
    free.reserve(total - taken.size());
    for (std::uint64_t c = 0; c < total; ++c)
      if (!taken.contains(c)) free.push_back(c);
    std::shuffle(free.begin(), free.end(), rng);
    free.resize(static_cast<std::size_t>(need));
    for (auto c : free) out.emplace_back(static_cast<Index>(c / m), static_cast<Index>(c % m));
    return out;
  }
  std::uniform_int_distribution<std::uint64_t> cell(0, total - 1);
  while (out.size() < need) {
    std::uint64_t c = cell(rng);
    if (!taken.insert(c).second) continue;
    out.emplace_back(static_cast<Index>(c / m), static_cast<Index>(c % m));
  }
  return out;
}

// A random "spine" that touches every user and item once, completed by
// uniform sampling of the remaining cells.
std::vector<Pair> covering_sample(Index n, Index m, Index count, Rng& rng) {
  std::vector<Index> pu(static_cast<std::size_t>(n)), pi(static_cast<std::size_t>(m));
  std::iota(pu.begin(), pu.end(), Index{0});
  std::iota(pi.begin(), pi.end(), Index{0});
  std::shuffle(pu.begin(), pu.end(), rng);
  std::shuffle(pi.begin(), pi.end(), rng);
  const Index spine = std::max(n, m);
  std::vector<Pair> out;
  std::unordered_set<std::uint64_t> taken;
  for (Index k = 0; k < spine; ++k) {
    Pair p{pu[static_cast<std::size_t>(k % n)], pi[static_cast<std::size_t>(k % m)]};
    out.push_back(p);
    taken.insert(static_cast<std::uint64_t>(p.first) * static_cast<std::uint64_t>(m) +
                 static_cast<std::uint64_t>(p.second));
  }
  auto rest = sample_pairs(n, m, count - spine, rng, std::move(taken));
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

constexpr int kCoverageRetries = 32;

}  // namespace

SyntheticData gen_synthetic(Index n, Index m, Index d, double density, double noise_sigma,
                            std::uint64_t seed, std::optional<RatingRange> clip) {
  if (n < 1 || m < 1 || d < 1) throw Error(ErrorCode::kInvalidArgument, "n, m, d must be >= 1");
  if (!(density > 0.0) || density > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "density must be in (0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be >= 0");
  const auto count = static_cast<Index>(
      std::floor(density * static_cast<double>(n) * static_cast<double>(m)));
  if (count < std::max(n, m)) {
    throw Error(ErrorCode::kInfeasibleDensity,
                std::to_string(count) + " ratings cannot cover " + std::to_string(n) +
                    " users and " + std::to_string(m) + " items");
  }

  Rng rng = make_rng(seed, Stream::kSynthetic);
  const double hi = std::sqrt(10.0 / static_cast<double>(d));
  std::uniform_real_distribution<double> unif(0.0, hi);
  GroundTruth truth;
  truth.true_users = FactorMatrix::NullaryExpr(n, d, [&]() { return unif(rng); });
  truth.true_items = FactorMatrix::NullaryExpr(m, d, [&]() { return unif(rng); });
  truth.noise_sigma = noise_sigma;
  truth.rating_clip = clip;

  std::vector<Pair> pairs;
  bool covered = false;
  for (int attempt = 0; attempt < kCoverageRetries && !covered; ++attempt) {
    pairs = sample_pairs(n, m, count, rng);
    covered = covers(pairs, n, m);
  }
  if (!covered) pairs = covering_sample(n, m, count, rng);
  std::sort(pairs.begin(), pairs.end());

  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  std::vector<Rating> ratings;
  ratings.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    double r = truth.true_users.row(i).dot(truth.true_items.row(j));
    if (noise_sigma > 0.0) r += noise(rng);
    if (clip) r = std::clamp(r, clip->lo, clip->hi);
    ratings.push_back({i, j, r});
  }
  return {RatingStore(n, m, std::move(ratings)), std::move(truth)};
}

// -- MovieLens ------------------------------------------------------------------

IdMap::IdMap(std::vector<std::int64_t> external) : external_(std::move(external)) {
  for (std::size_t k = 0; k < external_.size(); ++k) {
    if (!internal_.emplace(external_[k], static_cast<Index>(k)).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate external id " + std::to_string(external_[k]));
    }
  }
}

std::optional<Index> IdMap::internal(std::int64_t external) const {
  auto it = internal_.find(external);
  if (it == internal_.end()) return std::nullopt;
  return it->second;
}

IdMap identity_id_map(Index n) {
  std::vector<std::int64_t> ext(static_cast<std::size_t>(n));
  std::iota(ext.begin(), ext.end(), std::int64_t{1});
  return IdMap(std::move(ext));
}

namespace {

struct RawRecord {
  std::int64_t user;
  std::int64_t item;
  double rating;
};

std::vector<RawRecord> parse_movielens(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<RawRecord> records;
  std::size_t line_no = 0;
  for (std::string_view line : split_on(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_on(line, '\t');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kParseError,
                  where + ": expected 4 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    try {
      RawRecord rec{parse_int(fields[0], "user"), parse_int(fields[1], "item"),
                    parse_double(fields[2], "rating")};
      parse_int(fields[3], "timestamp");
      records.push_back(rec);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    }
  }
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, path.string() + " has no ratings");
  return records;
}

RatingStore assemble(const std::vector<RawRecord>& records, const IdMap& users,
                     const IdMap& items) {
  // Last occurrence of a pair wins.
  std::map<std::pair<Index, Index>, double> cells;
  for (const RawRecord& rec : records) {
    auto u = users.internal(rec.user);
    auto v = items.internal(rec.item);
    if (!u || !v) {
      throw Error(ErrorCode::kParseError, "id (" + std::to_string(rec.user) + ", " +
                                              std::to_string(rec.item) +
                                              ") missing from id map");
    }
    cells[{*u, *v}] = rec.rating;
  }
  std::vector<Rating> ratings;
  ratings.reserve(cells.size());
  for (const auto& [key, value] : cells) ratings.push_back({key.first, key.second, value});
  return RatingStore(users.size(), items.size(), std::move(ratings));
}

}  // namespace

LoadedRatings load_movielens(const std::filesystem::path& path) {
  const auto records = parse_movielens(path);
  std::set<std::int64_t> user_ids, item_ids;
  for (const auto& rec : records) {
    user_ids.insert(rec.user);
    item_ids.insert(rec.item);
  }
  IdMap users({user_ids.begin(), user_ids.end()});
  IdMap items({item_ids.begin(), item_ids.end()});
  RatingStore store = assemble(records, users, items);
  return {std::move(store), std::move(users), std::move(items)};
}

LoadedRatings load_movielens(const std::filesystem::path& path, const IdMap& users,
                             const IdMap& items) {
  return {assemble(parse_movielens(path), users, items), users, items};
}

void write_movielens(const RatingStore& store, const IdMap& users, const IdMap& items,
                     const std::filesystem::path& path) {
  if (users.size() < store.n_users() || items.size() < store.n_items()) {
    throw Error(ErrorCode::kShapeMismatch, "id map smaller than rating universe");
  }
  std::ostringstream out;
  for (const Rating& r : store.ratings()) {
    out << users.external(r.user) << '\t' << items.external(r.item) << '\t'
        << format_double(r.value) << '\t' << 0 << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_id_map(const IdMap& map, const std::filesystem::path& path) {
  std::ostringstream out;
  for (Index k = 0; k < map.size(); ++k) out << map.external(k) << '\t' << k << '\n';
  write_file_atomic(path, out.str());
}

IdMap read_id_map(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::pair<Index, std::int64_t>> rows;
  std::size_t line_no = 0;
  for (std::string_view line : split_on(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_on(line, '\t');
    if (fields.size() != 2) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    }
    rows.emplace_back(parse_int(fields[1], "internal id"), parse_int(fields[0], "external id"));
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::int64_t> ext;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].first != static_cast<Index>(k)) {
      throw Error(ErrorCode::kParseError, path.string() + ": internal ids are not dense");
    }
    ext.push_back(rows[k].second);
  }
  return IdMap(std::move(ext));
}

// -- Split -----------------------------------------------------------------------

TrainTest split(const RatingStore& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0) || !(test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must be in [0, 1)");
  }
  const auto target = static_cast<Index>(std::floor(test_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, Stream::kSplit);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Index> ucount = data.user_counts();
  std::vector<Index> icount = data.item_counts();
  std::vector<char> in_test(order.size(), 0);
  Index taken = 0;
  for (std::size_t k : order) {
    if (taken >= target) break;
    const Rating& r = data[static_cast<Index>(k)];
    auto& cu = ucount[static_cast<std::size_t>(r.user)];
    auto& ci = icount[static_cast<std::size_t>(r.item)];
    if (cu < 2 || ci < 2) continue;
    --cu;
    --ci;
    in_test[k] = 1;
    ++taken;
  }
  std::vector<Rating> train, test;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (in_test[k] ? test : train).push_back(data[static_cast<Index>(k)]);
  }
  return {data.with_ratings(std::move(train)), data.with_ratings(std::move(test))};
}

// -- Side data --------------------------------------------------------------------

void SideDataConfig::validate(Index n_items) const {
  if (n_attrs < 0 || attrs_per_user < 0 || implicit_per_user < 0) {
    throw Error(ErrorCode::kInvalidArgument, "side-data counts must be >= 0");
  }
  if (attrs_per_user > n_attrs) {
    throw Error(ErrorCode::kInvalidArgument, "attrs_per_user exceeds n_attrs");
  }
  if (implicit_per_user > n_items) {
    throw Error(ErrorCode::kInvalidArgument, "implicit_per_user exceeds item count");
  }
  if (!(coverage >= 0.0) || coverage > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "coverage must be in [0, 1]");
  }
  if (!(factor_scale >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "factor_scale < 0");
}

std::vector<Index> VerticalSideData::users() const {
  std::vector<Index> out;
  out.reserve(user_attrs.size());
  for (const auto& [u, _] : user_attrs) out.push_back(u);
  return out;
}

void VerticalSideData::validate(Index d) const {
  if (attr_dict.cols() != d || implicit_dict.cols() != d) {
    throw Error(ErrorCode::kShapeMismatch, "side-data dictionaries must have width d");
  }
  for (const auto& [u, attrs] : user_attrs) {
    for (Index a : attrs) {
      if (a < 0 || a >= attr_dict.rows()) {
        throw Error(ErrorCode::kIdOutOfRange, "attribute " + std::to_string(a) + " of user " +
                                                  std::to_string(u));
      }
    }
  }
  for (const auto& [u, items] : user_implicit) {
    if (!user_attrs.contains(u)) {
      throw Error(ErrorCode::kInvalidArgument, "implicit set for unknown user " + std::to_string(u));
    }
    for (Index l : items) {
      if (l < 0 || l >= implicit_dict.rows()) {
        throw Error(ErrorCode::kIdOutOfRange, "implicit item " + std::to_string(l));
      }
    }
  }
}

namespace {

std::vector<Index> sample_subset(Index universe, Index count, Rng& rng) {
  std::vector<Index> all(static_cast<std::size_t>(universe));
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

VerticalSideData synthesize_side_data(Index n_users, Index n_items, Index d,
                                      const SideDataConfig& config, std::uint64_t seed) {
  config.validate(n_items);
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  Rng rng = make_rng(seed, Stream::kSideData);
  const double s = config.factor_scale / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> unif(-s, s);
  VerticalSideData side;
  side.attr_dict = FactorMatrix::NullaryExpr(config.n_attrs, d, [&]() { return unif(rng); });
  side.implicit_dict = FactorMatrix::NullaryExpr(n_items, d, [&]() { return unif(rng); });
  const auto known = static_cast<Index>(std::floor(config.coverage * static_cast<double>(n_users)));
  for (Index u : sample_subset(n_users, known, rng)) {
    side.user_attrs[u] = sample_subset(config.n_attrs, config.attrs_per_user, rng);
    side.user_implicit[u] = sample_subset(n_items, config.implicit_per_user, rng);
  }
  return side;
}

// -- Partition --------------------------------------------------------------------

namespace {

std::vector<Index> users_with_ratings(const RatingStore& store) {
  std::vector<Index> out;
  for (Index i = 0; i < store.n_users(); ++i)
    if (store.user_count(i) > 0) out.push_back(i);
  return out;
}

}  // namespace

Partition partition(const RatingStore& data, Scheme scheme, std::uint64_t seed,
                    std::optional<SideDataConfig> side, Index d) {
  Rng rng = make_rng(seed, Stream::kPartition);
  Partition out;
  out.plan.scheme = scheme;
  switch (scheme) {
    case Scheme::kHorizontal: {
      std::bernoulli_distribution coin(0.5);
      std::vector<Rating> a, b;
      out.plan.rating_owner.reserve(static_cast<std::size_t>(data.size()));
      for (const Rating& r : data.ratings()) {
        const Party owner = coin(rng) ? Party::kA : Party::kB;
        out.plan.rating_owner.push_back(owner);
        (owner == Party::kA ? a : b).push_back(r);
      }
      out.a.ratings = data.with_ratings(std::move(a));
      out.b.ratings = data.with_ratings(std::move(b));
      out.a.users = users_with_ratings(out.a.ratings);
      out.b.users = users_with_ratings(out.b.ratings);
      break;
    }
    case Scheme::kTransfer: {
      if (data.n_users() < 2) throw Error(ErrorCode::kTooFewUsers, "transfer needs >= 2 users");
      std::vector<Index> perm(static_cast<std::size_t>(data.n_users()));
      std::iota(perm.begin(), perm.end(), Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      out.plan.user_owner.assign(perm.size(), Party::kB);
      const std::size_t half = perm.size() / 2;
      for (std::size_t k = 0; k < half; ++k) out.plan.user_owner[static_cast<std::size_t>(perm[k])] = Party::kA;
      std::vector<Rating> a, b;
      for (const Rating& r : data.ratings()) {
        (out.plan.user_owner[static_cast<std::size_t>(r.user)] == Party::kA ? a : b).push_back(r);
      }
      out.a.ratings = data.with_ratings(std::move(a));
      out.b.ratings = data.with_ratings(std::move(b));
      for (Index i = 0; i < data.n_users(); ++i) {
        (out.plan.user_owner[static_cast<std::size_t>(i)] == Party::kA ? out.a : out.b)
            .users.push_back(i);
      }
      break;
    }
    case Scheme::kVertical: {
      if (!side) throw Error(ErrorCode::kInvalidArgument, "vertical partition needs side-data config");
      out.a.ratings = data;
      out.a.users = users_with_ratings(data);
      out.b.ratings = data.with_ratings({});
      out.b.side = synthesize_side_data(data.n_users(), data.n_items(), d, *side, seed);
      out.b.users = out.b.side->users();
      break;
    }
  }
  return out;
}

}  // namespace fedmf
