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
#ifndef FEDMF_DATASETS_HPP_
#define FEDMF_DATASETS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedmf/mf.hpp"
#include "fedmf/ratings.hpp"

namespace fedmf {

enum class Scheme { kHorizontal, kVertical, kTransfer };
enum class Party { kA, kB };

std::string_view to_string(Scheme scheme);
std::string_view to_string(Party party);
Scheme parse_scheme(std::string_view text);
Party parse_party(std::string_view text);
inline Party peer(Party p) { return p == Party::kA ? Party::kB : Party::kA; }

struct RatingRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Generating factors of a synthetic store, kept so attacks can be scored
/// against known truth.
struct GroundTruth {
  FactorMatrix true_users;
  FactorMatrix true_items;
  double noise_sigma = 0.0;
  std::optional<RatingRange> rating_clip;

  MfModel as_model(const Hyperparams& hp) const { return MfModel{true_users, true_items, hp}; }
};

struct SyntheticData {
  RatingStore store;
  GroundTruth truth;
};

/// Samples floor(density*n*m) distinct pairs with r = <u_i, v_j> + N(0, sigma).
/// True profiles are uniform in [0, sqrt(10/d)] so mean ratings sit near 2.5.
/// Every user and item keeps at least one rating.
SyntheticData gen_synthetic(Index n, Index m, Index d, double density, double noise_sigma,
                            std::uint64_t seed, std::optional<RatingRange> clip = std::nullopt);

/// Dense 0-based remapping of the external ids found in a ratings file.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(std::vector<std::int64_t> external);

  Index size() const { return static_cast<Index>(external_.size()); }
  std::int64_t external(Index internal) const { return external_[static_cast<std::size_t>(internal)]; }
  std::optional<Index> internal(std::int64_t external) const;
  const std::vector<std::int64_t>& externals() const { return external_; }

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.external_ == b.external_; }

 private:
  std::vector<std::int64_t> external_;
  std::unordered_map<std::int64_t, Index> internal_;
};

struct LoadedRatings {
  RatingStore store;
  IdMap users;
  IdMap items;
};

/// Reads tab-separated "user item rating timestamp" lines. Ids are remapped
/// in ascending external order; a repeated pair keeps its last rating.
LoadedRatings load_movielens(const std::filesystem::path& path);

/// Same, with ids resolved through previously persisted maps.
LoadedRatings load_movielens(const std::filesystem::path& path, const IdMap& users,
                             const IdMap& items);

void write_movielens(const RatingStore& store, const IdMap& users, const IdMap& items,
                     const std::filesystem::path& path);

/// Sidecar format: one "external_id<TAB>internal_id" line per entity.
void write_id_map(const IdMap& map, const std::filesystem::path& path);
IdMap read_id_map(const std::filesystem::path& path);

/// Identity map 1..n, used when a synthetic store is written to disk.
IdMap identity_id_map(Index n);

struct TrainTest {
  RatingStore train;
  RatingStore test;
};

/// Uniform random split. A rating that would leave its user or item without
/// any training observation stays in train, so |test| <= floor(f*M).
TrainTest split(const RatingStore& data, double test_fraction, std::uint64_t seed);

// -- Vertical side information -------------------------------------------------

struct SideDataConfig {
  Index n_attrs = 20;
  Index attrs_per_user = 2;
  Index implicit_per_user = 0;
  /// Fraction of users the side-data provider knows about.
  double coverage = 1.0;
  /// Dictionary entries are uniform in [-scale/sqrt(d), scale/sqrt(d)].
  double factor_scale = 1.0;

  void validate(Index n_items) const;
};

/// Attribute factors y_a and implicit-item factors x_l held by the side-data
/// party, plus per-user attribute sets A(u) and implicit sets N(u).
struct VerticalSideData {
  FactorMatrix attr_dict;
  FactorMatrix implicit_dict;
  std::map<Index, std::vector<Index>> user_attrs;
  std::map<Index, std::vector<Index>> user_implicit;

  bool has_user(Index user) const { return user_attrs.contains(user); }
  std::vector<Index> users() const;
  void validate(Index d) const;
};

VerticalSideData synthesize_side_data(Index n_users, Index n_items, Index d,
                                      const SideDataConfig& config, std::uint64_t seed);

// -- Partitioning --------------------------------------------------------------

struct PartyData {
  RatingStore ratings;
  /// Users this party holds data for (ascending).
  std::vector<Index> users;
  std::optional<VerticalSideData> side;
};

struct PartitionPlan {
  Scheme scheme = Scheme::kHorizontal;
  /// Horizontal: owner of each input rating, indexed like the input store.
  std::vector<Party> rating_owner;
  /// Transfer: owner of each user id.
  std::vector<Party> user_owner;
};

struct Partition {
  PartitionPlan plan;
  PartyData a;
  PartyData b;

  const PartyData& view(Party p) const { return p == Party::kA ? a : b; }
};

/// Splits `data` between two parties. Vertical needs `side` and the model
/// width `d` for the synthesized dictionaries.
Partition partition(const RatingStore& data, Scheme scheme, std::uint64_t seed,
                    std::optional<SideDataConfig> side = std::nullopt, Index d = 0);

}  // namespace fedmf

#endif  // FEDMF_DATASETS_HPP_
