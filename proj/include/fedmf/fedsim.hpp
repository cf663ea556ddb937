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
#ifndef FEDMF_FEDSIM_HPP_
#define FEDMF_FEDSIM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedmf/datasets.hpp"
#include "fedmf/defenses.hpp"
#include "fedmf/mf.hpp"

namespace fedmf {

enum class MinibatchRule {
  /// Every local rating, every round.
  kFull,
  /// Random maximal set in which each user and each item appears at most once.
  kOnePerEntity,
};

std::string_view to_string(MinibatchRule rule);
MinibatchRule parse_minibatch_rule(std::string_view text);

struct FedConfig {
  Index rounds = 10;
  Index local_steps = 1;
  MinibatchRule minibatch = MinibatchRule::kFull;
  Hyperparams hp;
  DefenseConfig defense;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One transmitted or received value.
struct Payload {
  enum class Kind { kPlain, kMasked };

  /// "U", "V" (own submission), "U_global", "V_global", "peer.U", "peer.V"
  /// (a peer submission observed on the wire), "K" (side-information batch).
  std::string tag;
  Kind kind = Kind::kPlain;
  FactorMatrix plain;
  FieldMatrix masked;
  /// Row ids when the payload covers a subset of entities (K batches).
  std::vector<Index> ids;
};

/// Exact equality, shape included.
bool identical(const FactorMatrix& a, const FactorMatrix& b);
bool identical(const Payload& a, const Payload& b);

const Payload* find_payload(std::span<const Payload> payloads, std::string_view tag);

/// Profiles a party holds locally; a matrix the party does not hold is empty.
struct LocalState {
  FactorMatrix users;
  FactorMatrix items;
};

struct PartyRecord {
  /// Ratings the party trained on this round. Ground truth only: never
  /// reachable through a PartyView.
  std::vector<Rating> minibatch;
  LocalState before;
  LocalState after;
  std::vector<Payload> sent;
  std::vector<Payload> received;
};

struct RoundTranscript {
  Index round = 0;
  PartyRecord a;
  PartyRecord b;

  const PartyRecord& party(Party p) const { return p == Party::kA ? a : b; }
  PartyRecord& party(Party p) { return p == Party::kA ? a : b; }
};

struct RunHeader {
  Scheme scheme = Scheme::kHorizontal;
  Index n_users = 0;
  Index n_items = 0;
  FedConfig config;
  /// Vertical: plaintext intersection of A's users and B's side-data users.
  /// Both parties learn it during alignment.
  std::vector<Index> aligned_users;
  /// Vertical: A's users without side data (trained with k_i = 0).
  std::vector<Index> unaligned_users;
};

struct Transcript {
  RunHeader header;
  std::vector<RoundTranscript> rounds;
};

struct FedRunResult {
  /// Horizontal: both hold the final global model. Vertical: model_a is the
  /// recommender's model, model_b is empty. Transfer: each party's own user
  /// rows plus the final shared item matrix.
  MfModel model_a;
  MfModel model_b;
  /// Vertical: k_i rows for aligned users, zero elsewhere.
  FactorMatrix user_offsets;
  Transcript transcript;
};

FedRunResult run_horizontal(const Partition& views, const FedConfig& config);
FedRunResult run_vertical(const Partition& views, const FedConfig& config);
FedRunResult run_transfer(const Partition& views, const FedConfig& config);

/// Dispatches on views.plan.scheme.
FedRunResult run_federated(const Partition& views, const FedConfig& config);

/// |N(u)|^{-1/2} * sum_{l in N(u)} x_l + sum_{a in A(u)} y_a.
Vector compute_k(const VerticalSideData& side, Index user);

/// Selects the round's minibatch from `local` according to `rule`.
RatingStore select_minibatch(const RatingStore& local, MinibatchRule rule, Rng& rng);

/// Test RMSE of a finished run, routing each test rating to the model that
/// serves its user.
double test_rmse(const FedRunResult& run, const Partition& views, const RatingStore& test);

/// What one party can see of a run: its own local states, what it sent, and
/// what it received, plus public protocol parameters. Seeds of the defense
/// are redacted; the peer's records and every minibatch are unreachable.
class PartyView {
 public:
  struct Round {
    Index index;
    const LocalState& before;
    const LocalState& after;
    std::span<const Payload> sent;
    std::span<const Payload> received;
  };

  PartyView(const Transcript& transcript, Party party);

  Party party() const { return party_; }
  Scheme scheme() const { return transcript_->header.scheme; }
  Index n_users() const { return transcript_->header.n_users; }
  Index n_items() const { return transcript_->header.n_items; }
  const Hyperparams& hp() const { return transcript_->header.config.hp; }
  Index local_steps() const { return transcript_->header.config.local_steps; }
  MinibatchRule minibatch_rule() const { return transcript_->header.config.minibatch; }
  DefenseConfig defense() const;
  const std::vector<Index>& aligned_users() const { return transcript_->header.aligned_users; }
  Index n_rounds() const { return static_cast<Index>(transcript_->rounds.size()); }
  Round round(Index t) const;

 private:
  const Transcript* transcript_;
  Party party_;
};

}  // namespace fedmf

#endif  // FEDMF_FEDSIM_HPP_
