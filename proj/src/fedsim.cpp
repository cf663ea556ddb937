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
#include "fedmf/fedsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "fedmf/error.hpp"

namespace fedmf {

std::string_view to_string(MinibatchRule rule) {
  return rule == MinibatchRule::kFull ? "full" : "one_per_entity";
}

MinibatchRule parse_minibatch_rule(std::string_view text) {
  if (text == "full") return MinibatchRule::kFull;
  if (text == "one_per_entity") return MinibatchRule::kOnePerEntity;
  throw Error(ErrorCode::kParseError, "unknown minibatch rule '" + std::string(text) + "'");
}

void FedConfig::validate() const {
  if (rounds < 1) throw Error(ErrorCode::kValidation, "rounds must be >= 1");
  if (local_steps < 1) throw Error(ErrorCode::kValidation, "local_steps must be >= 1");
  try {
    hp.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
  defense.validate();
}

bool identical(const FactorMatrix& a, const FactorMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 || (a.array() == b.array()).all();
}

bool identical(const Payload& a, const Payload& b) {
  if (a.tag != b.tag || a.kind != b.kind || a.ids != b.ids) return false;
  if (a.masked.rows() != b.masked.rows() || a.masked.cols() != b.masked.cols()) return false;
  if (a.masked.size() > 0 && !(a.masked.array() == b.masked.array()).all()) return false;
  return identical(a.plain, b.plain);
}

const Payload* find_payload(std::span<const Payload> payloads, std::string_view tag) {
  for (const Payload& p : payloads)
    if (p.tag == tag) return &p;
  return nullptr;
}

RatingStore select_minibatch(const RatingStore& local, MinibatchRule rule, Rng& rng) {
  if (rule == MinibatchRule::kFull) return local;
  std::vector<std::size_t> order(static_cast<std::size_t>(local.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<char> user_used(static_cast<std::size_t>(local.n_users()), 0);
  std::vector<char> item_used(static_cast<std::size_t>(local.n_items()), 0);
  std::vector<Rating> picked;
  for (std::size_t k : order) {
    const Rating& r = local[static_cast<Index>(k)];
    auto& uu = user_used[static_cast<std::size_t>(r.user)];
    auto& iu = item_used[static_cast<std::size_t>(r.item)];
    if (uu || iu) continue;
    uu = iu = 1;
    picked.push_back(r);
  }
  std::sort(picked.begin(), picked.end(), [](const Rating& x, const Rating& y) {
    return std::pair(x.user, x.item) < std::pair(y.user, y.item);
  });
  return local.with_ratings(std::move(picked));
}

Vector compute_k(const VerticalSideData& side, Index user) {
  auto attrs = side.user_attrs.find(user);
  if (attrs == side.user_attrs.end()) {
    throw Error(ErrorCode::kUnknownUser, "no side data for user " + std::to_string(user));
  }
  const Index d = side.attr_dict.cols();
  Vector k = Vector::Zero(d);
  auto implicit = side.user_implicit.find(user);
  if (implicit != side.user_implicit.end() && !implicit->second.empty()) {
    for (Index l : implicit->second) k += side.implicit_dict.row(l).transpose();
    k /= std::sqrt(static_cast<double>(implicit->second.size()));
  }
  for (Index a : attrs->second) k += side.attr_dict.row(a).transpose();
  return k;
}

namespace {

constexpr std::uint64_t kSlotUsers = 0;
constexpr std::uint64_t kSlotItems = 1;
constexpr std::uint64_t kSlotSide = 2;

std::uint64_t party_index(Party p) { return p == Party::kA ? 0 : 1; }

// The matrix a party hands to the wire for `local`, starting from `prev`.
// Under DP the clipped, noised update is what leaves the party.
FactorMatrix submission(const FactorMatrix& local, const FactorMatrix& prev, Party p, Index round,
                        std::uint64_t slot, const DefenseConfig& defense) {
  if (!defense.adds_noise()) return local;
  Rng rng = make_rng(defense.dp.noise_seed, Stream::kDpNoise,
                     {static_cast<std::uint64_t>(round), party_index(p), slot});
  return prev + dp_transform(local - prev, defense.dp.clip_norm, defense.dp.sigma, rng);
}

struct Aggregated {
  Payload sent_a;
  Payload sent_b;
  FactorMatrix mean;
};

Aggregated aggregate(const std::string& tag, const FactorMatrix& sub_a, const FactorMatrix& sub_b,
                     Index round, std::uint64_t slot, const DefenseConfig& defense) {
  Aggregated out;
  out.sent_a.tag = out.sent_b.tag = tag;
  if (defense.masks()) {
    auto [ma, mb] = mask_pair(sub_a, sub_b, defense.secureagg, round, slot);
    out.mean = masked_mean(ma, mb, defense.secureagg);
    out.sent_a.kind = out.sent_b.kind = Payload::Kind::kMasked;
    out.sent_a.masked = std::move(ma.values);
    out.sent_b.masked = std::move(mb.values);
  } else {
    out.mean = 0.5 * (sub_a + sub_b);
    out.sent_a.plain = sub_a;
    out.sent_b.plain = sub_b;
  }
  return out;
}

Payload global_payload(const std::string& tag, const FactorMatrix& m) {
  Payload p;
  p.tag = tag;
  p.plain = m;
  return p;
}

Payload as_observed(Payload p) {
  p.tag = "peer." + p.tag;
  return p;
}

MfModel train_local(MfModel model, const RatingStore& minibatch, Index steps,
                    const FactorMatrix* offsets) {
  if (minibatch.empty()) return model;
  for (Index s = 0; s < steps; ++s) {
    model = offsets ? sgd_step(model, minibatch, *offsets) : sgd_step(model, minibatch);
  }
  return model;
}

RatingStore round_minibatch(const PartyData& view, const FedConfig& config, Index round, Party p) {
  Rng rng = make_rng(config.seed, Stream::kMinibatch,
                     {static_cast<std::uint64_t>(round), party_index(p)});
  return select_minibatch(view.ratings, config.minibatch, rng);
}

std::vector<Rating> to_vector(const RatingStore& store) {
  return {store.ratings().begin(), store.ratings().end()};
}

void check_scheme(const Partition& views, Scheme expected) {
  if (views.plan.scheme != expected) {
    throw Error(ErrorCode::kInvalidArgument, std::string("partition is ") +
                                                 std::string(to_string(views.plan.scheme)) +
                                                 ", expected " +
                                                 std::string(to_string(expected)));
  }
}

RunHeader make_header(Scheme scheme, const RatingStore& universe, const FedConfig& config) {
  RunHeader h;
  h.scheme = scheme;
  h.n_users = universe.n_users();
  h.n_items = universe.n_items();
  h.config = config;
  return h;
}

}  // namespace

FedRunResult run_horizontal(const Partition& views, const FedConfig& config) {
  check_scheme(views, Scheme::kHorizontal);
  config.validate();
  const RatingStore& ra = views.a.ratings;
  const RatingStore& rb = views.b.ratings;
  if (ra.n_users() != rb.n_users() || ra.n_items() != rb.n_items()) {
    throw Error(ErrorCode::kShapeMismatch, "horizontal views must share the n x m universe");
  }
  FedRunResult out;
  out.transcript.header = make_header(Scheme::kHorizontal, ra, config);
  MfModel global = init_model(ra.n_users(), ra.n_items(), config.hp, config.seed);

  for (Index t = 0; t < config.rounds; ++t) {
    RoundTranscript rec;
    rec.round = t;
    std::array<MfModel, 2> local;
    for (Party p : {Party::kA, Party::kB}) {
      const RatingStore mb = round_minibatch(views.view(p), config, t, p);
      local[party_index(p)] = train_local(global, mb, config.local_steps, nullptr);
      PartyRecord& pr = rec.party(p);
      pr.minibatch = to_vector(mb);
      pr.before = {global.users, global.items};
      pr.after = {local[party_index(p)].users, local[party_index(p)].items};
    }
    const auto sub = [&](Party p, bool users) {
      const MfModel& m = local[party_index(p)];
      return users ? submission(m.users, global.users, p, t, kSlotUsers, config.defense)
                   : submission(m.items, global.items, p, t, kSlotItems, config.defense);
    };
    Aggregated u = aggregate("U", sub(Party::kA, true), sub(Party::kB, true), t, kSlotUsers,
                             config.defense);
    Aggregated v = aggregate("V", sub(Party::kA, false), sub(Party::kB, false), t, kSlotItems,
                             config.defense);
    rec.a.sent = {u.sent_a, v.sent_a};
    rec.b.sent = {u.sent_b, v.sent_b};
    for (Party p : {Party::kA, Party::kB}) {
      auto& received = rec.party(p).received;
      if (config.defense.masks()) {
        received.push_back(as_observed(p == Party::kA ? u.sent_b : u.sent_a));
        received.push_back(as_observed(p == Party::kA ? v.sent_b : v.sent_a));
      }
      received.push_back(global_payload("U_global", u.mean));
      received.push_back(global_payload("V_global", v.mean));
    }
    global.users = std::move(u.mean);
    global.items = std::move(v.mean);
    out.transcript.rounds.push_back(std::move(rec));
  }
  out.model_a = global;
  out.model_b = global;
  return out;
}

FedRunResult run_vertical(const Partition& views, const FedConfig& config) {
  check_scheme(views, Scheme::kVertical);
  config.validate();
  if (!views.b.side) throw Error(ErrorCode::kInvalidArgument, "vertical party B has no side data");
  const VerticalSideData& side = *views.b.side;
  side.validate(config.hp.d);
  const RatingStore& ra = views.a.ratings;

  FedRunResult out;
  RunHeader& header = out.transcript.header;
  header = make_header(Scheme::kVertical, ra, config);
  // Alignment is a plaintext id intersection; its result is public to both.
  for (Index u : views.a.users) {
    (side.has_user(u) ? header.aligned_users : header.unaligned_users).push_back(u);
  }

  MfModel model = init_model(ra.n_users(), ra.n_items(), config.hp, config.seed);
  FactorMatrix offsets = FactorMatrix::Zero(ra.n_users(), config.hp.d);
  for (Index t = 0; t < config.rounds; ++t) {
    RoundTranscript rec;
    rec.round = t;

    FactorMatrix batch(static_cast<Index>(header.aligned_users.size()), config.hp.d);
    for (std::size_t k = 0; k < header.aligned_users.size(); ++k) {
      batch.row(static_cast<Index>(k)) = compute_k(side, header.aligned_users[k]).transpose();
    }
    if (config.defense.adds_noise()) {
      Rng rng = make_rng(config.defense.dp.noise_seed, Stream::kDpNoise,
                         {static_cast<std::uint64_t>(t), party_index(Party::kB), kSlotSide});
      batch = dp_transform(batch, config.defense.dp.clip_norm, config.defense.dp.sigma, rng);
    }
    Payload k_payload;
    k_payload.tag = "K";
    k_payload.plain = batch;
    k_payload.ids = header.aligned_users;
    rec.b.sent.push_back(k_payload);
    rec.a.received.push_back(std::move(k_payload));

    offsets.setZero();
    for (std::size_t k = 0; k < header.aligned_users.size(); ++k) {
      offsets.row(header.aligned_users[k]) = batch.row(static_cast<Index>(k));
    }

    const RatingStore mb = round_minibatch(views.a, config, t, Party::kA);
    MfModel next = train_local(model, mb, config.local_steps, &offsets);
    rec.a.minibatch = to_vector(mb);
    rec.a.before = {model.users, model.items};
    rec.a.after = {next.users, next.items};
    model = std::move(next);
    out.transcript.rounds.push_back(std::move(rec));
  }
  out.model_a = model;
  out.model_b.hp = config.hp;
  out.user_offsets = offsets;
  return out;
}

FedRunResult run_transfer(const Partition& views, const FedConfig& config) {
  check_scheme(views, Scheme::kTransfer);
  config.validate();
  const RatingStore& ra = views.a.ratings;
  const RatingStore& rb = views.b.ratings;
  if (ra.n_items() != rb.n_items()) {
    throw Error(ErrorCode::kShapeMismatch, "transfer views must share the item universe");
  }
  if (ra.n_users() != rb.n_users()) {
    throw Error(ErrorCode::kShapeMismatch, "transfer views must index one user-id space");
  }
  std::set<Index> a_users(views.a.users.begin(), views.a.users.end());
  for (Index u : views.b.users) {
    if (a_users.contains(u)) {
      throw Error(ErrorCode::kInvalidArgument, "transfer user sets overlap at " + std::to_string(u));
    }
  }

  FedRunResult out;
  out.transcript.header = make_header(Scheme::kTransfer, ra, config);
  FactorMatrix shared_items =
      init_model(ra.n_users(), ra.n_items(), config.hp, config.seed).items;
  std::array<FactorMatrix, 2> users;
  for (Party p : {Party::kA, Party::kB}) {
    Rng rng = make_rng(config.seed, Stream::kInit, {1 + party_index(p)});
    FactorMatrix full = init_factors(ra.n_users(), config.hp.d, rng);
    FactorMatrix own = FactorMatrix::Zero(ra.n_users(), config.hp.d);
    for (Index u : views.view(p).users) own.row(u) = full.row(u);
    users[party_index(p)] = std::move(own);
  }

  for (Index t = 0; t < config.rounds; ++t) {
    RoundTranscript rec;
    rec.round = t;
    std::array<MfModel, 2> local;
    for (Party p : {Party::kA, Party::kB}) {
      MfModel start{users[party_index(p)], shared_items, config.hp};
      const RatingStore mb = round_minibatch(views.view(p), config, t, p);
      local[party_index(p)] = train_local(start, mb, config.local_steps, nullptr);
      PartyRecord& pr = rec.party(p);
      pr.minibatch = to_vector(mb);
      pr.before = {start.users, start.items};
      pr.after = {local[party_index(p)].users, local[party_index(p)].items};
    }
    const auto sub = [&](Party p) {
      return submission(local[party_index(p)].items, shared_items, p, t, kSlotItems,
                        config.defense);
    };
    Aggregated v = aggregate("V", sub(Party::kA), sub(Party::kB), t, kSlotItems, config.defense);
    rec.a.sent = {v.sent_a};
    rec.b.sent = {v.sent_b};
    for (Party p : {Party::kA, Party::kB}) {
      auto& received = rec.party(p).received;
      if (config.defense.masks()) received.push_back(as_observed(p == Party::kA ? v.sent_b : v.sent_a));
      received.push_back(global_payload("V_global", v.mean));
      users[party_index(p)] = local[party_index(p)].users;
    }
    shared_items = std::move(v.mean);
    out.transcript.rounds.push_back(std::move(rec));
  }
  out.model_a = MfModel{users[0], shared_items, config.hp};
  out.model_b = MfModel{users[1], shared_items, config.hp};
  return out;
}

FedRunResult run_federated(const Partition& views, const FedConfig& config) {
  switch (views.plan.scheme) {
    case Scheme::kHorizontal: return run_horizontal(views, config);
    case Scheme::kVertical: return run_vertical(views, config);
    case Scheme::kTransfer: return run_transfer(views, config);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme");
}

double test_rmse(const FedRunResult& run, const Partition& views, const RatingStore& test) {
  if (test.empty()) throw Error(ErrorCode::kEmptyDataset, "empty test set");
  switch (views.plan.scheme) {
    case Scheme::kHorizontal: return rmse(run.model_a, test);
    case Scheme::kVertical: return rmse(run.model_a, test, run.user_offsets);
    case Scheme::kTransfer: {
      double sum = 0.0;
      for (const Rating& r : test.ratings()) {
        const Party owner = views.plan.user_owner[static_cast<std::size_t>(r.user)];
        const MfModel& m = owner == Party::kA ? run.model_a : run.model_b;
        const double e = r.value - predict(m, r.user, r.item);
        sum += e * e;
      }
      return std::sqrt(sum / static_cast<double>(test.size()));
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme");
}

PartyView::PartyView(const Transcript& transcript, Party party)
    : transcript_(&transcript), party_(party) {}

DefenseConfig PartyView::defense() const {
  DefenseConfig d = transcript_->header.config.defense;
  d.secureagg.mask_seed = 0;
  d.dp.noise_seed = 0;
  return d;
}

PartyView::Round PartyView::round(Index t) const {
  if (t < 0 || t >= n_rounds()) {
    throw Error(ErrorCode::kIdOutOfRange, "round " + std::to_string(t) + " not in transcript");
  }
  const PartyRecord& pr = transcript_->rounds[static_cast<std::size_t>(t)].party(party_);
  return {transcript_->rounds[static_cast<std::size_t>(t)].round, pr.before, pr.after, pr.sent,
          pr.received};
}

}  // namespace fedmf
