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
#ifndef FEDMF_ATTACKS_HPP_
#define FEDMF_ATTACKS_HPP_

// Honest-but-curious inference attacks. Everything here except score()
// consumes a PartyView, i.e. only what the attacking party legitimately saw.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmf/datasets.hpp"
#include "fedmf/fedsim.hpp"
#include "fedmf/mf.hpp"

namespace fedmf {

struct AttackOptions {
  /// A submitted row counts as untouched when it moved by at most
  /// zero_tol * (1 + |previous row|).
  double zero_tol = 1e-12;
  /// Rounds used by the transfer attack, ending at the last round.
  Index transfer_window = 5;
  /// Transfer: an item is attacked only if every windowed gradient is
  /// parallel to the first one, |cos| >= 1 - direction_tol.
  double direction_tol = 1e-6;
  Index max_iters = 200;
  double step_tol = 1e-13;
  /// Public rating scale used to resolve the sign of a recovered profile.
  RatingRange rating_range{0.0, std::numeric_limits<double>::infinity()};
  /// Ratings within this distance of the truth count as exact.
  double exact_tolerance = 1e-3;
};

struct RecoveredGradients {
  FactorMatrix users;
  FactorMatrix items;
  /// Set when the exact-recovery premise does not hold (defended transcript,
  /// several local steps).
  bool approximate = false;
};

/// 2 * global - own submission: the peer's plaintext submission.
FactorMatrix peer_submission(const FactorMatrix& global, const FactorMatrix& own_submission);

/// Inverts prev -> prev - gamma * (grad + 2 * lambda * prev) row by row.
/// Untouched rows map to zero.
FactorMatrix invert_sgd_update(const FactorMatrix& prev, const FactorMatrix& submitted,
                               double gamma, double lambda, double zero_tol = 1e-12);

/// Peer's data-fit gradients for round t of a horizontal run. On a masked
/// transcript the observed masked submission is decoded as if it were
/// plaintext; the result is flagged approximate.
RecoveredGradients recover_gradient_h(const PartyView& view, Index round,
                                      const AttackOptions& options = {});

/// Item-gradient analogue for the shared item matrix of a transfer run.
RecoveredGradients recover_item_gradient_t(const PartyView& view, Index round,
                                           const AttackOptions& options = {});

struct PairHypothesis {
  Index user = 0;
  Index item = 0;
  /// |cos| between the user gradient row and the chosen item profile.
  double confidence = 0.0;
};

/// A user gradient from a single rating is parallel to the rated item's
/// profile; the item gradient is parallel to the user's profile. A pair is
/// kept only when both argmax-|cos| matches agree.
std::vector<PairHypothesis> identify_pairs(const FactorMatrix& grad_users,
                                           const FactorMatrix& grad_items,
                                           const FactorMatrix& users, const FactorMatrix& items);

/// r = -(g . v) / (2 |v|^2) + <u, v>.
double reconstruct_rating_h(const Vector& grad_user, const Vector& user, const Vector& item,
                            double eps = 1e-12);

struct ProfileFit {
  Vector profile;
  double rating = 0.0;
  Index iterations = 0;
  /// Root mean squared misfit of the stacked gradient model.
  double misfit = 0.0;
};

/// Fits g_t = -2 u (r - <u, v_t>) over the window by damped Gauss-Newton in
/// (u, r). nullopt when the iteration does not settle within max_iters.
std::optional<ProfileFit> fit_profile(std::span<const Vector> grads,
                                      std::span<const Vector> item_profiles,
                                      const AttackOptions& options = {});

struct TransferHypothesis {
  Index item = 0;
  Vector profile;
  double rating = 0.0;
  double confidence = 0.0;
  Index iterations = 0;
};

struct TransferAttackResult {
  std::vector<TransferHypothesis> hypotheses;
  /// Items with a nonzero peer gradient in the window that yielded no
  /// hypothesis (direction test failed or the fit did not converge).
  Index dropped = 0;
  bool approximate = false;
};

TransferAttackResult attack_transfer(const PartyView& view, Index first_round, Index last_round,
                                     const AttackOptions& options = {});

struct ObservedK {
  Index round = 0;
  std::vector<Index> users;
  FactorMatrix k;
};

struct VerticalLedger {
  Party attacker = Party::kA;
  /// User ids learned through alignment.
  std::vector<Index> aligned_users;
  /// Every side-information batch the attacker received.
  std::vector<ObservedK> observed_k;
  /// Everything the attacker itself transmitted, i.e. all its peer can learn.
  std::vector<Payload> peer_learns;
};

VerticalLedger audit_vertical(const PartyView& view);

struct InversionOptions {
  Index max_atoms = 8;
  double residual_tol = 1e-8;
  /// Atoms whose least-squares coefficient falls below this are discarded.
  double min_coefficient = 0.5;
};

/// Beyond the honest-but-curious baseline: assumes the attacker also knows
/// the attribute dictionary. Decomposes each leaked k_i into dictionary atoms
/// by orthogonal matching pursuit.
std::map<Index, std::vector<Index>> attribute_inversion(const VerticalLedger& ledger,
                                                        const FactorMatrix& attr_dict,
                                                        const InversionOptions& options = {});

struct InversionScore {
  double precision = 0.0;
  double recall = 0.0;
};

InversionScore score_attribute_inversion(const std::map<Index, std::vector<Index>>& inferred,
                                         const VerticalSideData& side);

// -- Full attack runs and scoring ---------------------------------------------------

struct InferredRating {
  Index round = 0;
  /// -1 when the attacker cannot name the user (transfer).
  Index user = -1;
  Index item = 0;
  double r_hat = 0.0;
  double confidence = 0.0;
  Vector profile;  // recovered user profile, transfer only
};

struct AttackOutput {
  Scheme scheme = Scheme::kHorizontal;
  Party attacker = Party::kA;
  bool approximate = false;
  std::vector<Index> attacked_rounds;
  std::vector<InferredRating> inferred;
  std::vector<Index> id_leakage;
  Index dropped = 0;
};

/// Horizontal pipeline over every round: recover, identify, reconstruct.
AttackOutput attack_horizontal(const PartyView& view, const AttackOptions& options = {});

/// Runs the attack matching the view's scheme.
AttackOutput run_attack(const PartyView& view, const AttackOptions& options = {});

struct ScoredRating {
  InferredRating inferred;
  std::optional<Index> true_user;
  std::optional<double> r_true;
  std::optional<double> profile_cosine;
};

struct AttackReport {
  Scheme scheme = Scheme::kHorizontal;
  Party attacker = Party::kA;
  bool approximate = false;
  std::vector<Index> attacked_rounds;
  std::vector<ScoredRating> rows;
  /// Distinct victim ratings in the attacked rounds.
  Index n_truth = 0;
  Index n_matched = 0;
  Index n_false = 0;
  double coverage = 0.0;
  /// Mean |r_hat - r| over matched rows; NaN when nothing matched.
  double rating_mae = std::numeric_limits<double>::quiet_NaN();
  double exact_rate = 0.0;
  /// Mean |cos(u_hat, u)| over matched transfer rows; NaN otherwise.
  double profile_cosine = std::numeric_limits<double>::quiet_NaN();
  std::vector<Index> id_leakage;
  Index dropped = 0;
};

/// Scores an attack against the transcript's ground-truth minibatches.
AttackReport score(const AttackOutput& output, const Transcript& truth,
                   double exact_tolerance = 1e-3);

std::string report_text(const AttackReport& report);
/// round,user,item,r_true,r_hat,abs_err,confidence
std::string report_csv(const AttackReport& report);

}  // namespace fedmf

#endif  // FEDMF_ATTACKS_HPP_
