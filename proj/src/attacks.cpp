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
#include "fedmf/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "fedmf/defenses.hpp"
#include "fedmf/error.hpp"
#include "fedmf/io.hpp"

namespace fedmf {

FactorMatrix peer_submission(const FactorMatrix& global, const FactorMatrix& own_submission) {
  if (global.rows() != own_submission.rows() || global.cols() != own_submission.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "global and own submission differ in shape");
  }
  return 2.0 * global - own_submission;
}

FactorMatrix invert_sgd_update(const FactorMatrix& prev, const FactorMatrix& submitted,
                               double gamma, double lambda, double zero_tol) {
  if (prev.rows() != submitted.rows() || prev.cols() != submitted.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "previous and submitted matrices differ in shape");
  }
  FactorMatrix grad = FactorMatrix::Zero(prev.rows(), prev.cols());
  for (Index r = 0; r < prev.rows(); ++r) {
    const auto diff = (prev.row(r) - submitted.row(r)).eval();
    if (diff.norm() <= zero_tol * (1.0 + prev.row(r).norm())) continue;
    grad.row(r) = diff / gamma - 2.0 * lambda * prev.row(r);
  }
  return grad;
}

namespace {

void require_scheme(const PartyView& view, Scheme scheme) {
  if (view.scheme() != scheme) {
    throw Error(ErrorCode::kInvalidArgument,
                "attack expects a " + std::string(to_string(scheme)) + " transcript, got " +
                    std::string(to_string(view.scheme())));
  }
}

const Payload& require_payload(std::span<const Payload> payloads, std::string_view tag,
                               Index round) {
  const Payload* p = find_payload(payloads, tag);
  if (p == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "round " + std::to_string(round) + " has no '" + std::string(tag) + "' payload");
  }
  return *p;
}

// What the attacker reconstructs as the peer's submission of matrix `name`.
FactorMatrix observed_peer_matrix(const PartyView& view, const PartyView::Round& r,
                                  const std::string& name) {
  const DefenseConfig defense = view.defense();
  if (defense.masks()) {
    const Payload& masked = require_payload(r.received, "peer." + name, r.index);
    return fixedpoint_decode(masked.masked, defense.secureagg.frac_bits,
                             defense.secureagg.field_bits);
  }
  const Payload& global = require_payload(r.received, name + "_global", r.index);
  const Payload& own = require_payload(r.sent, name, r.index);
  return peer_submission(global.plain, own.plain);
}

bool premise_broken(const PartyView& view) {
  const DefenseConfig d = view.defense();
  return d.masks() || d.adds_noise() || view.local_steps() != 1;
}

double abs_cosine(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(a.dot(b)) / (na * nb);
}

// Index of the row of `rows` with the largest |cos| against `g`; -1 if none.
std::pair<Index, double> best_match(const Vector& g, const FactorMatrix& rows) {
  Index best = -1;
  double best_cos = -1.0;
  for (Index k = 0; k < rows.rows(); ++k) {
    const double c = abs_cosine(g, rows.row(k).transpose());
    if (c > best_cos) {
      best_cos = c;
      best = k;
    }
  }
  return {best, best_cos};
}

}  // namespace

RecoveredGradients recover_gradient_h(const PartyView& view, Index round,
                                      const AttackOptions& options) {
  require_scheme(view, Scheme::kHorizontal);
  const PartyView::Round r = view.round(round);
  const Hyperparams& hp = view.hp();
  RecoveredGradients out;
  out.users = invert_sgd_update(r.before.users, observed_peer_matrix(view, r, "U"), hp.gamma,
                                hp.lambda_u, options.zero_tol);
  out.items = invert_sgd_update(r.before.items, observed_peer_matrix(view, r, "V"), hp.gamma,
                                hp.lambda_v, options.zero_tol);
  out.approximate = premise_broken(view);
  return out;
}

RecoveredGradients recover_item_gradient_t(const PartyView& view, Index round,
                                           const AttackOptions& options) {
  require_scheme(view, Scheme::kTransfer);
  const PartyView::Round r = view.round(round);
  RecoveredGradients out;
  out.items = invert_sgd_update(r.before.items, observed_peer_matrix(view, r, "V"),
                                view.hp().gamma, view.hp().lambda_v, options.zero_tol);
  out.approximate = premise_broken(view);
  return out;
}

std::vector<PairHypothesis> identify_pairs(const FactorMatrix& grad_users,
                                           const FactorMatrix& grad_items,
                                           const FactorMatrix& users, const FactorMatrix& items) {
  if (grad_users.rows() != users.rows() || grad_items.rows() != items.rows() ||
      grad_users.cols() != items.cols() || grad_items.cols() != users.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "gradients and profiles differ in shape");
  }
  std::vector<PairHypothesis> out;
  for (Index i = 0; i < grad_users.rows(); ++i) {
    const Vector gu = grad_users.row(i).transpose();
    if (gu.squaredNorm() == 0.0) continue;
    const auto [j, cos_ij] = best_match(gu, items);
    if (j < 0) continue;
    const Vector gv = grad_items.row(j).transpose();
    if (gv.squaredNorm() == 0.0) continue;
    if (best_match(gv, users).first != i) continue;
    out.push_back({i, j, cos_ij});
  }
  return out;
}

double reconstruct_rating_h(const Vector& grad_user, const Vector& user, const Vector& item,
                            double eps) {
  const double vv = item.squaredNorm();
  if (vv < eps * eps) throw Error(ErrorCode::kDegenerateProfile, "item profile is ~0");
  const double residual = -grad_user.dot(item) / (2.0 * vv);
  return residual + user.dot(item);
}

std::optional<ProfileFit> fit_profile(std::span<const Vector> grads,
                                      std::span<const Vector> item_profiles,
                                      const AttackOptions& options) {
  if (grads.size() != item_profiles.size() || grads.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "need one item profile per gradient");
  }
  if (grads.size() < 2) throw Error(ErrorCode::kInsufficientRounds, "need >= 2 rounds");
  const Index d = grads.front().size();
  const auto k_rounds = static_cast<Index>(grads.size());
  const double g1 = grads.front().norm();
  if (g1 == 0.0) return std::nullopt;

  // Unknowns theta = (u, r); model f_t = -2 u (r - <u, v_t>). Residuals are
  // divided by the largest observed gradient so tolerances are scale-free.
  double g_scale = 0.0;
  for (const Vector& g : grads) g_scale = std::max(g_scale, g.norm());
  const double inv_scale = 1.0 / g_scale;
  Vector theta(d + 1);
  theta.head(d) = -grads.front() / g1 * std::sqrt(g1 / 2.0);
  {
    const Vector u0 = theta.head(d);
    theta(d) = -grads.front().dot(u0) / (2.0 * u0.squaredNorm()) + u0.dot(item_profiles.front());
  }
  // With u = a * dir the projected model p_t = -2 a r + 2 a^2 <dir, v_t> is
  // linear in (a r, a^2). When that solve is well posed it replaces the
  // magnitude guess above.
  {
    const Vector dir = grads.front() / g1;
    Eigen::MatrixXd design(k_rounds, 2);
    Vector p(k_rounds);
    for (Index t = 0; t < k_rounds; ++t) {
      design(t, 0) = -2.0;
      design(t, 1) = 2.0 * dir.dot(item_profiles[static_cast<std::size_t>(t)]);
      p(t) = grads[static_cast<std::size_t>(t)].dot(dir);
    }
    const Eigen::Vector2d ab = design.colPivHouseholderQr().solve(p);
    if (std::isfinite(ab(0)) && std::isfinite(ab(1)) && ab(1) > 0.0) {
      const double a = std::sqrt(ab(1));
      theta.head(d) = a * dir;
      theta(d) = ab(0) / a;
    }
  }

  const auto residuals = [&](const Vector& th) {
    Vector res(k_rounds * d);
    const Vector u = th.head(d);
    for (Index t = 0; t < k_rounds; ++t) {
      const Vector& v = item_profiles[static_cast<std::size_t>(t)];
      res.segment(t * d, d) =
          inv_scale * (-2.0 * u * (th(d) - u.dot(v)) - grads[static_cast<std::size_t>(t)]);
    }
    return res;
  };

  Vector res = residuals(theta);
  double cost = res.squaredNorm();
  double mu = 1e-3;
  Eigen::MatrixXd jac(k_rounds * d, d + 1);
  for (Index it = 1; it <= options.max_iters; ++it) {
    const Vector u = theta.head(d);
    const double r = theta(d);
    for (Index t = 0; t < k_rounds; ++t) {
      const Vector& v = item_profiles[static_cast<std::size_t>(t)];
      jac.block(t * d, 0, d, d) =
          inv_scale *
          (-2.0 * (r - u.dot(v)) * Eigen::MatrixXd::Identity(d, d) + 2.0 * u * v.transpose());
      jac.block(t * d, d, d, 1) = -2.0 * inv_scale * u;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Vector jtr = jac.transpose() * res;
    bool accepted = false;
    Vector step;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
      step = damped.ldlt().solve(-jtr);
      const Vector candidate = theta + step;
      const Vector cand_res = residuals(candidate);
      const double cand_cost = cand_res.squaredNorm();
      if (std::isfinite(cand_cost) && cand_cost <= cost) {
        theta = candidate;
        res = cand_res;
        const double prev_cost = cost;
        cost = cand_cost;
        mu = std::max(mu / 10.0, 1e-15);
        accepted = true;
        const bool small_step = step.norm() <= options.step_tol * (1.0 + theta.norm());
        const bool flat = prev_cost - cost <= 1e-15 * prev_cost;
        if (small_step || flat) {
          return ProfileFit{theta.head(d), theta(d), it,
                            g_scale * std::sqrt(cost / static_cast<double>(k_rounds * d))};
        }
      } else {
        mu *= 10.0;
      }
    }
    if (!accepted) {
      // No descent direction left: the current point is a stationary point.
      return ProfileFit{theta.head(d), theta(d), it,
                        g_scale * std::sqrt(cost / static_cast<double>(k_rounds * d))};
    }
  }
  return std::nullopt;
}

TransferAttackResult attack_transfer(const PartyView& view, Index first_round, Index last_round,
                                     const AttackOptions& options) {
  require_scheme(view, Scheme::kTransfer);
  if (last_round - first_round + 1 < 2) {
    throw Error(ErrorCode::kInsufficientRounds, "transfer attack needs a window of >= 2 rounds");
  }
  if (first_round < 0 || last_round >= view.n_rounds()) {
    throw Error(ErrorCode::kIdOutOfRange, "attack window outside transcript");
  }
  std::vector<FactorMatrix> grads, prev_items;
  TransferAttackResult out;
  for (Index t = first_round; t <= last_round; ++t) {
    RecoveredGradients g = recover_item_gradient_t(view, t, options);
    out.approximate = out.approximate || g.approximate;
    grads.push_back(std::move(g.items));
    prev_items.push_back(view.round(t).before.items);
  }
  const Index n_items = grads.front().rows();
  const std::size_t k = grads.size();
  for (Index j = 0; j < n_items; ++j) {
    std::vector<Vector> gj, vj;
    bool active = true, any = false;
    for (std::size_t t = 0; t < k; ++t) {
      gj.push_back(grads[t].row(j).transpose());
      vj.push_back(prev_items[t].row(j).transpose());
      const bool nonzero = gj.back().squaredNorm() > 0.0;
      active = active && nonzero;
      any = any || nonzero;
    }
    if (!any) continue;
    if (!active) {
      ++out.dropped;
      continue;
    }
    double min_cos = 1.0;
    for (std::size_t t = 1; t < k; ++t) min_cos = std::min(min_cos, abs_cosine(gj[t], gj[0]));
    if (min_cos < 1.0 - options.direction_tol) {
      ++out.dropped;
      continue;
    }
    auto fit = fit_profile(gj, vj, options);
    if (!fit) {
      ++out.dropped;
      continue;
    }
    // (u, r) and (-u, -r) explain the gradients equally well; keep the sign
    // whose rating lands on the public scale, or both if that is ambiguous.
    const double r_plus = reconstruct_rating_h(gj.back(), fit->profile, vj.back());
    const auto in_range = [&](double r) {
      return r >= options.rating_range.lo && r <= options.rating_range.hi;
    };
    const bool plus_ok = in_range(r_plus), minus_ok = in_range(-r_plus);
    if (plus_ok != minus_ok) {
      const double s = plus_ok ? 1.0 : -1.0;
      out.hypotheses.push_back({j, s * fit->profile, s * r_plus, min_cos, fit->iterations});
    } else {
      out.hypotheses.push_back({j, fit->profile, r_plus, min_cos, fit->iterations});
      out.hypotheses.push_back({j, -fit->profile, -r_plus, min_cos, fit->iterations});
    }
  }
  return out;
}

VerticalLedger audit_vertical(const PartyView& view) {
  require_scheme(view, Scheme::kVertical);
  VerticalLedger ledger;
  ledger.attacker = view.party();
  ledger.aligned_users = view.aligned_users();
  for (Index t = 0; t < view.n_rounds(); ++t) {
    const PartyView::Round r = view.round(t);
    for (const Payload& p : r.received) {
      if (p.tag == "K") ledger.observed_k.push_back({r.index, p.ids, p.plain});
    }
    for (const Payload& p : r.sent) ledger.peer_learns.push_back(p);
  }
  return ledger;
}

std::map<Index, std::vector<Index>> attribute_inversion(const VerticalLedger& ledger,
                                                        const FactorMatrix& attr_dict,
                                                        const InversionOptions& options) {
  std::map<Index, std::vector<Index>> out;
  if (ledger.observed_k.empty()) return out;
  const ObservedK& batch = ledger.observed_k.back();
  if (batch.k.rows() > 0 && batch.k.cols() != attr_dict.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "attribute dictionary width differs from k_i");
  }
  const Index n_atoms = attr_dict.rows();
  Eigen::VectorXd atom_norm(n_atoms);
  for (Index a = 0; a < n_atoms; ++a) atom_norm(a) = attr_dict.row(a).norm();

  for (std::size_t idx = 0; idx < batch.users.size(); ++idx) {
    const Vector k = batch.k.row(static_cast<Index>(idx)).transpose();
    std::vector<Index> support;
    Vector coef;
    Vector residual = k;
    const double stop = options.residual_tol * std::max(1.0, k.norm());
    while (residual.norm() > stop && static_cast<Index>(support.size()) < options.max_atoms &&
           static_cast<Index>(support.size()) < n_atoms) {
      Index best = -1;
      double best_score = 0.0;
      for (Index a = 0; a < n_atoms; ++a) {
        if (atom_norm(a) == 0.0 || std::find(support.begin(), support.end(), a) != support.end()) {
          continue;
        }
        const double s = std::abs(attr_dict.row(a).dot(residual)) / atom_norm(a);
        if (s > best_score) {
          best_score = s;
          best = a;
        }
      }
      if (best < 0) break;
      support.push_back(best);
      Eigen::MatrixXd basis(k.size(), static_cast<Index>(support.size()));
      for (std::size_t s = 0; s < support.size(); ++s) {
        basis.col(static_cast<Index>(s)) = attr_dict.row(support[s]).transpose();
      }
      coef = basis.colPivHouseholderQr().solve(k);
      residual = k - basis * coef;
    }
    std::vector<Index> kept;
    for (std::size_t s = 0; s < support.size(); ++s) {
      if (coef(static_cast<Index>(s)) >= options.min_coefficient) kept.push_back(support[s]);
    }
    std::sort(kept.begin(), kept.end());
    out[batch.users[idx]] = std::move(kept);
  }
  return out;
}

InversionScore score_attribute_inversion(const std::map<Index, std::vector<Index>>& inferred,
                                         const VerticalSideData& side) {
  double precision = 0.0, recall = 0.0;
  Index n = 0;
  for (const auto& [user, guess] : inferred) {
    auto it = side.user_attrs.find(user);
    if (it == side.user_attrs.end()) continue;
    const std::set<Index> truth(it->second.begin(), it->second.end());
    Index hit = 0;
    for (Index a : guess) hit += truth.contains(a) ? 1 : 0;
    precision += guess.empty() ? (truth.empty() ? 1.0 : 0.0)
                               : static_cast<double>(hit) / static_cast<double>(guess.size());
    recall += truth.empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
    ++n;
  }
  if (n == 0) return {};
  return {precision / static_cast<double>(n), recall / static_cast<double>(n)};
}

AttackOutput attack_horizontal(const PartyView& view, const AttackOptions& options) {
  require_scheme(view, Scheme::kHorizontal);
  AttackOutput out;
  out.scheme = view.scheme();
  out.attacker = view.party();
  out.approximate = premise_broken(view) || view.minibatch_rule() != MinibatchRule::kOnePerEntity;
  std::set<Index> users;
  for (Index t = 0; t < view.n_rounds(); ++t) {
    out.attacked_rounds.push_back(t);
    const RecoveredGradients g = recover_gradient_h(view, t, options);
    const PartyView::Round r = view.round(t);
    for (const PairHypothesis& h : identify_pairs(g.users, g.items, r.before.users, r.before.items)) {
      const Vector v = r.before.items.row(h.item).transpose();
      if (v.squaredNorm() == 0.0) {
        ++out.dropped;
        continue;
      }
      const double r_hat = reconstruct_rating_h(g.users.row(h.user).transpose(),
                                                r.before.users.row(h.user).transpose(), v);
      out.inferred.push_back({t, h.user, h.item, r_hat, h.confidence, {}});
      users.insert(h.user);
    }
  }
  out.id_leakage.assign(users.begin(), users.end());
  return out;
}

AttackOutput run_attack(const PartyView& view, const AttackOptions& options) {
  switch (view.scheme()) {
    case Scheme::kHorizontal: return attack_horizontal(view, options);
    case Scheme::kTransfer: {
      AttackOutput out;
      out.scheme = Scheme::kTransfer;
      out.attacker = view.party();
      const Index last = view.n_rounds() - 1;
      const Index first = std::max<Index>(0, last - options.transfer_window + 1);
      TransferAttackResult res = attack_transfer(view, first, last, options);
      out.approximate = res.approximate || view.local_steps() != 1;
      out.dropped = res.dropped;
      for (Index t = first; t <= last; ++t) out.attacked_rounds.push_back(t);
      for (TransferHypothesis& h : res.hypotheses) {
        out.inferred.push_back({last, -1, h.item, h.rating, h.confidence, std::move(h.profile)});
      }
      return out;
    }
    case Scheme::kVertical: {
      AttackOutput out;
      out.scheme = Scheme::kVertical;
      out.attacker = view.party();
      out.id_leakage = audit_vertical(view).aligned_users;
      return out;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scheme");
}

AttackReport score(const AttackOutput& output, const Transcript& truth, double exact_tolerance) {
  AttackReport rep;
  rep.scheme = output.scheme;
  rep.attacker = output.attacker;
  rep.approximate = output.approximate;
  rep.attacked_rounds = output.attacked_rounds;
  rep.dropped = output.dropped;
  const Party victim = peer(output.attacker);

  // Victim ratings in the attacked rounds, keyed (round, user, item) for
  // horizontal and (user, item) for transfer.
  std::map<std::tuple<Index, Index, Index>, double> truth_h;
  std::map<std::pair<Index, Index>, double> truth_t;
  for (Index t : output.attacked_rounds) {
    if (t < 0 || t >= static_cast<Index>(truth.rounds.size())) {
      throw Error(ErrorCode::kIdOutOfRange, "attacked round outside transcript");
    }
    for (const Rating& r : truth.rounds[static_cast<std::size_t>(t)].party(victim).minibatch) {
      if (output.scheme == Scheme::kTransfer) {
        truth_t[{r.user, r.item}] = r.value;
      } else {
        truth_h[{t, r.user, r.item}] = r.value;
      }
    }
  }
  rep.n_truth = static_cast<Index>(output.scheme == Scheme::kTransfer ? truth_t.size() : truth_h.size());

  std::set<std::tuple<Index, Index, Index>> matched_keys;
  std::set<Index> leaked;
  double abs_sum = 0.0, cos_sum = 0.0;
  Index n_err = 0, n_cos = 0, n_exact = 0;
  for (const InferredRating& inf : output.inferred) {
    ScoredRating row{inf, std::nullopt, std::nullopt, std::nullopt};
    if (output.scheme == Scheme::kTransfer) {
      const auto& victim_users =
          truth.rounds[static_cast<std::size_t>(inf.round)].party(victim).before.users;
      double best = -1.0;
      for (const auto& [key, value] : truth_t) {
        if (key.second != inf.item) continue;
        const double c = abs_cosine(inf.profile, victim_users.row(key.first).transpose());
        if (c > best) {
          best = c;
          row.true_user = key.first;
          row.r_true = value;
          row.profile_cosine = c;
        }
      }
      if (row.true_user) matched_keys.insert({0, *row.true_user, inf.item});
    } else {
      auto it = truth_h.find({inf.round, inf.user, inf.item});
      if (it != truth_h.end()) {
        row.true_user = inf.user;
        row.r_true = it->second;
        matched_keys.insert(it->first);
        leaked.insert(inf.user);
      }
    }
    if (row.r_true) {
      const double err = std::abs(inf.r_hat - *row.r_true);
      abs_sum += err;
      ++n_err;
      if (err < exact_tolerance) ++n_exact;
      if (row.profile_cosine) {
        cos_sum += *row.profile_cosine;
        ++n_cos;
      }
    } else {
      ++rep.n_false;
    }
    rep.rows.push_back(std::move(row));
  }
  rep.n_matched = static_cast<Index>(matched_keys.size());
  rep.coverage = rep.n_truth > 0 ? static_cast<double>(rep.n_matched) / static_cast<double>(rep.n_truth)
                                 : 0.0;
  if (n_err > 0) rep.rating_mae = abs_sum / static_cast<double>(n_err);
  if (n_cos > 0) rep.profile_cosine = cos_sum / static_cast<double>(n_cos);
  rep.exact_rate = output.inferred.empty()
                       ? 0.0
                       : static_cast<double>(n_exact) / static_cast<double>(output.inferred.size());
  switch (output.scheme) {
    case Scheme::kHorizontal: rep.id_leakage.assign(leaked.begin(), leaked.end()); break;
    case Scheme::kVertical: rep.id_leakage = output.id_leakage; break;
    case Scheme::kTransfer: break;
  }
  return rep;
}

std::string report_text(const AttackReport& r) {
  std::ostringstream out;
  out << "fedmf-attack-report 1\n";
  out << "scheme " << to_string(r.scheme) << "\n";
  out << "attacker " << to_string(r.attacker) << "\n";
  out << "approximate " << (r.approximate ? "true" : "false") << "\n";
  out << "attacked_rounds " << r.attacked_rounds.size();
  for (Index t : r.attacked_rounds) out << ' ' << t;
  out << "\n";
  out << "n_truth " << r.n_truth << "\n";
  out << "n_inferred " << r.rows.size() << "\n";
  out << "n_matched " << r.n_matched << "\n";
  out << "n_false " << r.n_false << "\n";
  out << "dropped " << r.dropped << "\n";
  out << "coverage " << format_double(r.coverage) << "\n";
  out << "rating_mae " << format_double(r.rating_mae) << "\n";
  out << "exact_rate " << format_double(r.exact_rate) << "\n";
  out << "profile_cosine " << format_double(r.profile_cosine) << "\n";
  out << "id_leakage " << r.id_leakage.size();
  for (Index u : r.id_leakage) out << ' ' << u;
  out << "\n";
  return out.str();
}

std::string report_csv(const AttackReport& r) {
  std::ostringstream out;
  out << "round,user,item,r_true,r_hat,abs_err,confidence\n";
  for (const ScoredRating& row : r.rows) {
    out << row.inferred.round << ',';
    if (row.inferred.user >= 0) {
      out << row.inferred.user;
    } else if (row.true_user) {
      out << *row.true_user;
    }
    out << ',' << row.inferred.item << ',';
    if (row.r_true) out << format_double(*row.r_true);
    out << ',' << format_double(row.inferred.r_hat) << ',';
    if (row.r_true) out << format_double(std::abs(row.inferred.r_hat - *row.r_true));
    out << ',' << format_double(row.inferred.confidence) << '\n';
  }
  return out.str();
}

}  // namespace fedmf
