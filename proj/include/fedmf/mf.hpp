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
#ifndef FEDMF_MF_HPP_
#define FEDMF_MF_HPP_

// Matrix-factorization model: regularized mean squared error, analytical
// per-entity gradients and the simultaneous full-batch SGD update.
//
// Gradients returned by grad_user / grad_item / data_gradients are the
// data-fit term only. The 2*lambda*profile regularizer is added by sgd_step,
// which is the split the attack code relies on when it inverts an update.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Core>

#include "fedmf/error.hpp"
#include "fedmf/ratings.hpp"
#include "fedmf/rng.hpp"

namespace fedmf {

template <typename Scalar>
using Factors = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Profile = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using FactorMatrix = Factors<double>;
using Vector = Profile<double>;

struct Hyperparams {
  Index d = 5;
  double gamma = 0.05;
  double lambda_u = 0.0;
  double lambda_v = 0.0;

  void validate() const {
    if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
    if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be > 0");
    if (!(lambda_u >= 0.0) || !(lambda_v >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "regularizers must be >= 0");
    }
  }
};

template <typename Scalar>
struct BasicModel {
  Factors<Scalar> users;
  Factors<Scalar> items;
  Hyperparams hp;

  Index n_users() const { return users.rows(); }
  Index n_items() const { return items.rows(); }
};

using MfModel = BasicModel<double>;

template <typename Scalar>
struct BasicGradients {
  Factors<Scalar> users;
  Factors<Scalar> items;
};

using Gradients = BasicGradients<double>;

/// Profiles drawn i.i.d. uniform in [-0.5/sqrt(d), 0.5/sqrt(d)].
template <typename Scalar = double>
Factors<Scalar> init_factors(Index rows, Index d, Rng& rng) {
  const double half_width = 0.5 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> unif(-half_width, half_width);
  Factors<Scalar> out(rows, d);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < d; ++c) out(r, c) = static_cast<Scalar>(unif(rng));
  return out;
}

template <typename Scalar = double>
BasicModel<Scalar> init_model(Index n_users, Index n_items, const Hyperparams& hp,
                              std::uint64_t seed) {
  hp.validate();
  Rng rng = make_rng(seed, Stream::kInit);
  BasicModel<Scalar> model;
  model.users = init_factors<Scalar>(n_users, hp.d, rng);
  model.items = init_factors<Scalar>(n_items, hp.d, rng);
  model.hp = hp;
  return model;
}

namespace detail {

inline void check_ids(Index user, Index item, Index n_users, Index n_items) {
  if (user < 0 || user >= n_users || item < 0 || item >= n_items) {
    throw Error(ErrorCode::kIdOutOfRange,
                "(" + std::to_string(user) + ", " + std::to_string(item) + ") outside " +
                    std::to_string(n_users) + "x" + std::to_string(n_items));
  }
}

template <typename Scalar>
void check_shapes(const BasicModel<Scalar>& model, const RatingStore& data,
                  const Factors<Scalar>* offsets) {
  if (model.users.cols() != model.hp.d || model.items.cols() != model.hp.d) {
    throw Error(ErrorCode::kShapeMismatch, "profile width differs from hp.d");
  }
  if (data.n_users() > model.n_users() || data.n_items() > model.n_items()) {
    throw Error(ErrorCode::kShapeMismatch, "rating universe larger than model");
  }
  if (offsets != nullptr &&
      (offsets->rows() != model.n_users() || offsets->cols() != model.hp.d)) {
    throw Error(ErrorCode::kShapeMismatch, "user offsets must be n_users x d");
  }
}

// Effective user profile: u_i, or u_i + k_i when side-information offsets
// are present.
template <typename Scalar>
Profile<Scalar> user_row(const BasicModel<Scalar>& model, const Factors<Scalar>* offsets,
                         Index user) {
  if (offsets == nullptr) return model.users.row(user).transpose();
  return (model.users.row(user) + offsets->row(user)).transpose();
}

template <typename Scalar>
Scalar residual(const BasicModel<Scalar>& model, const Factors<Scalar>* offsets,
                const Rating& r) {
  return static_cast<Scalar>(r.value) -
         user_row(model, offsets, r.user).dot(model.items.row(r.item).transpose());
}

template <typename Scalar>
Scalar squared_error_sum(const BasicModel<Scalar>& model, const RatingStore& data,
                         const Factors<Scalar>* offsets) {
  Scalar sum(0);
  for (const Rating& r : data.ratings()) {
    const Scalar e = residual(model, offsets, r);
    sum += e * e;
  }
  return sum;
}

template <typename Scalar>
BasicGradients<Scalar> data_gradients(const BasicModel<Scalar>& model, const RatingStore& data,
                                      const Factors<Scalar>* offsets) {
  check_shapes(model, data, offsets);
  BasicGradients<Scalar> g{Factors<Scalar>::Zero(model.n_users(), model.hp.d),
                           Factors<Scalar>::Zero(model.n_items(), model.hp.d)};
  for (const Rating& r : data.ratings()) {
    const Profile<Scalar> u = user_row(model, offsets, r.user);
    const Scalar e = static_cast<Scalar>(r.value) - u.dot(model.items.row(r.item).transpose());
    const Scalar wu = Scalar(-2) / static_cast<Scalar>(data.user_count(r.user));
    const Scalar wv = Scalar(-2) / static_cast<Scalar>(data.item_count(r.item));
    g.users.row(r.user) += (wu * e) * model.items.row(r.item);
    g.items.row(r.item) += (wv * e) * u.transpose();
  }
  return g;
}

template <typename Scalar>
BasicModel<Scalar> sgd_step(const BasicModel<Scalar>& model, const RatingStore& data,
                            const Factors<Scalar>* offsets) {
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "sgd_step on empty minibatch");
  const BasicGradients<Scalar> g = data_gradients(model, data, offsets);
  const auto gamma = static_cast<Scalar>(model.hp.gamma);
  const auto two_lu = static_cast<Scalar>(2.0 * model.hp.lambda_u);
  const auto two_lv = static_cast<Scalar>(2.0 * model.hp.lambda_v);
  BasicModel<Scalar> next = model;
  for (Index i = 0; i < data.n_users(); ++i) {
    if (data.user_count(i) == 0) continue;
    next.users.row(i) -= gamma * (g.users.row(i) + two_lu * model.users.row(i));
  }
  for (Index j = 0; j < data.n_items(); ++j) {
    if (data.item_count(j) == 0) continue;
    next.items.row(j) -= gamma * (g.items.row(j) + two_lv * model.items.row(j));
  }
  return next;
}

}  // namespace detail

/// Inner product of two profiles.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar predict(const Eigen::MatrixBase<DerivedU>& u,
                                  const Eigen::MatrixBase<DerivedV>& v) {
  return u.dot(v);
}

template <typename Scalar>
Scalar predict(const BasicModel<Scalar>& model, Index user, Index item) {
  detail::check_ids(user, item, model.n_users(), model.n_items());
  return model.users.row(user).dot(model.items.row(item));
}

/// (1/M) * sum of squared residuals, without regularizers.
template <typename Scalar>
Scalar data_loss(const BasicModel<Scalar>& model, const RatingStore& data) {
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "loss on empty data");
  detail::check_shapes<Scalar>(model, data, nullptr);
  return detail::squared_error_sum<Scalar>(model, data, nullptr) /
         static_cast<Scalar>(data.size());
}

/// Regularized mean squared error over the observations in `data`.
template <typename Scalar>
Scalar loss(const BasicModel<Scalar>& model, const RatingStore& data) {
  return data_loss(model, data) +
         static_cast<Scalar>(model.hp.lambda_u) * model.users.squaredNorm() +
         static_cast<Scalar>(model.hp.lambda_v) * model.items.squaredNorm();
}

template <typename Scalar>
Scalar rmse(const BasicModel<Scalar>& model, const RatingStore& data) {
  return std::sqrt(data_loss(model, data));
}

/// RMSE of the side-information model, predictions <u_i + k_i, v_j>.
template <typename Scalar>
Scalar rmse(const BasicModel<Scalar>& model, const RatingStore& data,
            const Factors<Scalar>& user_offsets) {
  if (data.empty()) throw Error(ErrorCode::kEmptyDataset, "rmse on empty data");
  detail::check_shapes(model, data, &user_offsets);
  return std::sqrt(detail::squared_error_sum(model, data, &user_offsets) /
                   static_cast<Scalar>(data.size()));
}

/// Data-fit gradients for every user and item row; rows without
/// observations are zero.
template <typename Scalar>
BasicGradients<Scalar> data_gradients(const BasicModel<Scalar>& model, const RatingStore& data) {
  return detail::data_gradients<Scalar>(model, data, nullptr);
}

template <typename Scalar>
BasicGradients<Scalar> data_gradients(const BasicModel<Scalar>& model, const RatingStore& data,
                                      const Factors<Scalar>& user_offsets) {
  return detail::data_gradients(model, data, &user_offsets);
}

/// -(2/M_u) * sum_j v_j (r_ij - <u_i, v_j>).
template <typename Scalar>
Profile<Scalar> grad_user(const BasicModel<Scalar>& model, const RatingStore& data, Index user) {
  detail::check_ids(user, 0, model.n_users(), 1);
  if (user >= data.n_users() || data.user_count(user) == 0) {
    throw Error(ErrorCode::kNoObservations, "user " + std::to_string(user) + " has no ratings");
  }
  Profile<Scalar> g = Profile<Scalar>::Zero(model.hp.d);
  for (const Rating& r : data.ratings()) {
    if (r.user != user) continue;
    const Scalar e = static_cast<Scalar>(r.value) - predict(model, r.user, r.item);
    g += e * model.items.row(r.item).transpose();
  }
  return g * (Scalar(-2) / static_cast<Scalar>(data.user_count(user)));
}

/// -(2/M_v) * sum_i u_i (r_ij - <u_i, v_j>).
template <typename Scalar>
Profile<Scalar> grad_item(const BasicModel<Scalar>& model, const RatingStore& data, Index item) {
  detail::check_ids(0, item, 1, model.n_items());
  if (item >= data.n_items() || data.item_count(item) == 0) {
    throw Error(ErrorCode::kNoObservations, "item " + std::to_string(item) + " has no ratings");
  }
  Profile<Scalar> g = Profile<Scalar>::Zero(model.hp.d);
  for (const Rating& r : data.ratings()) {
    if (r.item != item) continue;
    const Scalar e = static_cast<Scalar>(r.value) - predict(model, r.user, r.item);
    g += e * model.users.row(r.user).transpose();
  }
  return g * (Scalar(-2) / static_cast<Scalar>(data.item_count(item)));
}

/// One simultaneous full-batch step: every rated row moves by
/// -gamma * (data gradient + 2 * lambda * row), all gradients taken at the
/// incoming model. Unrated rows are copied unchanged.
template <typename Scalar>
BasicModel<Scalar> sgd_step(const BasicModel<Scalar>& model, const RatingStore& data) {
  return detail::sgd_step<Scalar>(model, data, nullptr);
}

/// Step of the side-information model; offsets are held fixed.
template <typename Scalar>
BasicModel<Scalar> sgd_step(const BasicModel<Scalar>& model, const RatingStore& data,
                            const Factors<Scalar>& user_offsets) {
  return detail::sgd_step(model, data, &user_offsets);
}

}  // namespace fedmf

#endif  // FEDMF_MF_HPP_
