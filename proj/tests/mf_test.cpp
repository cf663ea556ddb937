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
#include "fedmf/mf.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fedmf/datasets.hpp"
#include "fedmf/error.hpp"

namespace fedmf {
namespace {

// Scalar-loop oracles, written independently of the Eigen code.

double oracle_data_loss(const MfModel& m, const RatingStore& data) {
  double s = 0.0;
  for (const Rating& r : data.ratings()) {
    double p = 0.0;
    for (Index k = 0; k < m.hp.d; ++k) p += m.users(r.user, k) * m.items(r.item, k);
    s += (r.value - p) * (r.value - p);
  }
  return s / static_cast<double>(data.size());
}

// Per-entity fit term whose gradient in u_i (or v_j) is grad_user (grad_item).
double entity_loss(const MfModel& m, const RatingStore& data, bool user, Index id) {
  double s = 0.0;
  int count = 0;
  for (const Rating& r : data.ratings()) {
    if ((user ? r.user : r.item) != id) continue;
    double p = 0.0;
    for (Index k = 0; k < m.hp.d; ++k) p += m.users(r.user, k) * m.items(r.item, k);
    s += (r.value - p) * (r.value - p);
    ++count;
  }
  return s / count;
}

Vector fd_gradient(MfModel m, const RatingStore& data, bool user, Index id, double h = 1e-6) {
  Vector g(m.hp.d);
  FactorMatrix& f = user ? m.users : m.items;
  for (Index k = 0; k < m.hp.d; ++k) {
    const double x = f(id, k);
    f(id, k) = x + h;
    const double up = entity_loss(m, data, user, id);
    f(id, k) = x - h;
    const double down = entity_loss(m, data, user, id);
    f(id, k) = x;
    g(k) = (up - down) / (2 * h);
  }
  return g;
}

RatingStore random_store(Index n, Index m, Index count, std::mt19937_64& rng) {
  std::vector<Rating> all;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) all.push_back({i, j, 0.0});
  }
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(std::min<Index>(count, n * m)));
  std::uniform_real_distribution<double> val(1.0, 5.0);
  for (Rating& r : all) r.value = val(rng);
  return RatingStore(n, m, all);
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-8, std::max(a.norm(), b.norm()));
}

MfModel model_with(Index n, Index m, Index d, std::uint64_t seed) {
  Hyperparams hp;
  hp.d = d;
  return init_model(n, m, hp, seed);
}

TEST(Loss, ExactPredictionsGiveZero) {
  MfModel m = model_with(3, 3, 2, 1);
  std::vector<Rating> rs;
  for (Index i = 0; i < 3; ++i) rs.push_back({i, i, m.users.row(i).dot(m.items.row(i))});
  EXPECT_NEAR(loss(m, RatingStore(3, 3, rs)), 0.0, 1e-15);
}

TEST(Loss, SingleRatingZeroPrediction) {
  MfModel m = model_with(1, 1, 2, 1);
  m.users.setZero();
  EXPECT_DOUBLE_EQ(loss(m, RatingStore(1, 1, {{0, 0, 2.0}})), 4.0);
}

TEST(Loss, MatchesScalarLoopWithRegularizer) {
  std::mt19937_64 rng(3);
  const RatingStore data = random_store(5, 4, 8, rng);
  MfModel m = model_with(5, 4, 3, 3);
  m.hp.lambda_u = 0.1;
  m.hp.lambda_v = 0.2;
  double reg = 0.0;
  for (Index i = 0; i < m.users.size(); ++i) reg += 0.1 * m.users.data()[i] * m.users.data()[i];
  for (Index i = 0; i < m.items.size(); ++i) reg += 0.2 * m.items.data()[i] * m.items.data()[i];
  EXPECT_NEAR(loss(m, data), oracle_data_loss(m, data) + reg, 1e-14);
}

TEST(Loss, EmptyDataThrows) {
  MfModel m = model_with(2, 2, 2, 1);
  try {
    loss(m, RatingStore(2, 2, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
}

TEST(Gradients, ZeroResidualsGiveZero) {
  MfModel m = model_with(2, 2, 3, 4);
  const RatingStore data(2, 2, {{0, 1, m.users.row(0).dot(m.items.row(1))}});
  EXPECT_LT(grad_user(m, data, 0).norm(), 1e-15);
  EXPECT_LT(grad_item(m, data, 1).norm(), 1e-15);
}

TEST(Gradients, SingleRatingClosedForms) {
  MfModel m = model_with(2, 2, 3, 5);
  const RatingStore data(2, 2, {{1, 0, 3.0}});
  m.users.row(1).setZero();
  EXPECT_LT((grad_user(m, data, 1) - (-2.0 * 3.0 * m.items.row(0).transpose())).norm(), 1e-15);
  m = model_with(2, 2, 3, 5);
  m.items.row(0).setZero();
  EXPECT_LT((grad_item(m, data, 0) - (-2.0 * 3.0 * m.users.row(1).transpose())).norm(), 1e-15);
}

TEST(Gradients, NoObservationsThrows) {
  MfModel m = model_with(2, 2, 2, 1);
  const RatingStore data(2, 2, {{0, 0, 1.0}});
  try {
    grad_user(m, data, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoObservations);
  }
  EXPECT_THROW(grad_item(m, data, 1), Error);
}

TEST(Gradients, FiniteDifferenceSeeded) {
  for (std::uint64_t seed : {11u, 13u}) {
    std::mt19937_64 rng(seed);
    const RatingStore data = random_store(6, 5, 14, rng);
    const MfModel m = model_with(6, 5, 4, seed);
    for (Index i = 0; i < 6; ++i) {
      if (data.user_count(i) > 0) {
        EXPECT_LT(rel_err(grad_user(m, data, i), fd_gradient(m, data, true, i)), 1e-5);
      }
    }
    for (Index j = 0; j < 5; ++j) {
      if (data.item_count(j) > 0) {
        EXPECT_LT(rel_err(grad_item(m, data, j), fd_gradient(m, data, false, j)), 1e-5);
      }
    }
  }
}

TEST(Gradients, FiniteDifferenceProperty) {
  std::mt19937_64 rng(2024);
  int cases = 0;
  for (int c = 0; c < 120; ++c) {
    const Index n = std::uniform_int_distribution<Index>(1, 20)(rng);
    const Index m = std::uniform_int_distribution<Index>(1, 20)(rng);
    const Index d = std::uniform_int_distribution<Index>(1, 8)(rng);
    const Index count = std::uniform_int_distribution<Index>(1, n * m)(rng);
    const RatingStore data = random_store(n, m, count, rng);
    const MfModel model = model_with(n, m, d, rng());
    const Index u = data[0].user, v = data[0].item;
    ASSERT_LT(rel_err(grad_user(model, data, u), fd_gradient(model, data, true, u)), 1e-5);
    ASSERT_LT(rel_err(grad_item(model, data, v), fd_gradient(model, data, false, v)), 1e-5);
    ++cases;
  }
  EXPECT_GE(cases, 100);
}

TEST(SgdStep, FixedPointWithoutGradients) {
  MfModel m = model_with(2, 2, 2, 7);
  const RatingStore data(2, 2, {{0, 0, m.users.row(0).dot(m.items.row(0))}});
  const MfModel next = sgd_step(m, data);
  EXPECT_LT((next.users - m.users).norm(), 1e-15);
  EXPECT_LT((next.items - m.items).norm(), 1e-15);
}

TEST(SgdStep, UnitLearningRate) {
  MfModel m = model_with(1, 1, 3, 8);
  m.hp.gamma = 1.0;
  const RatingStore data(1, 1, {{0, 0, 4.0}});
  const MfModel next = sgd_step(m, data);
  const Vector expect = m.users.row(0).transpose() - grad_user(m, data, 0);
  EXPECT_EQ((next.users.row(0).transpose() - expect).norm(), 0.0);
}

TEST(SgdStep, SimultaneousUpdateAndUnratedRowsUnchanged) {
  MfModel m = model_with(3, 3, 2, 9);
  m.hp.lambda_u = 0.3;
  m.hp.lambda_v = 0.1;
  const RatingStore data(3, 3, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 3.0}});
  const MfModel next = sgd_step(m, data);
  const Vector u0 = m.users.row(0).transpose() -
                    m.hp.gamma * (grad_user(m, data, 0) + 2 * 0.3 * m.users.row(0).transpose());
  const Vector v1 = m.items.row(1).transpose() -
                    m.hp.gamma * (grad_item(m, data, 1) + 2 * 0.1 * m.items.row(1).transpose());
  EXPECT_LT((next.users.row(0).transpose() - u0).norm(), 1e-15);
  EXPECT_LT((next.items.row(1).transpose() - v1).norm(), 1e-15);
  EXPECT_EQ(next.users.row(2), m.users.row(2));
  EXPECT_EQ(next.items.row(2), m.items.row(2));
}

TEST(SgdStep, EmptyDataThrows) {
  EXPECT_THROW(sgd_step(model_with(2, 2, 2, 1), RatingStore(2, 2, {})), Error);
}

TEST(SgdStep, ConvergesOnRankThreeData) {
  const SyntheticData syn = gen_synthetic(50, 40, 3, 0.5, 0.0, 17);
  Hyperparams hp;
  hp.d = 3;
  hp.gamma = 0.05;
  MfModel m = init_model(50, 40, hp, 17);
  for (int s = 0; s < 500; ++s) m = sgd_step(m, syn.store);
  EXPECT_LT(rmse(m, syn.store), 0.1);
}

TEST(SgdStep, DescentForSmallSteps) {
  int ok = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SyntheticData syn = gen_synthetic(15, 12, 3, 0.4, 0.0, seed);
    Hyperparams hp;
    hp.d = 3;
    hp.gamma = 1e-3;
    MfModel m = init_model(15, 12, hp, seed);
    for (int s = 0; s < 4; ++s) {
      const MfModel next = sgd_step(m, syn.store);
      ok += loss(next, syn.store) <= loss(m, syn.store);
      ++total;
      m = next;
    }
  }
  EXPECT_GE(ok, 0.99 * total);
}

TEST(Model, ScaleSymmetry) {
  MfModel m = model_with(4, 5, 3, 10);
  for (double c : {-3.0, 0.5, 7.0}) {
    MfModel s = m;
    s.users *= c;
    s.items /= c;
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 5; ++j) EXPECT_NEAR(predict(s, i, j), predict(m, i, j), 1e-12);
    }
  }
}

TEST(Model, InitIsDeterministicAndBounded) {
  const MfModel a = model_with(10, 8, 4, 42);
  const MfModel b = model_with(10, 8, 4, 42);
  EXPECT_EQ(a.users, b.users);
  EXPECT_EQ(a.items, b.items);
  EXPECT_LE(a.users.cwiseAbs().maxCoeff(), 0.5 / std::sqrt(4.0));
  EXPECT_NE(model_with(10, 8, 4, 43).users, a.users);
}

TEST(Model, RmseClosedForms) {
  MfModel m = model_with(1, 1, 2, 1);
  m.users.setZero();
  EXPECT_DOUBLE_EQ(rmse(m, RatingStore(1, 1, {{0, 0, 2.0}})), 2.0);
  std::mt19937_64 rng(5);
  const RatingStore data = random_store(6, 6, 20, rng);
  const MfModel r = model_with(6, 6, 3, 5);
  EXPECT_NEAR(rmse(r, data), std::sqrt(oracle_data_loss(r, data)), 1e-14);
}

TEST(Model, PredictRejectsUnknownIds) {
  const MfModel m = model_with(2, 2, 2, 1);
  EXPECT_THROW(predict(m, 2, 0), Error);
}

TEST(Model, FloatInstantiation) {
  BasicModel<float> m = init_model<float>(3, 3, Hyperparams{}, 1);
  const RatingStore data(3, 3, {{0, 0, 1.0}, {1, 2, 2.0}});
  const BasicModel<float> next = sgd_step(m, data);
  EXPECT_LT(loss(next, data), loss(m, data));
}

}  // namespace
}  // namespace fedmf
