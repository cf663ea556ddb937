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
#ifndef FEDMF_RATINGS_HPP_
#define FEDMF_RATINGS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace fedmf {

using Index = Eigen::Index;

struct Rating {
  Index user = 0;
  Index item = 0;
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

/// Sparse user-item observations over a fixed n_users x n_items universe.
///
/// Each (user, item) pair occurs at most once. Per-entity counts are kept in
/// sync with the triples; they are the M_u / M_v normalizers of the
/// gradients.
class RatingStore {
 public:
  RatingStore() = default;
  RatingStore(Index n_users, Index n_items, std::vector<Rating> ratings);

  Index n_users() const { return n_users_; }
  Index n_items() const { return n_items_; }
  Index size() const { return static_cast<Index>(ratings_.size()); }
  bool empty() const { return ratings_.empty(); }

  std::span<const Rating> ratings() const { return ratings_; }
  const Rating& operator[](Index k) const { return ratings_[static_cast<std::size_t>(k)]; }

  Index user_count(Index user) const { return user_count_[static_cast<std::size_t>(user)]; }
  Index item_count(Index item) const { return item_count_[static_cast<std::size_t>(item)]; }
  const std::vector<Index>& user_counts() const { return user_count_; }
  const std::vector<Index>& item_counts() const { return item_count_; }

  bool contains(Index user, Index item) const;
  std::optional<double> find(Index user, Index item) const;

  /// Store over the same universe holding only `subset`.
  RatingStore with_ratings(std::vector<Rating> subset) const {
    return RatingStore(n_users_, n_items_, std::move(subset));
  }

  friend bool operator==(const RatingStore& a, const RatingStore& b) {
    return a.n_users_ == b.n_users_ && a.n_items_ == b.n_items_ &&
           a.ratings_ == b.ratings_;
  }

 private:
  std::uint64_t key(Index user, Index item) const {
    return static_cast<std::uint64_t>(user) * static_cast<std::uint64_t>(n_items_) +
           static_cast<std::uint64_t>(item);
  }

  Index n_users_ = 0;
  Index n_items_ = 0;
  std::vector<Rating> ratings_;
  std::vector<Index> user_count_;
  std::vector<Index> item_count_;
  std::unordered_map<std::uint64_t, std::size_t> position_;
};

}  // namespace fedmf

#endif  // FEDMF_RATINGS_HPP_
