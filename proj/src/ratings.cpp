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
#include "fedmf/ratings.hpp"

#include <string>

#include "fedmf/error.hpp"

namespace fedmf {

RatingStore::RatingStore(Index n_users, Index n_items, std::vector<Rating> ratings)
    : n_users_(n_users),
      n_items_(n_items),
      ratings_(std::move(ratings)),
      user_count_(static_cast<std::size_t>(n_users), 0),
      item_count_(static_cast<std::size_t>(n_items), 0) {
  if (n_users < 0 || n_items < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative universe size");
  }
  position_.reserve(ratings_.size());
  for (std::size_t k = 0; k < ratings_.size(); ++k) {
    const Rating& r = ratings_[k];
    if (r.user < 0 || r.user >= n_users || r.item < 0 || r.item >= n_items) {
      throw Error(ErrorCode::kIdOutOfRange,
                  "rating (" + std::to_string(r.user) + ", " + std::to_string(r.item) +
                      ") outside " + std::to_string(n_users) + "x" + std::to_string(n_items));
    }
    if (!position_.emplace(key(r.user, r.item), k).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate rating for (" + std::to_string(r.user) + ", " +
                      std::to_string(r.item) + ")");
    }
    ++user_count_[static_cast<std::size_t>(r.user)];
    ++item_count_[static_cast<std::size_t>(r.item)];
  }
}

bool RatingStore::contains(Index user, Index item) const {
  if (user < 0 || user >= n_users_ || item < 0 || item >= n_items_) return false;
  return position_.contains(key(user, item));
}

std::optional<double> RatingStore::find(Index user, Index item) const {
  if (!contains(user, item)) return std::nullopt;
  return ratings_[position_.at(key(user, item))].value;
}

}  // namespace fedmf
