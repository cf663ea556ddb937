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
#ifndef FEDMF_DEFENSES_HPP_
#define FEDMF_DEFENSES_HPP_

// Transmission-path defenses: additive secret sharing of party submissions
// (two-party pairwise masking over Z_{2^field_bits}) and Gaussian DP noise.
//
// Fixed-point headroom: a real x is carried as round(x * 2^frac_bits) in a
// field of 2^field_bits elements read as two's complement. Encoding requires
// |x| < 2^(field_bits - frac_bits - kGuardBits); the two guard bits leave
// room for the sum of both parties' submissions plus rounding without
// wrapping. With the defaults (64, 24) that bound is 2^38, far above the
// O(1) magnitudes of profiles and clipped updates.

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "fedmf/datasets.hpp"
#include "fedmf/mf.hpp"
#include "fedmf/rng.hpp"

namespace fedmf {

inline constexpr int kGuardBits = 2;

enum class DefenseKind {
  kNone,
  kSecureAgg,
  kDp,
  kSecureAggPlusDp,
  // Recognized so configs can name them, rejected by validate().
  kHomomorphic,
  kTrustedExecution,
};

std::string_view to_string(DefenseKind kind);
DefenseKind parse_defense_kind(std::string_view text);

struct SecureAggParams {
  int field_bits = 64;
  int frac_bits = 24;
  std::uint64_t mask_seed = 0;
};

struct DpParams {
  double clip_norm = 1.0;
  double sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

struct DefenseConfig {
  DefenseKind kind = DefenseKind::kNone;
  SecureAggParams secureagg;
  DpParams dp;

  bool masks() const {
    return kind == DefenseKind::kSecureAgg || kind == DefenseKind::kSecureAggPlusDp;
  }
  bool adds_noise() const { return kind == DefenseKind::kDp || kind == DefenseKind::kSecureAggPlusDp; }

  /// Throws kValidation for out-of-scope kinds and bad parameters.
  void validate() const;

  /// Short stable name, e.g. "none", "secureagg", "dp:0.1".
  std::string label() const;
};

/// Parses a label produced by DefenseConfig::label(); seeds and the other
/// numeric knobs are taken from `base`.
DefenseConfig parse_defense_label(std::string_view label, const DefenseConfig& base);

using FieldMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MaskedMatrix {
  FieldMatrix values;
  Party party = Party::kA;
  Index round = 0;
};

inline std::uint64_t field_mask(int field_bits) {
  return field_bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << field_bits) - 1);
}

FieldMatrix fixedpoint_encode(const FactorMatrix& x, int frac_bits, int field_bits = 64);
FactorMatrix fixedpoint_decode(const FieldMatrix& x, int frac_bits, int field_bits = 64);

FieldMatrix field_add(const FieldMatrix& a, const FieldMatrix& b, int field_bits = 64);

/// Uniform mask stream shared by both parties for (mask_seed, round, slot).
FieldMatrix mask_stream(Index rows, Index cols, const SecureAggParams& params, Index round,
                        std::uint64_t slot);

/// A submits encode(A) + M, B submits encode(B) - M. The sum of the two is
/// encode(A) + encode(B) exactly.
std::pair<MaskedMatrix, MaskedMatrix> mask_pair(const FactorMatrix& a, const FactorMatrix& b,
                                                const SecureAggParams& params, Index round = 0,
                                                std::uint64_t slot = 0);

/// (A + B) / 2 recovered from the two masked submissions.
FactorMatrix masked_mean(const MaskedMatrix& a, const MaskedMatrix& b,
                         const SecureAggParams& params);

/// Clips each row to L2 norm clip_norm, then adds N(0, (sigma*clip_norm)^2)
/// to every entry.
FactorMatrix dp_transform(const FactorMatrix& x, double clip_norm, double sigma, Rng& rng);

}  // namespace fedmf

#endif  // FEDMF_DEFENSES_HPP_
