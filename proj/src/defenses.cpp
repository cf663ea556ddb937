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
#include "fedmf/defenses.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fedmf/error.hpp"
#include "fedmf/io.hpp"

namespace fedmf {

std::string_view to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kNone: return "none";
    case DefenseKind::kSecureAgg: return "secureagg";
    case DefenseKind::kDp: return "dp";
    case DefenseKind::kSecureAggPlusDp: return "secureagg+dp";
    case DefenseKind::kHomomorphic: return "he";
    case DefenseKind::kTrustedExecution: return "tee";
  }
  return "?";
}

DefenseKind parse_defense_kind(std::string_view text) {
  for (DefenseKind k : {DefenseKind::kNone, DefenseKind::kSecureAgg, DefenseKind::kDp,
                        DefenseKind::kSecureAggPlusDp, DefenseKind::kHomomorphic,
                        DefenseKind::kTrustedExecution}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kValidation, "unknown defense kind '" + std::string(text) + "'");
}

void DefenseConfig::validate() const {
  if (kind == DefenseKind::kHomomorphic) {
    throw Error(ErrorCode::kValidation,
                "defense 'he': homomorphic-encryption training is not implemented by this "
                "lab; use secureagg or dp");
  }
  if (kind == DefenseKind::kTrustedExecution) {
    throw Error(ErrorCode::kValidation,
                "defense 'tee': trusted-execution training is not implemented by this lab; "
                "use secureagg or dp");
  }
  if (masks()) {
    const auto& s = secureagg;
    if (s.field_bits < 8 || s.field_bits > 64) {
      throw Error(ErrorCode::kValidation, "field_bits must be in [8, 64]");
    }
    if (s.frac_bits < 0 || s.frac_bits >= s.field_bits - kGuardBits) {
      throw Error(ErrorCode::kValidation, "frac_bits must be in [0, field_bits - 2)");
    }
  }
  if (adds_noise()) {
    if (!(dp.clip_norm > 0.0)) throw Error(ErrorCode::kValidation, "clip_norm must be > 0");
    if (!(dp.sigma >= 0.0)) throw Error(ErrorCode::kValidation, "sigma must be >= 0");
  }
}

std::string DefenseConfig::label() const {
  std::string out(to_string(kind));
  if (adds_noise()) out += ":" + format_double(dp.sigma);
  return out;
}

DefenseConfig parse_defense_label(std::string_view label, const DefenseConfig& base) {
  DefenseConfig out = base;
  const auto colon = label.find(':');
  out.kind = parse_defense_kind(label.substr(0, colon));
  if (colon != std::string_view::npos) {
    if (!out.adds_noise()) {
      throw Error(ErrorCode::kValidation, "defense '" + std::string(label) + "' takes no sigma");
    }
    try {
      out.dp.sigma = parse_double(label.substr(colon + 1), "sigma");
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, e.what());
    }
  }
  return out;
}

namespace {

std::int64_t to_signed(std::uint64_t v, int field_bits) {
  if (field_bits >= 64) return static_cast<std::int64_t>(v);
  v &= field_mask(field_bits);
  const std::uint64_t sign = std::uint64_t{1} << (field_bits - 1);
  if (v & sign) return static_cast<std::int64_t>(v) - (std::int64_t{1} << field_bits);
  return static_cast<std::int64_t>(v);
}

}  // namespace

FieldMatrix fixedpoint_encode(const FactorMatrix& x, int frac_bits, int field_bits) {
  const double scale = std::ldexp(1.0, frac_bits);
  const double bound = std::ldexp(1.0, field_bits - frac_bits - kGuardBits);
  const std::uint64_t mask = field_mask(field_bits);
  FieldMatrix out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      if (!std::isfinite(v) || std::abs(v) >= bound) {
        throw Error(ErrorCode::kEncodingOverflow,
                    "entry (" + std::to_string(r) + ", " + std::to_string(c) + ") = " +
                        format_double(v) + " exceeds 2^" +
                        std::to_string(field_bits - frac_bits - kGuardBits));
      }
      const auto q = static_cast<std::int64_t>(std::llround(v * scale));
      out(r, c) = static_cast<std::uint64_t>(q) & mask;
    }
  }
  return out;
}

FactorMatrix fixedpoint_decode(const FieldMatrix& x, int frac_bits, int field_bits) {
  FactorMatrix out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r)
    for (Index c = 0; c < x.cols(); ++c)
      out(r, c) = std::ldexp(static_cast<double>(to_signed(x(r, c), field_bits)), -frac_bits);
  return out;
}

FieldMatrix field_add(const FieldMatrix& a, const FieldMatrix& b, int field_bits) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "field_add operands differ in shape");
  }
  const std::uint64_t mask = field_mask(field_bits);
  return a.binaryExpr(b, [mask](std::uint64_t x, std::uint64_t y) { return (x + y) & mask; });
}

FieldMatrix mask_stream(Index rows, Index cols, const SecureAggParams& params, Index round,
                        std::uint64_t slot) {
  Rng rng = make_rng(params.mask_seed, Stream::kMask,
                     {static_cast<std::uint64_t>(round), slot});
  const std::uint64_t mask = field_mask(params.field_bits);
  FieldMatrix out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) out(r, c) = rng() & mask;
  return out;
}

std::pair<MaskedMatrix, MaskedMatrix> mask_pair(const FactorMatrix& a, const FactorMatrix& b,
                                                const SecureAggParams& params, Index round,
                                                std::uint64_t slot) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "mask_pair operands differ in shape");
  }
  const int bits = params.field_bits;
  const std::uint64_t mask = field_mask(bits);
  const FieldMatrix m = mask_stream(a.rows(), a.cols(), params, round, slot);
  FieldMatrix ea = fixedpoint_encode(a, params.frac_bits, bits);
  FieldMatrix eb = fixedpoint_encode(b, params.frac_bits, bits);
  MaskedMatrix out_a{ea.binaryExpr(m, [mask](auto x, auto y) { return (x + y) & mask; }),
                     Party::kA, round};
  MaskedMatrix out_b{eb.binaryExpr(m, [mask](auto x, auto y) { return (x - y) & mask; }),
                     Party::kB, round};
  return {std::move(out_a), std::move(out_b)};
}

FactorMatrix masked_mean(const MaskedMatrix& a, const MaskedMatrix& b,
                         const SecureAggParams& params) {
  const FieldMatrix sum = field_add(a.values, b.values, params.field_bits);
  return fixedpoint_decode(sum, params.frac_bits, params.field_bits) * 0.5;
}

FactorMatrix dp_transform(const FactorMatrix& x, double clip_norm, double sigma, Rng& rng) {
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip_norm must be > 0");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  FactorMatrix out = x;
  for (Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm > clip_norm) out.row(r) *= clip_norm / norm;
  }
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma * clip_norm);
    for (Index r = 0; r < out.rows(); ++r)
      for (Index c = 0; c < out.cols(); ++c) out(r, c) += noise(rng);
  }
  return out;
}

}  // namespace fedmf
