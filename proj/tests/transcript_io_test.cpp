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
#include "fedmf/transcript_io.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fedmf/io.hpp"
#include "test_util.hpp"

namespace fedmf {
namespace {

using testing::error_code_of;
using testing::TempDir;

void expect_same_records(const PartyRecord& x, const PartyRecord& y, bool with_minibatch) {
  EXPECT_TRUE(identical(x.before.users, y.before.users));
  EXPECT_TRUE(identical(x.before.items, y.before.items));
  EXPECT_TRUE(identical(x.after.users, y.after.users));
  EXPECT_TRUE(identical(x.after.items, y.after.items));
  ASSERT_EQ(x.sent.size(), y.sent.size());
  for (std::size_t k = 0; k < x.sent.size(); ++k) EXPECT_TRUE(identical(x.sent[k], y.sent[k]));
  ASSERT_EQ(x.received.size(), y.received.size());
  for (std::size_t k = 0; k < x.received.size(); ++k) {
    EXPECT_TRUE(identical(x.received[k], y.received[k]));
  }
  if (with_minibatch) EXPECT_EQ(x.minibatch, y.minibatch);
}

FedRunResult run_scheme(Scheme scheme, DefenseKind defense) {
  const SyntheticData s = gen_synthetic(20, 15, 4, 0.3, 0.0, 2);
  SideDataConfig side;
  side.coverage = 0.6;
  side.implicit_per_user = 1;
  const Partition views = partition(s.store, scheme, 2, side, 4);
  FedConfig c;
  c.rounds = 3;
  c.seed = 2;
  c.hp.d = 4;
  c.hp.lambda_u = 0.01;
  c.minibatch = MinibatchRule::kOnePerEntity;
  c.defense.kind = defense;
  c.defense.dp.sigma = 0.05;
  c.defense.secureagg.mask_seed = 17;
  return run_federated(views, c);
}

TEST(TranscriptIo, RoundTripIsBitExact) {
  for (Scheme scheme : {Scheme::kHorizontal, Scheme::kVertical, Scheme::kTransfer}) {
    for (DefenseKind d : {DefenseKind::kNone, DefenseKind::kSecureAggPlusDp}) {
      const Transcript t = run_scheme(scheme, d).transcript;
      const std::string text = serialize_transcript(t);
      Transcript back = parse_transcript(text);
      EXPECT_EQ(serialize_transcript(back), text);
      EXPECT_EQ(back.header.scheme, t.header.scheme);
      EXPECT_EQ(back.header.aligned_users, t.header.aligned_users);
      EXPECT_EQ(back.header.config.defense.label(), t.header.config.defense.label());
      EXPECT_EQ(back.header.config.hp.lambda_u, t.header.config.hp.lambda_u);
      ASSERT_EQ(back.rounds.size(), t.rounds.size());
      for (std::size_t r = 0; r < t.rounds.size(); ++r) {
        expect_same_records(back.rounds[r].a, t.rounds[r].a, false);
        expect_same_records(back.rounds[r].b, t.rounds[r].b, false);
        EXPECT_TRUE(back.rounds[r].a.minibatch.empty());
      }
      parse_truth(serialize_truth(t), back);
      for (std::size_t r = 0; r < t.rounds.size(); ++r) {
        EXPECT_EQ(back.rounds[r].a.minibatch, t.rounds[r].a.minibatch);
        EXPECT_EQ(back.rounds[r].b.minibatch, t.rounds[r].b.minibatch);
      }
    }
  }
}

TEST(TranscriptIo, TranscriptCarriesNoRatings) {
  const Transcript t = run_scheme(Scheme::kHorizontal, DefenseKind::kNone).transcript;
  Transcript altered = t;
  for (RoundTranscript& r : altered.rounds) {
    for (Rating& x : r.b.minibatch) x.value += 1.0;
    r.a.minibatch.clear();
  }
  EXPECT_EQ(serialize_transcript(altered), serialize_transcript(t));
  EXPECT_NE(serialize_truth(altered), serialize_truth(t));
}

TEST(TranscriptIo, UnknownSchemaVersionIsRejected) {
  const Transcript t = run_scheme(Scheme::kTransfer, DefenseKind::kNone).transcript;
  std::string text = serialize_transcript(t);
  text.replace(0, text.find('\n'), "fedmf-transcript 2");
  EXPECT_EQ(error_code_of([&] { parse_transcript(text); }), ErrorCode::kSchemaVersion);
  Transcript copy = t;
  std::string truth = serialize_truth(t);
  truth.replace(0, truth.find('\n'), "fedmf-truth 9");
  EXPECT_EQ(error_code_of([&] { parse_truth(truth, copy); }), ErrorCode::kSchemaVersion);
  EXPECT_EQ(error_code_of([&] { parse_transcript("not a transcript\n"); }), ErrorCode::kParseError);
}

TEST(TranscriptIo, TruncatedInputIsAParseError) {
  const std::string text =
      serialize_transcript(run_scheme(Scheme::kHorizontal, DefenseKind::kNone).transcript);
  EXPECT_THROW(parse_transcript(text.substr(0, text.size() / 2)), Error);
}

TEST(TranscriptIo, FilesRoundTrip) {
  TempDir dir;
  const Transcript t = run_scheme(Scheme::kHorizontal, DefenseKind::kSecureAgg).transcript;
  write_transcript(t, dir / "t.txt");
  write_truth(t, dir / "truth.txt");
  Transcript back = read_transcript(dir / "t.txt");
  read_truth(dir / "truth.txt", back);
  EXPECT_EQ(serialize_truth(back), serialize_truth(t));
  EXPECT_EQ(error_code_of([&] { read_transcript(dir / "missing.txt"); }), ErrorCode::kIoError);
}

TEST(HexDouble, RoundTripsSpecialValues) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, -2.5e-300, 1e300,
                   std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::infinity()}) {
    const double back = parse_hex_double(hex_double(v));
    EXPECT_EQ(std::signbit(back), std::signbit(v));
    EXPECT_EQ(back, v);
  }
  EXPECT_TRUE(std::isnan(parse_hex_double(hex_double(std::nan("")))));
  EXPECT_THROW(parse_hex_double("0x1.zp+3"), Error);
}

TEST(Io, ParsersAreStrict) {
  EXPECT_EQ(parse_int("42", "x"), 42);
  EXPECT_EQ(error_code_of([] { parse_int("42a", "x"); }), ErrorCode::kParseError);
  EXPECT_EQ(error_code_of([] { parse_double("", "x"); }), ErrorCode::kParseError);
  EXPECT_DOUBLE_EQ(parse_double("2.5", "x"), 2.5);
  EXPECT_EQ(trim("  a b \t"), "a b");
  EXPECT_EQ(split_on("a,,b", ',').size(), 3u);
}

TEST(Io, AtomicWriteReplacesContent) {
  TempDir dir;
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  EXPECT_EQ(read_file(dir / "f.txt"), "two");
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir.path()),
                          std::filesystem::directory_iterator{}),
            1);
  EXPECT_EQ(error_code_of([&] { write_file_atomic(dir / "no/such/dir/f.txt", "x"); }),
            ErrorCode::kIoError);
}

}  // namespace
}  // namespace fedmf
