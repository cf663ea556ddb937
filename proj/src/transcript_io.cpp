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

#include <charconv>
#include <cmath>
#include <vector>

#include "fedmf/error.hpp"
#include "fedmf/io.hpp"

namespace fedmf {

std::string hex_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

double parse_hex_double(std::string_view token) {
  if (token == "nan") return std::nan("");
  if (token == "inf") return INFINITY;
  if (token == "-inf") return -INFINITY;
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto res = std::from_chars(token.data(), end, value, std::chars_format::hex);
  if (token.empty() || res.ec != std::errc() || res.ptr != end) {
    throw Error(ErrorCode::kParseError, "bad hex float '" + std::string(token) + "'");
  }
  return value;
}

namespace {

void line(std::string& out, std::string_view key, std::string_view value) {
  out.append(key).append(" ").append(value).append("\n");
}

void write_ids(std::string& out, std::string_view key, const std::vector<Index>& ids) {
  out.append(key).append(" ").append(std::to_string(ids.size()));
  for (Index id : ids) out.append(" ").append(std::to_string(id));
  out.append("\n");
}

void write_field_matrix(std::string& out, const FieldMatrix& m) {
  out.append("field ").append(std::to_string(m.rows())).append(" ")
      .append(std::to_string(m.cols())).append("\n");
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out.append(" ");
      out.append(std::to_string(m(r, c)));
    }
    out.append("\n");
  }
}

void write_payloads(std::string& out, std::string_view key, const std::vector<Payload>& ps) {
  out.append(key).append(" ").append(std::to_string(ps.size())).append("\n");
  for (const Payload& p : ps) {
    out.append("payload ").append(p.tag).append(" ")
        .append(p.kind == Payload::Kind::kPlain ? "plain" : "masked").append("\n");
    write_ids(out, "ids", p.ids);
    if (p.kind == Payload::Kind::kPlain) {
      write_matrix(out, "value", p.plain);
    } else {
      write_field_matrix(out, p.masked);
    }
  }
}

void write_state(std::string& out, std::string_view key, const LocalState& s) {
  out.append("state ").append(key).append("\n");
  write_matrix(out, "users", s.users);
  write_matrix(out, "items", s.items);
}

// Line-oriented reader with positional error messages.
class Reader {
 public:
  explicit Reader(const std::string& text) : lines_(split_on(text, '\n')) {}

  std::vector<std::string_view> next_tokens() {
    while (pos_ < lines_.size()) {
      std::string_view l = lines_[pos_++];
      if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
      if (l.empty()) continue;
      std::vector<std::string_view> toks;
      for (std::string_view t : split_on(l, ' '))
        if (!t.empty()) toks.push_back(t);
      return toks;
    }
    fail("unexpected end of file");
  }

  std::vector<std::string_view> expect(std::string_view keyword, std::size_t n_args) {
    auto toks = next_tokens();
    if (toks.empty() || toks[0] != keyword || toks.size() != n_args + 1) {
      fail("expected '" + std::string(keyword) + "' with " + std::to_string(n_args) + " argument(s)");
    }
    return toks;
  }

  std::string_view value(std::string_view keyword) { return expect(keyword, 1)[1]; }

  long long integer(std::string_view keyword) { return parse_int(value(keyword), keyword); }

  bool at_end() {
    while (pos_ < lines_.size() && (lines_[pos_].empty() || lines_[pos_] == "\r")) ++pos_;
    return pos_ >= lines_.size();
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(pos_) + ": " + what);
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

std::vector<Index> read_ids(Reader& rd, std::string_view key) {
  auto toks = rd.next_tokens();
  if (toks.size() < 2 || toks[0] != key) rd.fail("expected '" + std::string(key) + "'");
  const auto n = static_cast<std::size_t>(parse_int(toks[1], key));
  if (toks.size() != n + 2) rd.fail("id count mismatch");
  std::vector<Index> ids;
  for (std::size_t k = 0; k < n; ++k) ids.push_back(parse_int(toks[k + 2], key));
  return ids;
}

FactorMatrix read_matrix(Reader& rd, std::string_view name) {
  auto head = rd.expect("matrix", 3);
  if (head[1] != name) rd.fail("expected matrix '" + std::string(name) + "'");
  const Index rows = parse_int(head[2], "rows");
  const Index cols = parse_int(head[3], "cols");
  FactorMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    auto toks = rd.next_tokens();
    if (static_cast<Index>(toks.size()) != cols) rd.fail("row width mismatch");
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_hex_double(toks[static_cast<std::size_t>(c)]);
  }
  return m;
}

FieldMatrix read_field_matrix(Reader& rd) {
  auto head = rd.expect("field", 2);
  const Index rows = parse_int(head[1], "rows");
  const Index cols = parse_int(head[2], "cols");
  FieldMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    auto toks = rd.next_tokens();
    if (static_cast<Index>(toks.size()) != cols) rd.fail("row width mismatch");
    for (Index c = 0; c < cols; ++c) {
      std::string_view t = toks[static_cast<std::size_t>(c)];
      std::uint64_t v = 0;
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) rd.fail("bad field element");
      m(r, c) = v;
    }
  }
  return m;
}

std::vector<Payload> read_payloads(Reader& rd, std::string_view key) {
  const auto n = rd.integer(key);
  std::vector<Payload> out;
  for (long long k = 0; k < n; ++k) {
    auto head = rd.expect("payload", 2);
    Payload p;
    p.tag = std::string(head[1]);
    if (head[2] == "plain") {
      p.kind = Payload::Kind::kPlain;
    } else if (head[2] == "masked") {
      p.kind = Payload::Kind::kMasked;
    } else {
      rd.fail("unknown payload kind");
    }
    p.ids = read_ids(rd, "ids");
    if (p.kind == Payload::Kind::kPlain) {
      p.plain = read_matrix(rd, "value");
    } else {
      p.masked = read_field_matrix(rd);
    }
    out.push_back(std::move(p));
  }
  return out;
}

LocalState read_state(Reader& rd, std::string_view key) {
  if (rd.value("state") != key) rd.fail("expected state '" + std::string(key) + "'");
  LocalState s;
  s.users = read_matrix(rd, "users");
  s.items = read_matrix(rd, "items");
  return s;
}

void check_version(Reader& rd, std::string_view magic, int version) {
  auto toks = rd.next_tokens();
  if (toks.size() != 2 || toks[0] != magic) {
    throw Error(ErrorCode::kParseError, "not a " + std::string(magic) + " file");
  }
  if (parse_int(toks[1], "schema version") != version) {
    throw Error(ErrorCode::kSchemaVersion, std::string(magic) + " schema version " +
                                               std::string(toks[1]) + " is not supported (expected " +
                                               std::to_string(version) + ")");
  }
}

}  // namespace

void write_matrix(std::string& out, std::string_view name, const FactorMatrix& m) {
  out.append("matrix ").append(name).append(" ").append(std::to_string(m.rows())).append(" ")
      .append(std::to_string(m.cols())).append("\n");
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out.append(" ");
      out.append(hex_double(m(r, c)));
    }
    out.append("\n");
  }
}

std::string serialize_transcript(const Transcript& t) {
  const RunHeader& h = t.header;
  const FedConfig& c = h.config;
  std::string out;
  line(out, "fedmf-transcript", std::to_string(kTranscriptSchemaVersion));
  line(out, "scheme", to_string(h.scheme));
  line(out, "n_users", std::to_string(h.n_users));
  line(out, "n_items", std::to_string(h.n_items));
  line(out, "rounds", std::to_string(c.rounds));
  line(out, "local_steps", std::to_string(c.local_steps));
  line(out, "minibatch", to_string(c.minibatch));
  line(out, "seed", std::to_string(c.seed));
  line(out, "d", std::to_string(c.hp.d));
  line(out, "gamma", hex_double(c.hp.gamma));
  line(out, "lambda_u", hex_double(c.hp.lambda_u));
  line(out, "lambda_v", hex_double(c.hp.lambda_v));
  line(out, "defense", to_string(c.defense.kind));
  line(out, "field_bits", std::to_string(c.defense.secureagg.field_bits));
  line(out, "frac_bits", std::to_string(c.defense.secureagg.frac_bits));
  line(out, "mask_seed", std::to_string(c.defense.secureagg.mask_seed));
  line(out, "clip_norm", hex_double(c.defense.dp.clip_norm));
  line(out, "sigma", hex_double(c.defense.dp.sigma));
  line(out, "noise_seed", std::to_string(c.defense.dp.noise_seed));
  write_ids(out, "aligned", h.aligned_users);
  write_ids(out, "unaligned", h.unaligned_users);
  line(out, "round_count", std::to_string(t.rounds.size()));
  for (const RoundTranscript& r : t.rounds) {
    line(out, "round", std::to_string(r.round));
    for (Party p : {Party::kA, Party::kB}) {
      const PartyRecord& pr = r.party(p);
      line(out, "party", to_string(p));
      write_state(out, "before", pr.before);
      write_state(out, "after", pr.after);
      write_payloads(out, "sent", pr.sent);
      write_payloads(out, "received", pr.received);
    }
  }
  line(out, "end", "transcript");
  return out;
}

Transcript parse_transcript(const std::string& text) {
  Reader rd(text);
  check_version(rd, "fedmf-transcript", kTranscriptSchemaVersion);
  Transcript t;
  RunHeader& h = t.header;
  FedConfig& c = h.config;
  h.scheme = parse_scheme(rd.value("scheme"));
  h.n_users = rd.integer("n_users");
  h.n_items = rd.integer("n_items");
  c.rounds = rd.integer("rounds");
  c.local_steps = rd.integer("local_steps");
  c.minibatch = parse_minibatch_rule(rd.value("minibatch"));
  c.seed = static_cast<std::uint64_t>(rd.integer("seed"));
  c.hp.d = rd.integer("d");
  c.hp.gamma = parse_hex_double(rd.value("gamma"));
  c.hp.lambda_u = parse_hex_double(rd.value("lambda_u"));
  c.hp.lambda_v = parse_hex_double(rd.value("lambda_v"));
  c.defense.kind = parse_defense_kind(rd.value("defense"));
  c.defense.secureagg.field_bits = static_cast<int>(rd.integer("field_bits"));
  c.defense.secureagg.frac_bits = static_cast<int>(rd.integer("frac_bits"));
  c.defense.secureagg.mask_seed = static_cast<std::uint64_t>(rd.integer("mask_seed"));
  c.defense.dp.clip_norm = parse_hex_double(rd.value("clip_norm"));
  c.defense.dp.sigma = parse_hex_double(rd.value("sigma"));
  c.defense.dp.noise_seed = static_cast<std::uint64_t>(rd.integer("noise_seed"));
  h.aligned_users = read_ids(rd, "aligned");
  h.unaligned_users = read_ids(rd, "unaligned");
  const auto n_rounds = rd.integer("round_count");
  for (long long k = 0; k < n_rounds; ++k) {
    RoundTranscript r;
    r.round = rd.integer("round");
    for (Party p : {Party::kA, Party::kB}) {
      if (parse_party(rd.value("party")) != p) rd.fail("party records out of order");
      PartyRecord& pr = r.party(p);
      pr.before = read_state(rd, "before");
      pr.after = read_state(rd, "after");
      pr.sent = read_payloads(rd, "sent");
      pr.received = read_payloads(rd, "received");
    }
    t.rounds.push_back(std::move(r));
  }
  if (rd.value("end") != "transcript") rd.fail("missing end marker");
  return t;
}

std::string serialize_truth(const Transcript& t) {
  std::string out;
  line(out, "fedmf-truth", std::to_string(kTruthSchemaVersion));
  line(out, "round_count", std::to_string(t.rounds.size()));
  for (const RoundTranscript& r : t.rounds) {
    for (Party p : {Party::kA, Party::kB}) {
      const auto& mb = r.party(p).minibatch;
      out.append("minibatch ").append(std::to_string(r.round)).append(" ")
          .append(to_string(p)).append(" ").append(std::to_string(mb.size())).append("\n");
      for (const Rating& x : mb) {
        out.append(std::to_string(x.user)).append(" ").append(std::to_string(x.item))
            .append(" ").append(hex_double(x.value)).append("\n");
      }
    }
  }
  line(out, "end", "truth");
  return out;
}

void parse_truth(const std::string& text, Transcript& t) {
  Reader rd(text);
  check_version(rd, "fedmf-truth", kTruthSchemaVersion);
  const auto n_rounds = rd.integer("round_count");
  if (n_rounds != static_cast<long long>(t.rounds.size())) {
    rd.fail("truth sidecar has " + std::to_string(n_rounds) + " rounds, transcript has " +
            std::to_string(t.rounds.size()));
  }
  for (RoundTranscript& r : t.rounds) {
    for (Party p : {Party::kA, Party::kB}) {
      auto head = rd.expect("minibatch", 3);
      if (parse_int(head[1], "round") != r.round || parse_party(head[2]) != p) {
        rd.fail("minibatch records out of order");
      }
      const auto n = parse_int(head[3], "count");
      auto& mb = r.party(p).minibatch;
      mb.clear();
      for (long long k = 0; k < n; ++k) {
        auto toks = rd.next_tokens();
        if (toks.size() != 3) rd.fail("expected 'user item rating'");
        mb.push_back({parse_int(toks[0], "user"), parse_int(toks[1], "item"),
                      parse_hex_double(toks[2])});
      }
    }
  }
  if (rd.value("end") != "truth") rd.fail("missing end marker");
}

void write_transcript(const Transcript& transcript, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_transcript(transcript));
}

Transcript read_transcript(const std::filesystem::path& path) {
  return parse_transcript(read_file(path));
}

void write_truth(const Transcript& transcript, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_truth(transcript));
}

void read_truth(const std::filesystem::path& path, Transcript& transcript) {
  parse_truth(read_file(path), transcript);
}

}  // namespace fedmf
