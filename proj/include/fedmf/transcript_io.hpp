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
#ifndef FEDMF_TRANSCRIPT_IO_HPP_
#define FEDMF_TRANSCRIPT_IO_HPP_

// Text serialization of run transcripts.
//
// transcript file: header + one record per round holding both parties'
// local states and payloads. Minibatches are not written here; they go to a
// separate ground-truth sidecar that only scoring reads. Reals are written as
// hexadecimal floats so a reload is bit-exact.

#include <filesystem>
#include <string>

#include "fedmf/fedsim.hpp"

namespace fedmf {

inline constexpr int kTranscriptSchemaVersion = 1;
inline constexpr int kTruthSchemaVersion = 1;

std::string serialize_transcript(const Transcript& transcript);
Transcript parse_transcript(const std::string& text);

std::string serialize_truth(const Transcript& transcript);
/// Fills the minibatch of every party record in `transcript`.
void parse_truth(const std::string& text, Transcript& transcript);

void write_transcript(const Transcript& transcript, const std::filesystem::path& path);
Transcript read_transcript(const std::filesystem::path& path);
void write_truth(const Transcript& transcript, const std::filesystem::path& path);
void read_truth(const std::filesystem::path& path, Transcript& transcript);

std::string hex_double(double value);
double parse_hex_double(std::string_view token);

/// Matrix block used by transcripts and model files:
/// "matrix <name> <rows> <cols>" followed by one line per row.
void write_matrix(std::string& out, std::string_view name, const FactorMatrix& m);

}  // namespace fedmf

#endif  // FEDMF_TRANSCRIPT_IO_HPP_
