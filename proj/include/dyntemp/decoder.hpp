// Copyright 2026 The dyntemp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyntemp/sampling.hpp"

namespace dyntemp {

/// Anything that scores the next token. Implementations must be deterministic
/// and safe to share read-only between threads.
class LogitSource {
 public:
  virtual ~LogitSource() = default;

  virtual std::size_t vocab_size() const = 0;

  /// Next-token logits given the prompt and the tokens generated so far.
  virtual LogitVector logits(std::span<const TokenId> prompt,
                             std::span<const TokenId> generated) const = 0;

  /// Next-token logits with the prompt dropped. Defaults to logits({}, generated).
  virtual LogitVector unconditional_logits(std::span<const TokenId> generated) const {
    return logits({}, generated);
  }
};

/// A LogitSource that also owns a text <-> token mapping; what the harness needs
/// to run text datasets end to end.
class TextLogitSource : public LogitSource {
 public:
  virtual std::vector<TokenId> tokenize(std::string_view text) const = 0;
  virtual std::string detokenize(std::span<const TokenId> tokens) const = 0;
  virtual TokenId eos_token() const = 0;
};

struct DecodeRequest {
  std::vector<TokenId> prompt;
  TemperaturePolicy policy;
  std::size_t max_new_tokens = 32;
  TokenId eos_token = 0;
  std::uint64_t seed = 0;

  void validate(std::size_t vocab_size) const;
};

enum class Termination { Eos, MaxLength };

struct DecodeResult {
  std::vector<TokenId> tokens;      // eos excluded
  std::vector<StepDecision> steps;  // one per sampling step, the eos step included
  Termination terminated_by = Termination::MaxLength;

  bool operator==(const DecodeResult&) const = default;
};

/// Autoregressive loop. Per step: base softmax at T = 1, confidence signal from
/// the base distribution, temperature from the policy, softmax at that
/// temperature, top-p, sample. A zero temperature decodes greedily without
/// touching the random stream.
///
/// Fixed uses t0 throughout; InstanceEDT computes the temperature from the
/// first step's entropy and keeps it; KLD compares the conditional base
/// distribution against the source's unconditional one.
DecodeResult decode(const LogitSource& source, const DecodeRequest& request);

/// k independent decodes. Sample i uses derive_seed(request.seed, instance, i).
std::vector<DecodeResult> decode_k(const LogitSource& source, const DecodeRequest& request,
                                   std::size_t k, std::uint64_t instance = 0);

/// Entropy (nats) of the base distribution at every reference position, with
/// the gold prefix as context. Element 0 is the first-token entropy.
std::vector<double> teacher_force_entropies(const LogitSource& source,
                                            std::span<const TokenId> prompt,
                                            std::span<const TokenId> reference);

}  // namespace dyntemp
