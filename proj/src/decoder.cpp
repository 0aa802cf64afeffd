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

#include "dyntemp/decoder.hpp"

#include <exception>
#include <string>

#include "dyntemp/error.hpp"

namespace dyntemp {

void DecodeRequest::validate(std::size_t vocab_size) const {
  policy.validate();
  if (max_new_tokens < 1) throw InputError("max_new_tokens must be >= 1");
  if (eos_token >= vocab_size) {
    throw InputError("eos token " + std::to_string(eos_token) + " outside vocabulary of size " +
                     std::to_string(vocab_size));
  }
}

namespace {

template <typename Fn>
auto at_step(std::size_t step, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DecodeError&) {
    throw;
  } catch (const std::exception& e) {
    throw DecodeError(e.what(), step);
  }
}

void check_vocab(const LogitVector& logits, std::size_t expected, std::size_t step) {
  if (logits.size() != expected) {
    throw DecodeError("source returned " + std::to_string(logits.size()) +
                          " logits, vocabulary has " + std::to_string(expected),
                      step);
  }
}

}  // namespace

DecodeResult decode(const LogitSource& source, const DecodeRequest& request) {
  const std::size_t vocab = source.vocab_size();
  request.validate(vocab);
  const TemperaturePolicy& policy = request.policy;

  DecodeResult result;
  RandomStream rng(request.seed);
  double instance_temperature = -1.0;

  for (std::size_t step = 0; step < request.max_new_tokens; ++step) {
    const LogitVector logits =
        at_step(step, [&] { return source.logits(request.prompt, result.tokens); });
    check_vocab(logits, vocab, step);

    StepDecision decision;
    const CategoricalDistribution base = softmax_with_temperature(logits, 1.0);
    decision.entropy_nats = entropy_nats(base);
    decision.uncertainty = uncertainty_from_top1(base.top1());

    switch (policy.kind) {
      case PolicyKind::Fixed:
        decision.temperature = policy.t0;
        break;
      case PolicyKind::EDT:
        decision.temperature = edt_temperature(decision.entropy_nats, policy);
        break;
      case PolicyKind::InstanceEDT:
        if (step == 0) instance_temperature = edt_temperature(decision.entropy_nats, policy);
        decision.temperature = instance_temperature;
        break;
      case PolicyKind::UDT:
        decision.temperature = udt_temperature(base.top1(), policy);
        break;
      case PolicyKind::KLD: {
        const LogitVector uncond =
            at_step(step, [&] { return source.unconditional_logits(result.tokens); });
        check_vocab(uncond, vocab, step);
        const double kl = at_step(step, [&] {
          return kl_divergence(base, softmax_with_temperature(uncond, 1.0));
        });
        decision.kl_divergence = kl;
        decision.temperature = kld_temperature(kl, policy);
        break;
      }
    }

    if (decision.temperature == 0.0) {
      decision.chosen_token = greedy_argmax(logits);
    } else {
      const CategoricalDistribution scaled =
          softmax_with_temperature(logits, decision.temperature);
      decision.chosen_token = sample_token(top_p_filter(scaled, policy.top_p), rng);
    }

    result.steps.push_back(decision);
    if (decision.chosen_token == request.eos_token) {
      result.terminated_by = Termination::Eos;
      return result;
    }
    result.tokens.push_back(decision.chosen_token);
  }
  result.terminated_by = Termination::MaxLength;
  return result;
}

std::vector<DecodeResult> decode_k(const LogitSource& source, const DecodeRequest& request,
                                   std::size_t k, std::uint64_t instance) {
  if (k < 1) throw InputError("k must be >= 1");
  std::vector<DecodeResult> results;
  results.reserve(k);
  DecodeRequest sample_request = request;
  for (std::size_t i = 0; i < k; ++i) {
    sample_request.seed = derive_seed(request.seed, instance, i);
    results.push_back(decode(source, sample_request));
  }
  return results;
}

std::vector<double> teacher_force_entropies(const LogitSource& source,
                                            std::span<const TokenId> prompt,
                                            std::span<const TokenId> reference) {
  if (reference.empty()) throw InputError("teacher forcing needs a non-empty reference");
  std::vector<double> entropies;
  entropies.reserve(reference.size());
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const LogitVector logits =
        at_step(t, [&] { return source.logits(prompt, reference.first(t)); });
    entropies.push_back(entropy_nats(softmax_with_temperature(logits, 1.0)));
  }
  return entropies;
}

}  // namespace dyntemp
