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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyntemp/random.hpp"

namespace dyntemp {

using TokenId = std::uint32_t;

/// Nonzero schedule outputs are clamped to at least this value.
inline constexpr double kMinTemperature = 1e-4;

/// Tolerance on the total mass of a CategoricalDistribution.
inline constexpr double kMassTolerance = 1e-9;

/// Raw per-token scores from one decode step. At least two entries, all finite.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Normalized probabilities over the vocabulary.
class CategoricalDistribution {
 public:
  /// Validates non-negativity and unit mass (within kMassTolerance).
  explicit CategoricalDistribution(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

  /// Largest probability (p1).
  double top1() const;

  /// Ids with nonzero probability, ascending.
  std::vector<TokenId> support() const;

 private:
  std::vector<double> probs_;
};

enum class PolicyKind { Fixed, EDT, InstanceEDT, UDT, KLD };

std::string_view to_string(PolicyKind kind);
/// Accepts "fixed", "edt", "instance_edt" (or "instance-edt"), "udt", "kld"; case-insensitive.
PolicyKind parse_policy_kind(std::string_view name);

/// A temperature schedule and its hyperparameters. Fields that the kind does
/// not use are ignored but still validated.
struct TemperaturePolicy {
  PolicyKind kind = PolicyKind::Fixed;
  double t0 = 1.0;       // baseline / upper temperature
  double theta = 0.0;    // EDT/UDT sharpness
  double n_base = 0.8;   // base of the exponential schedule, in (0, 1)
  double sigma = 1.0;    // KLD half-life
  double top_p = 0.95;

  /// Throws InputError naming the offending field.
  void validate() const;

  static TemperaturePolicy fixed(double t0);
  static TemperaturePolicy edt(double t0, double theta);
  static TemperaturePolicy instance_edt(double t0, double theta);
  static TemperaturePolicy udt(double t0, double theta);
  static TemperaturePolicy kld(double t0, double sigma);
};

/// Per-step trace entry of the decoding pipeline.
struct StepDecision {
  double temperature = 0.0;
  double entropy_nats = 0.0;
  double uncertainty = 0.0;
  std::optional<double> kl_divergence;  // KLD policy only
  TokenId chosen_token = 0;

  bool operator==(const StepDecision&) const = default;
};

/// Softmax of logits / t, max-subtracted before exponentiation.
/// Throws DomainError if t <= 0 or t is not finite.
CategoricalDistribution softmax_with_temperature(const LogitVector& logits, double t);

/// Index of the largest logit; ties go to the lowest index.
TokenId greedy_argmax(const LogitVector& logits);

/// -sum p ln p in nats, with 0 ln 0 = 0.
double entropy_nats(const CategoricalDistribution& dist);

/// sqrt(1 - p1), the confidence signal of the UDT schedule.
double uncertainty_from_top1(double top1_prob);

/// T0 * n_base^(theta / H). Returns T0 when theta = 0, and 0 when H = 0
/// (the caller decodes greedily). Nonzero results are clamped to
/// [kMinTemperature, T0].
double edt_temperature(double entropy_nats, const TemperaturePolicy& policy);

/// T0 * n_base^(theta / U) with U = sqrt(1 - p1). Same limits as edt_temperature.
double udt_temperature(double top1_prob, const TemperaturePolicy& policy);

/// T0 * (1/2)^(KL / sigma), floored at kMinTemperature.
double kld_temperature(double kl, const TemperaturePolicy& policy);

/// sum p ln(p / q) with 0 ln(0 / q) = 0. Throws DomainError where q_i = 0 < p_i.
double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q);

/// Nucleus filter: keeps the shortest descending-probability prefix (ties by
/// lowest id) whose mass reaches p, then renormalizes. p = 1 is the identity.
CategoricalDistribution top_p_filter(const CategoricalDistribution& dist, double p);

/// Inverse-CDF draw over ids in index order. Consumes exactly one value from rng.
TokenId sample_token(const CategoricalDistribution& dist, RandomStream& rng);

}  // namespace dyntemp
