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

#include "dyntemp/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "dyntemp/error.hpp"

namespace dyntemp {

namespace {

std::string describe(double v) { return std::to_string(v); }

}  // namespace

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InputError("logit vector needs at least 2 entries, got " +
                     std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InputError("logit " + std::to_string(i) + " is not finite");
    }
  }
}

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw InputError("distribution is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InputError("probability " + std::to_string(i) + " outside [0, 1]: " + describe(p));
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw InputError("distribution mass is " + describe(total) + ", expected 1");
  }
}

double CategoricalDistribution::top1() const {
  return *std::max_element(probs_.begin(), probs_.end());
}

std::vector<TokenId> CategoricalDistribution::support() const {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) ids.push_back(static_cast<TokenId>(i));
  }
  return ids;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Fixed: return "fixed";
    case PolicyKind::EDT: return "edt";
    case PolicyKind::InstanceEDT: return "instance_edt";
    case PolicyKind::UDT: return "udt";
    case PolicyKind::KLD: return "kld";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(lower.begin(), lower.end(), '-', '_');
  if (lower == "fixed") return PolicyKind::Fixed;
  if (lower == "edt") return PolicyKind::EDT;
  if (lower == "instance_edt") return PolicyKind::InstanceEDT;
  if (lower == "udt") return PolicyKind::UDT;
  if (lower == "kld") return PolicyKind::KLD;
  throw InputError("unknown policy kind '" + std::string(name) +
                   "' (expected fixed, edt, instance_edt, udt or kld)");
}

void TemperaturePolicy::validate() const {
  if (!std::isfinite(t0) || t0 <= 0.0) throw InputError("t0 must be > 0, got " + describe(t0));
  if (!std::isfinite(theta) || theta < 0.0) {
    throw InputError("theta must be >= 0, got " + describe(theta));
  }
  if (!(n_base > 0.0 && n_base < 1.0)) {
    throw InputError("n_base must lie strictly inside (0, 1), got " + describe(n_base));
  }
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw InputError("sigma must be > 0, got " + describe(sigma));
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw InputError("top_p must lie in (0, 1], got " + describe(top_p));
  }
}

TemperaturePolicy TemperaturePolicy::fixed(double t0) {
  TemperaturePolicy p;
  p.kind = PolicyKind::Fixed;
  p.t0 = t0;
  return p;
}

TemperaturePolicy TemperaturePolicy::edt(double t0, double theta) {
  TemperaturePolicy p;
  p.kind = PolicyKind::EDT;
  p.t0 = t0;
  p.theta = theta;
  return p;
}

TemperaturePolicy TemperaturePolicy::instance_edt(double t0, double theta) {
  TemperaturePolicy p = edt(t0, theta);
  p.kind = PolicyKind::InstanceEDT;
  return p;
}

TemperaturePolicy TemperaturePolicy::udt(double t0, double theta) {
  TemperaturePolicy p = edt(t0, theta);
  p.kind = PolicyKind::UDT;
  return p;
}

TemperaturePolicy TemperaturePolicy::kld(double t0, double sigma) {
  TemperaturePolicy p;
  p.kind = PolicyKind::KLD;
  p.t0 = t0;
  p.sigma = sigma;
  return p;
}

CategoricalDistribution softmax_with_temperature(const LogitVector& logits, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("temperature must be finite and > 0, got " + describe(t) +
                      " (use greedy_argmax for t = 0)");
  }
  const auto values = logits.values();
  const double max_logit = *std::max_element(values.begin(), values.end());
  std::vector<double> probs(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    probs[i] = std::exp((values[i] - max_logit) / t);
    total += probs[i];
  }
  // total >= 1 because the max entry contributes exp(0).
  for (double& p : probs) p /= total;
  return CategoricalDistribution(std::move(probs));
}

TokenId greedy_argmax(const LogitVector& logits) {
  const auto values = logits.values();
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

double entropy_nats(const CategoricalDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  // Rounding can leave a one-hot distribution at -0.0 or a tiny negative.
  return std::max(h, 0.0);
}

double uncertainty_from_top1(double top1_prob) {
  if (!(top1_prob >= 0.0 && top1_prob <= 1.0)) {
    throw DomainError("top-1 probability must lie in [0, 1], got " + describe(top1_prob));
  }
  return std::sqrt(1.0 - top1_prob);
}

namespace {

// Shared tail of the EDT and UDT schedules: T0 * n^(theta / signal).
double exponential_schedule(double signal, const TemperaturePolicy& policy) {
  if (policy.theta == 0.0) return policy.t0;
  if (signal == 0.0) return 0.0;
  const double t = policy.t0 * std::pow(policy.n_base, policy.theta / signal);
  return std::min(std::max(t, kMinTemperature), policy.t0);
}

}  // namespace

double edt_temperature(double entropy, const TemperaturePolicy& policy) {
  if (policy.kind != PolicyKind::EDT && policy.kind != PolicyKind::InstanceEDT) {
    throw DomainError("edt_temperature needs an edt or instance_edt policy, got " +
                      std::string(to_string(policy.kind)));
  }
  policy.validate();
  if (!(entropy >= 0.0)) throw DomainError("entropy must be >= 0, got " + describe(entropy));
  return exponential_schedule(entropy, policy);
}

double udt_temperature(double top1_prob, const TemperaturePolicy& policy) {
  if (policy.kind != PolicyKind::UDT) {
    throw DomainError("udt_temperature needs a udt policy, got " +
                      std::string(to_string(policy.kind)));
  }
  policy.validate();
  return exponential_schedule(uncertainty_from_top1(top1_prob), policy);
}

double kld_temperature(double kl, const TemperaturePolicy& policy) {
  if (policy.kind != PolicyKind::KLD) {
    throw DomainError("kld_temperature needs a kld policy, got " +
                      std::string(to_string(policy.kind)));
  }
  policy.validate();
  if (!(kl >= 0.0) || std::isinf(kl)) {
    throw DomainError("KL divergence must be finite and >= 0, got " + describe(kl));
  }
  return std::max(policy.t0 * std::pow(0.5, kl / policy.sigma), kMinTemperature);
}

double kl_divergence(const CategoricalDistribution& p, const CategoricalDistribution& q) {
  if (p.size() != q.size()) {
    throw InputError("KL divergence over different vocabulary sizes: " +
                     std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw DomainError("q has no mass at id " + std::to_string(i) + " where p > 0");
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // Gibbs' inequality; negative values are summation noise.
  return std::max(kl, 0.0);
}

CategoricalDistribution top_p_filter(const CategoricalDistribution& dist, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("top-p must lie in (0, 1], got " + describe(p));
  if (p == 1.0) return dist;

  const auto probs = dist.probs();
  std::vector<TokenId> order(probs.size());
  std::iota(order.begin(), order.end(), TokenId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return probs[a] > probs[b]; });

  std::size_t kept = 0;
  double mass = 0.0;
  while (kept < order.size() && probs[order[kept]] > 0.0) {
    mass += probs[order[kept]];
    ++kept;
    if (mass >= p) break;
  }

  std::vector<double> filtered(probs.size(), 0.0);
  for (std::size_t i = 0; i < kept; ++i) filtered[order[i]] = probs[order[i]] / mass;
  return CategoricalDistribution(std::move(filtered));
}

TokenId sample_token(const CategoricalDistribution& dist, RandomStream& rng) {
  const auto probs = dist.probs();
  double total = 0.0;
  std::size_t last_nonzero = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += probs[i];
    if (probs[i] > 0.0) last_nonzero = i;
  }
  if (last_nonzero == probs.size() || !(total > 0.0)) {
    throw InternalError("cannot sample from a distribution with no mass");
  }
  const double u = rng.next_unit() * total;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == 0.0) continue;
    cumulative += probs[i];
    if (u < cumulative) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last_nonzero);
}

}  // namespace dyntemp
