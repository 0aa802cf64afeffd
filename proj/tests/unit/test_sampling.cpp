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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dyntemp/error.hpp"
#include "dyntemp/sampling.hpp"
#include "test_support.hpp"

using namespace dyntemp;
using dyntemp::testing::Gen;

namespace {

void check_probs(const CategoricalDistribution& dist, const std::vector<double>& expected,
                 double tol) {
  REQUIRE(dist.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(dist[i] - expected[i]) <= tol);
  }
}

double mass(const CategoricalDistribution& d) {
  return std::accumulate(d.probs().begin(), d.probs().end(), 0.0);
}

}  // namespace

TEST_CASE("LogitVector rejects non-finite and short inputs") {
  CHECK_THROWS_AS(LogitVector({1.0, std::numeric_limits<double>::quiet_NaN()}), InputError);
  CHECK_THROWS_AS(LogitVector({1.0, std::numeric_limits<double>::infinity()}), InputError);
  CHECK_THROWS_AS(LogitVector({1.0}), InputError);
  CHECK_NOTHROW(LogitVector({1.0, -1e300}));
}

TEST_CASE("CategoricalDistribution validates mass and sign") {
  CHECK_THROWS_AS(CategoricalDistribution({0.5, 0.6}), InputError);
  CHECK_THROWS_AS(CategoricalDistribution({1.2, -0.2}), InputError);
  CHECK_NOTHROW(CategoricalDistribution({0.5, 0.5 + 5e-10}));
  const CategoricalDistribution d({0.0, 0.7, 0.3});
  CHECK(d.top1() == 0.7);
  CHECK(d.support() == std::vector<TokenId>{1, 2});
}

TEST_CASE("softmax_with_temperature examples") {
  check_probs(softmax_with_temperature(LogitVector({1, 1, 1, 1}), 0.5), {0.25, 0.25, 0.25, 0.25},
              1e-15);
  check_probs(softmax_with_temperature(LogitVector({std::log(2.0), 0.0}), 1.0),
              {2.0 / 3.0, 1.0 / 3.0}, 1e-15);
  // 50-digit oracle (tests/oracles/freeze_values.py).
  check_probs(softmax_with_temperature(LogitVector({3.0, 1.0, 0.0}), 0.5),
              {0.9796292071670795, 0.017942534803329194, 0.002428258029591337}, 1e-15);
}

TEST_CASE("softmax_with_temperature errors") {
  const LogitVector l({0.0, 1.0});
  CHECK_THROWS_AS(softmax_with_temperature(l, 0.0), DomainError);
  CHECK_THROWS_AS(softmax_with_temperature(l, -1.0), DomainError);
  CHECK_THROWS_AS(softmax_with_temperature(l, std::numeric_limits<double>::infinity()),
                  DomainError);
}

TEST_CASE("softmax stays finite for extreme logits and small temperatures") {
  const auto d = softmax_with_temperature(LogitVector({1000.0, -1000.0, 999.0}), 1e-4);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 0.0);
  CHECK(std::abs(mass(d) - 1.0) <= 1e-12);
}

TEST_CASE("softmax properties over random inputs") {
  Gen gen(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t v = 2 + gen.index(40);
    const auto raw = gen.vector(v, -10.0, 10.0);
    const double t = gen.uniform(0.05, 10.0);
    const LogitVector logits(raw);
    const auto scaled = softmax_with_temperature(logits, t);

    std::vector<double> divided(raw);
    for (auto& x : divided) x /= t;
    const auto unit = softmax_with_temperature(LogitVector(divided), 1.0);

    const double shift = gen.uniform(-50.0, 50.0);
    std::vector<double> shifted(raw);
    for (auto& x : shifted) x += shift;
    const auto moved = softmax_with_temperature(LogitVector(shifted), t);

    CHECK(std::abs(mass(scaled) - 1.0) <= 1e-9);
    for (std::size_t i = 0; i < v; ++i) {
      CHECK(std::abs(scaled[i] - unit[i]) <= 1e-12);
      CHECK(std::abs(scaled[i] - moved[i]) <= 1e-12);
    }
    const auto argmax = static_cast<TokenId>(
        std::max_element(scaled.probs().begin(), scaled.probs().end()) - scaled.probs().begin());
    CHECK(argmax == greedy_argmax(logits));
  }
}

TEST_CASE("greedy_argmax examples") {
  CHECK(greedy_argmax(LogitVector({0.1, 0.9, 0.3})) == 1);
  CHECK(greedy_argmax(LogitVector({5, 5})) == 0);

  // Oracle: order ids by (value desc, id asc) and take the first.
  Gen gen(64);
  for (int trial = 0; trial < 50; ++trial) {
    auto values = gen.vector(64, -3.0, 3.0);
    values[gen.index(64)] = values[gen.index(64)];  // occasional ties
    std::vector<TokenId> ids(64);
    std::iota(ids.begin(), ids.end(), TokenId{0});
    std::sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) {
      return values[a] != values[b] ? values[a] > values[b] : a < b;
    });
    CHECK(greedy_argmax(LogitVector(values)) == ids.front());
  }
}

TEST_CASE("entropy_nats examples and bounds") {
  CHECK(entropy_nats(CategoricalDistribution({0.25, 0.25, 0.25, 0.25})) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(entropy_nats(CategoricalDistribution({0.0, 1.0, 0.0})) == 0.0);
  CHECK(entropy_nats(CategoricalDistribution({0.5, 0.25, 0.25})) ==
        doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(entropy_nats(CategoricalDistribution({0.5, 0.25, 0.25})) - 1.039721) < 1e-6);

  Gen gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t v = 2 + gen.index(30);
    const double h = entropy_nats(CategoricalDistribution(gen.simplex(v)));
    CHECK(h >= 0.0);
    CHECK(h < std::log(static_cast<double>(v)));
  }
}

TEST_CASE("edt_temperature examples") {
  auto policy = TemperaturePolicy::edt(0.9, 1.0);
  CHECK(std::abs(edt_temperature(1e9, policy) - 0.9) <= 1e-6);

  policy = TemperaturePolicy::edt(1.0, 1.0);
  CHECK(edt_temperature(1.0, policy) == doctest::Approx(0.8).epsilon(1e-15));

  policy = TemperaturePolicy::edt(0.6, 0.1);
  CHECK(std::abs(edt_temperature(std::log(4.0), policy) - 0.5904194700513603) <= 1e-15);

  CHECK(edt_temperature(0.0, policy) == 0.0);
  CHECK(edt_temperature(0.0, TemperaturePolicy::edt(0.6, 0.0)) == 0.6);
  CHECK(edt_temperature(0.37, TemperaturePolicy::edt(0.6, 0.0)) == 0.6);
  CHECK(edt_temperature(1e-6, policy) == kMinTemperature);  // underflow clamps
  CHECK(edt_temperature(0.5, TemperaturePolicy::instance_edt(0.6, 0.1)) ==
        edt_temperature(0.5, policy));
}

TEST_CASE("edt_temperature errors") {
  const auto policy = TemperaturePolicy::edt(0.6, 0.1);
  CHECK_THROWS_AS(edt_temperature(-0.1, policy), DomainError);
  CHECK_THROWS_AS(edt_temperature(1.0, TemperaturePolicy::fixed(0.6)), DomainError);
  auto bad = policy;
  bad.n_base = 1.0;
  CHECK_THROWS_AS(edt_temperature(1.0, bad), InputError);
}

TEST_CASE("edt_temperature is monotone in entropy and theta") {
  Gen gen(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const double t0 = gen.uniform(0.1, 2.0);
    const double theta = gen.uniform(0.01, 1.0);
    const double h = gen.uniform(0.05, 8.0);
    const double t = edt_temperature(h, TemperaturePolicy::edt(t0, theta));
    CHECK(t < t0);
    CHECK(edt_temperature(h * 1.01, TemperaturePolicy::edt(t0, theta)) > t);
    CHECK(edt_temperature(h, TemperaturePolicy::edt(t0, theta * 1.01)) < t);
  }
}

TEST_CASE("udt_temperature examples") {
  CHECK(udt_temperature(1.0, TemperaturePolicy::udt(1.0, 0.5)) == 0.0);
  CHECK(udt_temperature(0.75, TemperaturePolicy::udt(1.0, 0.5)) ==
        doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(udt_temperature(0.5, TemperaturePolicy::udt(0.9, 0.1)) - 0.8720419230642324) <=
        1e-15);
  CHECK(udt_temperature(0.6, TemperaturePolicy::udt(0.9, 0.0)) == 0.9);
  CHECK_THROWS_AS(udt_temperature(1.5, TemperaturePolicy::udt(0.9, 0.1)), DomainError);
  CHECK_THROWS_AS(udt_temperature(-0.1, TemperaturePolicy::udt(0.9, 0.1)), DomainError);
  CHECK_THROWS_AS(udt_temperature(0.5, TemperaturePolicy::edt(0.9, 0.1)), DomainError);
}

TEST_CASE("kld_temperature examples") {
  const auto policy = TemperaturePolicy::kld(0.8, 3.0);
  CHECK(kld_temperature(0.0, policy) == 0.8);
  CHECK(std::abs(kld_temperature(3.0, policy) - 0.4) <= 1e-12);
  CHECK(std::abs(kld_temperature(6.0, policy) - 0.2) <= 1e-12);
  CHECK(kld_temperature(1.0, policy) > kld_temperature(1.1, policy));
  CHECK(kld_temperature(1e6, policy) == kMinTemperature);
  CHECK_THROWS_AS(kld_temperature(-1e-3, policy), DomainError);
  CHECK_THROWS_AS(kld_temperature(1.0, TemperaturePolicy::fixed(0.8)), DomainError);
}

TEST_CASE("kl_divergence examples") {
  const CategoricalDistribution p({0.2, 0.3, 0.5});
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(CategoricalDistribution({1.0, 0.0}), CategoricalDistribution({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));

  std::vector<double> pw, qw;
  for (int i = 0; i < 16; ++i) {
    pw.push_back(1 + (7 * i) % 16);
    qw.push_back(2 + (11 * i + 3) % 16);
  }
  const auto norm = [](std::vector<double> w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= total;
    return CategoricalDistribution(w);
  };
  // 50-digit summation oracle.
  CHECK(std::abs(kl_divergence(norm(pw), norm(qw)) - 0.21207623247169796) <= 1e-14);
}

TEST_CASE("kl_divergence errors") {
  CHECK_THROWS_AS(
      kl_divergence(CategoricalDistribution({0.5, 0.5}), CategoricalDistribution({1.0, 0.0})),
      DomainError);
  CHECK_THROWS_AS(kl_divergence(CategoricalDistribution({0.5, 0.5}),
                                CategoricalDistribution({0.2, 0.3, 0.5})),
                  InputError);
  // Zero mass on the p side is fine even where q is zero.
  CHECK(kl_divergence(CategoricalDistribution({1.0, 0.0}), CategoricalDistribution({1.0, 0.0})) ==
        0.0);
}

TEST_CASE("top_p_filter examples") {
  const CategoricalDistribution d({0.5, 0.3, 0.2});
  check_probs(top_p_filter(d, 1.0), {0.5, 0.3, 0.2}, 0.0);
  check_probs(top_p_filter(d, 0.5), {1.0, 0.0, 0.0}, 0.0);
  check_probs(top_p_filter(d, 0.7), {0.625, 0.375, 0.0}, 1e-15);
  // Ties keep the lower id first.
  check_probs(top_p_filter(CategoricalDistribution({0.25, 0.5, 0.25}), 0.5), {0.0, 1.0, 0.0}, 0.0);
  check_probs(top_p_filter(CategoricalDistribution({0.25, 0.5, 0.25}), 0.6),
              {1.0 / 3.0, 2.0 / 3.0, 0.0}, 1e-15);
  CHECK_THROWS_AS(top_p_filter(d, 0.0), DomainError);
  CHECK_THROWS_AS(top_p_filter(d, 1.5), DomainError);
}

TEST_CASE("top_p_filter keeps a descending prefix") {
  Gen gen(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t v = 2 + gen.index(50);
    const CategoricalDistribution d(gen.simplex(v));
    const double p = gen.uniform(0.05, 1.0);
    const auto f = top_p_filter(d, p);
    CHECK(std::abs(mass(f) - 1.0) <= 1e-9);

    double kept_mass = 0.0, min_kept = 2.0, max_dropped = -1.0;
    for (std::size_t i = 0; i < v; ++i) {
      if (f[i] > 0.0) {
        kept_mass += d[i];
        min_kept = std::min(min_kept, d[i]);
      } else {
        max_dropped = std::max(max_dropped, d[i]);
      }
    }
    CHECK(kept_mass >= p - 1e-12);
    CHECK(max_dropped <= min_kept);
    // Minimality: dropping the smallest kept token falls below p.
    if (max_dropped >= 0.0) CHECK(kept_mass - min_kept < p);
  }
}

TEST_CASE("sample_token examples") {
  RandomStream rng(1);
  const CategoricalDistribution one_hot({0.0, 0.0, 0.0, 1.0});
  for (int i = 0; i < 100; ++i) CHECK(sample_token(one_hot, rng) == 3);

  const CategoricalDistribution d({0.1, 0.2, 0.3, 0.4});
  RandomStream a(77), b(77);
  for (int i = 0; i < 100; ++i) CHECK(sample_token(d, a) == sample_token(d, b));
}

TEST_CASE("sample_token frequency oracle") {
  const std::vector<double> target{0.7, 0.2, 0.1};
  const CategoricalDistribution d(target);
  RandomStream rng(12345);
  std::vector<double> counts(3, 0.0);
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) counts[sample_token(d, rng)] += 1.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(counts[i] / kDraws - target[i]) <= 0.01);
    const double expected = target[i] * kDraws;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // 2 degrees of freedom; 13.8 is the 0.999 quantile.
  CHECK(chi2 < 13.8);
}

TEST_CASE("RandomStream is platform independent") {
  // First outputs of mt19937_64 seeded with 5489, and the derived unit value.
  RandomStream rng(5489);
  CHECK(rng.next_u64() == 14514284786278117030ULL);
  RandomStream unit(5489);
  CHECK(unit.next_unit() == static_cast<double>(14514284786278117030ULL >> 11) * 0x1.0p-53);
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("policy kinds round-trip through their names") {
  for (auto kind : {PolicyKind::Fixed, PolicyKind::EDT, PolicyKind::InstanceEDT, PolicyKind::UDT,
                    PolicyKind::KLD}) {
    CHECK(parse_policy_kind(to_string(kind)) == kind);
  }
  CHECK(parse_policy_kind("Instance-EDT") == PolicyKind::InstanceEDT);
  CHECK_THROWS_AS(parse_policy_kind("beam"), InputError);
}

TEST_CASE("TemperaturePolicy validation names the field") {
  auto p = TemperaturePolicy::fixed(0.5);
  CHECK_NOTHROW(p.validate());
  p.t0 = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("t0"), InputError);
  p = TemperaturePolicy::fixed(0.5);
  p.top_p = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("top_p"), InputError);
  p = TemperaturePolicy::fixed(0.5);
  p.sigma = -1.0;  // irrelevant to Fixed but still validated
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("sigma"), InputError);
}
