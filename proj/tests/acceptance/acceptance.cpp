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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dyntemp/decoder.hpp"
#include "dyntemp/harness.hpp"
#include "dyntemp/metrics.hpp"
#include "dyntemp/sampling.hpp"
#include "dyntemp/toy_lm.hpp"

namespace fs = std::filesystem;
using namespace dyntemp;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

const fs::path kData = DYNTEMP_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& name, double limit_seconds,
            const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_seconds > 0 && seconds >= limit_seconds) {
    outcome.pass = false;
    outcome.detail += fmt::format("; over the {:g} s limit", limit_seconds);
  }
  if (!outcome.pass) ++failures;
  std::printf("%s criterion %d: %s (%s; %.3f s)\n", outcome.pass ? "PASS" : "FAIL", id,
              name.c_str(), outcome.detail.c_str(), seconds);
  std::fflush(stdout);
}

double rel_err(double got, const Big& want) {
  if (want == 0) return got == 0.0 ? 0.0 : 1.0;
  return static_cast<double>(abs((Big(got) - want) / want));
}

Big clamp_schedule(const Big& t, double t0) {
  const Big lo(kMinTemperature), hi(t0);
  return t < lo ? lo : (t > hi ? hi : t);
}

Outcome schedule_correctness() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto uni = [&](double a, double b) { return a + (b - a) * u01(gen); };
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t0 = uni(0.05, 2.0);
    const double theta = uni(0.001, 2.0);
    const double h = uni(0.01, 10.0);
    const double p1 = uni(0.0, 0.999);
    const double kl = uni(0.0, 20.0);
    const double sigma = uni(0.1, 100.0);
    const Big base("0.8");

    const Big edt_ref = clamp_schedule(Big(t0) * pow(base, Big(theta) / Big(h)), t0);
    worst = std::max(worst, rel_err(edt_temperature(h, TemperaturePolicy::edt(t0, theta)), edt_ref));

    const Big u = sqrt(Big(1) - Big(p1));
    const Big udt_ref = clamp_schedule(Big(t0) * pow(base, Big(theta) / u), t0);
    worst = std::max(worst, rel_err(udt_temperature(p1, TemperaturePolicy::udt(t0, theta)), udt_ref));

    const Big kld_ref = clamp_schedule(Big(t0) * pow(Big("0.5"), Big(kl) / Big(sigma)), t0);
    worst = std::max(worst, rel_err(kld_temperature(kl, TemperaturePolicy::kld(t0, sigma)), kld_ref));
  }
  double half_life = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t0 = uni(0.05, 2.0), sigma = uni(0.01, 1000.0);
    half_life = std::max(half_life,
                         std::abs(kld_temperature(sigma, TemperaturePolicy::kld(t0, sigma)) - t0 / 2));
  }
  const bool ok = worst <= 1e-10 && half_life <= 1e-12;
  return {ok, fmt::format("3000 schedule values, max rel err {:.2e} <= 1e-10; KL = sigma gives T0/2 "
                          "within {:.2e} <= 1e-12",
                          worst, half_life)};
}

Outcome monotonicity() {
  std::mt19937_64 gen(202);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto uni = [&](double a, double b) { return a + (b - a) * u01(gen); };
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const double t0 = uni(0.1, 2.0);
    const double theta = uni(0.01, 1.5);
    const double h = uni(0.1, 10.0);
    const double h2 = h * uni(1.01, 2.0);
    const double theta2 = theta * uni(1.01, 2.0);
    const double t = edt_temperature(h, TemperaturePolicy::edt(t0, theta));
    if (!(edt_temperature(h2, TemperaturePolicy::edt(t0, theta)) > t)) ++violations;
    if (!(edt_temperature(h, TemperaturePolicy::edt(t0, theta2)) < t)) ++violations;
  }
  return {violations == 0,
          fmt::format("10000 parameter pairs, {} violations of T rising in entropy and falling in theta",
                      violations)};
}

// Empirical frequencies of `draws` samples from `dist` against `target`.
double max_freq_error(const CategoricalDistribution& dist, const std::vector<double>& target,
                      std::uint64_t seed, int draws = 100000) {
  RandomStream rng(seed);
  std::vector<double> counts(dist.size(), 0.0);
  for (int i = 0; i < draws; ++i) counts[sample_token(dist, rng)] += 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    worst = std::max(worst, std::abs(counts[i] / draws - target[i]));
  }
  return worst;
}

Outcome sampling_oracle() {
  const std::vector<double> base{0.7, 0.2, 0.1};
  const double plain = max_freq_error(CategoricalDistribution(base), base, 1);

  // T = 0.5 squares the probabilities before renormalizing.
  std::vector<double> logits, squared;
  for (double p : base) {
    logits.push_back(std::log(p));
    squared.push_back(p * p);
  }
  const double sq_total = std::accumulate(squared.begin(), squared.end(), 0.0);
  for (auto& x : squared) x /= sq_total;
  const double tempered =
      max_freq_error(softmax_with_temperature(LogitVector(logits), 0.5), squared, 2);

  // top-p 0.8 on [0.5, 0.3, 0.15, 0.05] keeps the first two: [0.625, 0.375, 0, 0].
  const double nucleus = max_freq_error(
      top_p_filter(CategoricalDistribution({0.5, 0.3, 0.15, 0.05}), 0.8), {0.625, 0.375, 0.0, 0.0}, 3);

  // Both: T = 2 on log[0.5, 0.3, 0.15, 0.05] gives weights sqrt(p); top-p 0.7 on that.
  const std::vector<double> p4{0.5, 0.3, 0.15, 0.05};
  std::vector<double> l4, roots;
  for (double p : p4) {
    l4.push_back(std::log(p));
    roots.push_back(std::sqrt(p));
  }
  const double root_total = std::accumulate(roots.begin(), roots.end(), 0.0);
  std::vector<double> flat;
  for (double r : roots) flat.push_back(r / root_total);
  // flat ~ [0.388, 0.300, 0.212, 0.097]; cumulative passes 0.7 at the third token.
  std::vector<double> both_target{flat[0], flat[1], flat[2], 0.0};
  const double kept = flat[0] + flat[1] + flat[2];
  for (auto& x : both_target) x /= kept;
  const double both = max_freq_error(
      top_p_filter(softmax_with_temperature(LogitVector(l4), 2.0), 0.7), both_target, 4);

  const double worst = std::max({plain, tempered, nucleus, both});
  return {worst <= 0.01,
          fmt::format("4 x 100000 draws; max |freq - target| plain {:.4f}, T=0.5 {:.4f}, top-p {:.4f}, "
                      "T=2 + top-p {:.4f} (limit 0.01)",
                      plain, tempered, nucleus, both)};
}

const NGramModel& bundled_model() {
  static const NGramModel model = NGramModel::load_file(kData / "toy_word3.dtlm");
  return model;
}

Outcome policy_equivalence() {
  const auto& model = bundled_model();
  auto records = load_dataset(kData / "mini_dataset.jsonl", Task::Freeform);
  records.resize(50);
  const double t0 = 0.8;
  int mismatches = 0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    DecodeRequest request;
    request.prompt = model.tokenize(records[i].input);
    request.max_new_tokens = 24;
    request.eos_token = model.eos_token();
    request.seed = derive_seed(404, i, 0);
    request.policy = TemperaturePolicy::fixed(t0);
    const auto reference = decode(model, request).tokens;
    tokens += reference.size();
    for (const auto& policy : {TemperaturePolicy::edt(t0, 0.0), TemperaturePolicy::udt(t0, 0.0),
                               TemperaturePolicy::kld(t0, 1e12)}) {
      request.policy = policy;
      if (decode(model, request).tokens != reference) ++mismatches;
    }
  }
  return {mismatches == 0,
          fmt::format("50 prompts x 3 policies vs fixed T0 = {}, {} mismatching sequences ({} reference "
                      "tokens)",
                      t0, mismatches, tokens)};
}

std::size_t lcs_by_subsets(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, matched = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) {
        ok = false;
      } else {
        ++matched;
        ++j;
      }
    }
    if (ok) best = std::max(best, matched);
  }
  return best;
}

Outcome metric_oracles() {
  std::mt19937_64 gen(505);
  const char* alphabet[] = {"a", "b", "c", "d", "e"};
  const auto random_tokens = [&](std::size_t max_len) {
    Tokens t(std::uniform_int_distribution<std::size_t>(0, max_len)(gen));
    for (auto& w : t) w = alphabet[std::uniform_int_distribution<int>(0, 4)(gen)];
    return t;
  };

  int rouge_mismatch = 0;
  for (int i = 0; i < 500; ++i) {
    const auto h = random_tokens(11), r = random_tokens(11);
    const double lcs = static_cast<double>(lcs_by_subsets(h, r));
    double expected = 0.0;
    if (lcs > 0) {
      const double p = lcs / static_cast<double>(h.size()), rc = lcs / static_cast<double>(r.size());
      expected = 2.0 * p * rc / (p + rc);
    }
    if (rouge_l_f1(h, r) != expected) ++rouge_mismatch;
  }

  // Hand count: unigram 7/10, bigram 4/9, trigram 2/8, 4-gram 1/7, equal lengths.
  const double bleu = sentence_bleu(normalize_text("the cat sat on the mat with a red hat"),
                                    std::vector<Tokens>{normalize_text(
                                        "the cat was sitting on the mat with the hat")});
  const double bleu_hand =
      100.0 * std::exp((std::log(0.7) + std::log(4.0 / 9.0) + std::log(0.25) + std::log(1.0 / 7.0)) / 4.0);
  const double bleu_err = std::abs(bleu - bleu_hand);

  int perm_mismatch = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<Tokens> triple{random_tokens(9), random_tokens(9), random_tokens(9)};
    const double base = self_bleu(triple);
    std::sort(triple.begin(), triple.end());
    do {
      if (self_bleu(triple) != base) ++perm_mismatch;
    } while (std::next_permutation(triple.begin(), triple.end()));
  }

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double eda_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    SweepNormalizers n{10 + 40 * u01(gen), 10 + 80 * u01(gen), 0, 0};
    n.q_min = n.q_max * 0.5 * u01(gen);
    n.d_min = n.d_max * 0.5 * u01(gen);
    const long double q = n.q_max * u01(gen), d = n.d_max * u01(gen);
    const long double Q = n.q_max, D = n.d_max, qs = n.q_min, ds = n.d_min, w = Q / D;
    const long double e = 100 * std::sqrt(((Q - q) / Q) * ((Q - q) / Q) + w * w * (d / D) * (d / D));
    const long double er =
        100 * std::sqrt(((Q - q) / (Q - qs)) * ((Q - q) / (Q - qs)) + ((ds - d) / (D - ds)) * ((ds - d) / (D - ds)));
    eda_err = std::max(eda_err, static_cast<double>(std::abs(eda(static_cast<double>(q), static_cast<double>(d), n) - e)));
    eda_err = std::max(eda_err, static_cast<double>(std::abs(eda_range(static_cast<double>(q), static_cast<double>(d), n) - er)));
  }

  const bool ok = rouge_mismatch == 0 && bleu_err <= 1e-9 && perm_mismatch == 0 && eda_err <= 1e-9;
  return {ok, fmt::format("ROUGE-L vs brute-force LCS: {}/500 mismatches; BLEU {:.9f} vs hand count, "
                          "err {:.1e}; Self-BLEU permutations: {} mismatches over 100 triples; "
                          "EDA/EDA_range max err {:.1e}",
                          rouge_mismatch, bleu, bleu_err, perm_mismatch, eda_err)};
}

// Spearman rank correlation without ties handling beyond average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

struct SweepBytes {
  std::string points, instances, metadata;
  bool operator==(const SweepBytes&) const = default;
};

struct SweepRun {
  SweepConfig config;
  std::vector<DatasetRecord> records;
  SweepResult result;
  SweepBytes bytes;
};

SweepRun run_fixed_grid(std::size_t jobs) {
  SweepRun run;
  run.config = load_sweep_config(kData / "sweep_fixed_grid.json");
  run.config.jobs = jobs;
  const auto model = NGramModel::load_file(run.config.model_path);
  run.records = load_dataset(run.config.dataset_path, run.config.task);
  run.result = run_sweep(model, run.records, run.config);
  const SweepProvenance prov{file_hash(run.config.model_path), file_hash(run.config.dataset_path)};
  std::ostringstream points, instances;
  write_points_csv(points, run.result.points);
  write_instances_csv(instances, run.result.instances);
  run.bytes = {points.str(), instances.str(), sweep_metadata_json(run.config, run.result, prov)};
  return run;
}

}  // namespace

int main() {
  report(1, "schedule correctness against 50-digit evaluation", 1.0, schedule_correctness);
  report(2, "EDT monotonicity", 1.0, monotonicity);
  report(3, "sampling frequency oracle", 5.0, sampling_oracle);
  report(4, "policy equivalence on bundled prompts", 10.0, policy_equivalence);
  report(5, "metric oracles", 0.0, metric_oracles);

  SweepRun first;
  report(6, "Self-BLEU falls as T rises on the bundled fixed-T sweep", 300.0, [&] {
    first = run_fixed_grid(1);
    std::vector<double> temps, self_bleu;
    for (const auto& p : first.result.points) {
      temps.push_back(p.policy.t0);
      self_bleu.push_back(p.mean_self_bleu);
    }
    int rises = 0;
    double largest_rise = 0.0;
    for (std::size_t i = 1; i < self_bleu.size(); ++i) {
      if (self_bleu[i] > self_bleu[i - 1]) {
        ++rises;
        largest_rise = std::max(largest_rise, self_bleu[i] - self_bleu[i - 1]);
      }
    }
    const double rho = spearman(temps, self_bleu);
    std::string series;
    for (double v : self_bleu) series += fmt::format("{}{:.3f}", series.empty() ? "" : " ", v);
    return Outcome{rho <= -0.9 && first.result.failures == 0 && first.records.size() == 100,
                   fmt::format("{} instances, k = {}, Self-BLEU by T: [{}], Spearman {:.4f} <= -0.9; "
                               "{} adjacent rises, largest {:.4f}",
                               first.records.size(), first.config.k_samples, series, rho, rises,
                               largest_rise)};
  });

  report(7, "sweep outputs are byte-identical across repeats and --jobs", 0.0, [&] {
    const auto again = run_fixed_grid(1);
    const auto threaded = run_fixed_grid(4);
    const bool repeat = !first.bytes.points.empty() && again.bytes == first.bytes;
    const bool jobs = threaded.bytes == first.bytes;
    return Outcome{repeat && jobs,
                   fmt::format("repeat run identical: {}; jobs 4 vs jobs 1 identical: {} ({} + {} + {} bytes)",
                               repeat, jobs, first.bytes.points.size(), first.bytes.instances.size(),
                               first.bytes.metadata.size())};
  });

  report(8, "analysis report arity", 0.0, [&] {
    const auto& model = bundled_model();
    const auto records = load_dataset(kData / "mini_dataset.jsonl", Task::Freeform);
    const auto density = entropy_density_report(model, records);
    std::size_t reference_tokens = 0;
    for (const auto& r : records) reference_tokens += model.tokenize(r.reference).size();
    const auto sum = [](const std::vector<HistogramBin>& bins) {
      std::size_t n = 0;
      for (const auto& b : bins) n += b.count;
      return n;
    };
    const auto hist = optimal_temperature_histogram(first.result.instances);
    const bool ok = density.first_token.size() == records.size() &&
                    density.all_tokens.size() == reference_tokens &&
                    sum(density.first_token_bins) == records.size() &&
                    sum(density.all_token_bins) == reference_tokens && sum(hist) == records.size();
    return Outcome{ok, fmt::format("first-token samples {} = instances {}; all-token samples {} = reference "
                                   "tokens {}; optimal-T histogram total {} = instances",
                                   density.first_token.size(), records.size(), density.all_tokens.size(),
                                   reference_tokens, sum(hist))};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
