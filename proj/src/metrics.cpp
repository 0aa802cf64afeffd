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

#include "dyntemp/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "dyntemp/error.hpp"

namespace dyntemp {

namespace {

using NGramCounts = std::map<std::vector<std::string>, int>;

NGramCounts ngram_counts(std::span<const std::string> tokens, int n) {
  NGramCounts counts;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + len))];
  }
  return counts;
}

std::size_t closest_reference_length(std::size_t hyp_len, std::span<const Tokens> references) {
  std::size_t best = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [&](std::size_t r) { return r > hyp_len ? r - hyp_len : hyp_len - r; };
    if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) {
      best = ref.size();
    }
  }
  return best;
}

}  // namespace

Tokens normalize_text(std::string_view text) {
  Tokens tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || std::ispunct(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double rouge_l_f1(std::span<const std::string> hypothesis,
                  std::span<const std::string> reference) {
  if (hypothesis.empty() || reference.empty()) return 0.0;
  // Rolling two-row LCS table over the reference.
  std::vector<std::size_t> prev(reference.size() + 1, 0), cur(reference.size() + 1, 0);
  for (const auto& h : hypothesis) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      cur[j] = (h == reference[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev.back());
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(hypothesis.size());
  const double recall = lcs / static_cast<double>(reference.size());
  return 2.0 * precision * recall / (precision + recall);
}

double sentence_bleu(std::span<const std::string> hypothesis,
                     std::span<const Tokens> references) {
  if (references.empty()) throw InputError("sentence_bleu needs at least one reference");
  if (hypothesis.empty()) return 0.0;

  const std::size_t h = hypothesis.size();
  double log_precision_sum = 0.0;
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    const NGramCounts hyp_counts = ngram_counts(hypothesis, n);
    NGramCounts max_ref_counts;
    for (const auto& ref : references) {
      for (const auto& [gram, c] : ngram_counts(ref, n)) {
        int& slot = max_ref_counts[gram];
        slot = std::max(slot, c);
      }
    }
    int matches = 0;
    for (const auto& [gram, c] : hyp_counts) {
      if (auto it = max_ref_counts.find(gram); it != max_ref_counts.end()) {
        matches += std::min(c, it->second);
      }
    }
    const auto len = static_cast<std::size_t>(n);
    const double total = static_cast<double>(h >= len ? h - len + 1 : 0);
    const double denominator = std::max(1.0, total);
    if (matches == 0) {
      if (n == 1) return 0.0;
      log_precision_sum += std::log(kBleuSmoothingEpsilon / denominator);
    } else {
      log_precision_sum += std::log(static_cast<double>(matches) / denominator);
    }
  }

  const auto r = static_cast<double>(closest_reference_length(h, references));
  const auto hyp_len = static_cast<double>(h);
  const double brevity = hyp_len < r ? std::exp(1.0 - r / hyp_len) : 1.0;
  return 100.0 * brevity * std::exp(log_precision_sum / kBleuMaxOrder);
}

double self_bleu(std::span<const Tokens> samples) {
  if (samples.size() < 2) {
    throw InputError("self_bleu needs at least 2 samples, got " + std::to_string(samples.size()));
  }
  std::vector<double> scores;
  scores.reserve(samples.size());
  std::vector<Tokens> others;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j != i) others.push_back(samples[j]);
    }
    scores.push_back(sentence_bleu(samples[i], others));
  }
  std::sort(scores.begin(), scores.end());
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

SweepNormalizers SweepNormalizers::from_points(std::span<const double> qualities,
                                               std::span<const double> diversities) {
  if (qualities.empty() || diversities.empty()) {
    throw InputError("normalizers need at least one point");
  }
  const auto [q_lo, q_hi] = std::minmax_element(qualities.begin(), qualities.end());
  const auto [d_lo, d_hi] = std::minmax_element(diversities.begin(), diversities.end());
  return SweepNormalizers{*q_hi, *d_hi, *q_lo, *d_lo};
}

double eda(double quality, double diversity, const SweepNormalizers& norms) {
  if (!(norms.q_max > 0.0)) throw DomainError("EDA needs a positive quality maximum");
  if (!(norms.d_max > 0.0)) throw DomainError("EDA needs a positive diversity maximum");
  const double omega = norms.q_max / norms.d_max;
  const double dq = (norms.q_max - quality) / norms.q_max;
  const double dd = omega * diversity / norms.d_max;
  return 100.0 * std::sqrt(dq * dq + dd * dd);
}

double eda_range(double quality, double diversity, const SweepNormalizers& norms) {
  if (!(norms.q_max > norms.q_min)) {
    throw DomainError("EDA_range needs q_max > q_min (quality range is empty)");
  }
  if (!(norms.d_max > norms.d_min)) {
    throw DomainError("EDA_range needs d_max > d_min (diversity range is empty)");
  }
  const double dq = (norms.q_max - quality) / (norms.q_max - norms.q_min);
  const double dd = (norms.d_min - diversity) / (norms.d_max - norms.d_min);
  return 100.0 * std::sqrt(dq * dq + dd * dd);
}

}  // namespace dyntemp
