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

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dyntemp {

using Tokens = std::vector<std::string>;

/// The one normalization every metric uses: ASCII-lowercase, ASCII punctuation
/// to spaces, split on whitespace.
Tokens normalize_text(std::string_view text);

/// LCS-based ROUGE-L F1 in [0, 1]. Zero when either side is empty.
double rouge_l_f1(std::span<const std::string> hypothesis, std::span<const std::string> reference);

/// Epsilon added to the match count of a zero-match n-gram order (n >= 2).
inline constexpr double kBleuSmoothingEpsilon = 0.1;
inline constexpr int kBleuMaxOrder = 4;

/// Smoothed sentence BLEU-4 in [0, 100].
///
///   p_n   = clipped matches_n / max(1, h - n + 1)
///   p_n   = eps / max(1, h - n + 1)   for n >= 2 when matches_n = 0
///   BLEU  = 0                         when matches_1 = 0 or h = 0
///   BP    = exp(1 - r / h) if h < r, else 1;  r = closest reference length
///           (ties to the shorter)
///   BLEU  = 100 * BP * exp(mean_n ln p_n)
double sentence_bleu(std::span<const std::string> hypothesis, std::span<const Tokens> references);

/// Mean over i of sentence_bleu(sample_i, all other samples). The per-sample
/// scores are summed in sorted order so the result is exactly invariant under
/// permutation. Throws InputError for fewer than two samples.
double self_bleu(std::span<const Tokens> samples);

/// Normalizers of the trade-off scores, taken over all points of one sweep.
struct SweepNormalizers {
  double q_max = 0.0;
  double d_max = 0.0;
  double q_min = 0.0;
  double d_min = 0.0;

  /// Smallest box enclosing the given (quality, diversity) values.
  static SweepNormalizers from_points(std::span<const double> qualities,
                                      std::span<const double> diversities);
};

/// 100 * sqrt(((Q - q) / Q)^2 + w^2 (d / D)^2), w = Q / D.
/// Throws DomainError when Q or D is not positive.
double eda(double quality, double diversity, const SweepNormalizers& norms);

/// 100 * sqrt(((Q - q) / (Q - q*))^2 + ((d* - d) / (D - d*))^2).
/// Throws DomainError naming the axis whose range is empty.
double eda_range(double quality, double diversity, const SweepNormalizers& norms);

}  // namespace dyntemp
