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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dyntemp/decoder.hpp"

namespace dyntemp {

enum class TokenMode : std::uint8_t { Word = 0, Char = 1 };

std::string_view to_string(TokenMode mode);
TokenMode parse_token_mode(std::string_view name);

/// Word mode: ASCII-lowercased, split on whitespace. Char mode: one token per
/// Unicode scalar value (invalid UTF-8 bytes become U+FFFD).
std::vector<std::string> split_tokens(std::string_view text, TokenMode mode);

/// Non-blank lines of a text file, one training record each.
std::vector<std::string> load_corpus(const std::filesystem::path& path);

/// id <-> token bijection with three reserved ids at the front.
class Vocabulary {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr std::size_t kReserved = 3;

  Vocabulary();

  /// Returns the existing id when the token is already present.
  TokenId add(std::string token);
  std::optional<TokenId> find(std::string_view token) const;
  /// Unknown tokens map to kUnk.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  static bool is_reserved(TokenId id) noexcept { return id < kReserved; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Add-alpha smoothed n-gram model. Every row gives every token probability
/// (c + alpha) / (total + alpha * V), so all rows have full support.
///
/// Context for the next token is the last (order - 1) ids of
/// BOS^(order-1) + prompt + generated.
class NGramModel final : public TextLogitSource {
 public:
  static constexpr int kMaxOrder = 6;
  static constexpr std::uint8_t kFormatVersion = 1;

  /// Each corpus entry is one training sequence, wrapped in BOS/EOS.
  /// Throws InputError on an empty corpus, order outside [1, 6] or alpha <= 0.
  static NGramModel train(std::span<const std::string> corpus, int order, double alpha,
                          TokenMode mode = TokenMode::Word);

  /// The order/alpha checks of train(), usable before reading a corpus.
  static void validate_parameters(int order, double alpha);

  /// Throws FormatError (with byte offset) on malformed input.
  static NGramModel load(std::span<const std::uint8_t> bytes);
  static NGramModel load_file(const std::filesystem::path& path);
  std::vector<std::uint8_t> save() const;
  void save_file(const std::filesystem::path& path) const;

  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  TokenMode mode() const noexcept { return mode_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t context_count() const noexcept { return rows_.size(); }

  std::size_t vocab_size() const override { return vocab_.size(); }
  LogitVector logits(std::span<const TokenId> prompt,
                     std::span<const TokenId> generated) const override;
  LogitVector unconditional_logits(std::span<const TokenId> generated) const override;

  std::vector<TokenId> tokenize(std::string_view text) const override;
  std::string detokenize(std::span<const TokenId> tokens) const override;
  TokenId eos_token() const override { return Vocabulary::kEos; }

  /// Smoothed next-token probabilities for the last (order - 1) ids of
  /// `history`, left-padded with BOS when shorter.
  std::vector<double> row_probabilities(std::span<const TokenId> history) const;

  /// Raw count of `next` after the context formed from `history`.
  std::uint64_t count(std::span<const TokenId> history, TokenId next) const;

 private:
  struct Row {
    std::vector<std::pair<TokenId, std::uint64_t>> counts;  // sorted by id
    std::uint64_t total = 0;
  };

  NGramModel(int order, double alpha, TokenMode mode, Vocabulary vocab)
      : order_(order), alpha_(alpha), mode_(mode), vocab_(std::move(vocab)) {}

  std::vector<TokenId> context_of(std::span<const TokenId> prompt,
                                  std::span<const TokenId> generated) const;
  const Row* find_row(const std::vector<TokenId>& context) const;
  LogitVector row_logits(const std::vector<TokenId>& context) const;

  int order_;
  double alpha_;
  TokenMode mode_;
  Vocabulary vocab_;
  std::map<std::vector<TokenId>, Row> rows_;
};

}  // namespace dyntemp
