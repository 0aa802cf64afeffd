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

#include "dyntemp/toy_lm.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>

#include "dyntemp/error.hpp"

namespace dyntemp {

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'T', 'L', 'M'};

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes one scalar value starting at text[i]; advances i. Malformed
// sequences consume one byte and yield U+FFFD.
char32_t next_scalar(std::string_view text, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  const unsigned char lead = byte(i);
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2, cp = lead & 0x1F, min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3, cp = lead & 0x0F, min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4, cp = lead & 0x07, min = 0x10000;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > text.size()) {
    ++i;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    if ((byte(i + k) & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (byte(i + k) & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return 0xFFFD;
  }
  i += len;
  return cp;
}

// Little-endian fixed-width writer.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t{bytes_[pos_++]} << (8 * k);
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= std::uint64_t{bytes_[pos_++]} << (8 * k);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string raw(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, pos_); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      fail(std::string("truncated model stream while reading ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(TokenMode mode) {
  return mode == TokenMode::Word ? "word" : "char";
}

TokenMode parse_token_mode(std::string_view name) {
  if (name == "word") return TokenMode::Word;
  if (name == "char") return TokenMode::Char;
  throw InputError("unknown token mode '" + std::string(name) + "' (expected word or char)");
}

std::vector<std::string> split_tokens(std::string_view text, TokenMode mode) {
  std::vector<std::string> tokens;
  if (mode == TokenMode::Char) {
    std::size_t i = 0;
    while (i < text.size()) {
      std::string token;
      append_utf8(token, next_scalar(text, i));
      tokens.push_back(std::move(token));
    }
    return tokens;
  }
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus '" + path.string() + "': no such file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool blank = std::all_of(line.begin(), line.end(),
                                   [](unsigned char c) { return is_space(c); });
    if (!blank) lines.push_back(std::move(line));
  }
  return lines;
}

Vocabulary::Vocabulary() {
  add("<s>");
  add("</s>");
  add("<unk>");
}

TokenId Vocabulary::add(std::string token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

TokenId Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnk); }

const std::string& Vocabulary::token(TokenId id) const { return tokens_.at(id); }

void NGramModel::validate_parameters(int order, double alpha) {
  if (order < 1 || order > NGramModel::kMaxOrder) {
    throw InputError("order must lie in [1, " + std::to_string(NGramModel::kMaxOrder) +
                     "], got " + std::to_string(order));
  }
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw InputError("smoothing alpha must be > 0, got " + std::to_string(alpha));
  }
}

NGramModel NGramModel::train(std::span<const std::string> corpus, int order, double alpha,
                             TokenMode mode) {
  validate_parameters(order, alpha);
  if (corpus.empty()) throw InputError("training corpus is empty");

  std::vector<std::vector<std::string>> records;
  std::set<std::string> distinct;
  for (const auto& text : corpus) {
    auto tokens = split_tokens(text, mode);
    if (tokens.empty()) continue;
    distinct.insert(tokens.begin(), tokens.end());
    records.push_back(std::move(tokens));
  }
  if (records.empty()) throw InputError("training corpus contains no tokens");

  Vocabulary vocab;
  for (const auto& token : distinct) vocab.add(token);
  NGramModel model(order, alpha, mode, std::move(vocab));

  const std::size_t context_len = static_cast<std::size_t>(order - 1);
  std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>> counts;
  for (const auto& record : records) {
    std::vector<TokenId> ids(context_len, Vocabulary::kBos);
    for (const auto& token : record) ids.push_back(model.vocab_.id(token));
    ids.push_back(Vocabulary::kEos);
    for (std::size_t t = context_len; t < ids.size(); ++t) {
      std::vector<TokenId> context(ids.begin() + static_cast<std::ptrdiff_t>(t - context_len),
                                   ids.begin() + static_cast<std::ptrdiff_t>(t));
      ++counts[std::move(context)][ids[t]];
    }
  }
  for (auto& [context, next] : counts) {
    Row row;
    for (const auto& [id, c] : next) {
      row.counts.emplace_back(id, c);
      row.total += c;
    }
    model.rows_.emplace(context, std::move(row));
  }
  return model;
}

std::vector<TokenId> NGramModel::context_of(std::span<const TokenId> prompt,
                                            std::span<const TokenId> generated) const {
  const std::size_t len = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> context(len, Vocabulary::kBos);
  // Fill from the right: generated first, then prompt, then BOS padding.
  std::size_t slot = len;
  const auto clamp_id = [&](TokenId id) { return id < vocab_.size() ? id : Vocabulary::kUnk; };
  for (auto it = generated.rbegin(); it != generated.rend() && slot > 0; ++it) {
    context[--slot] = clamp_id(*it);
  }
  for (auto it = prompt.rbegin(); it != prompt.rend() && slot > 0; ++it) {
    context[--slot] = clamp_id(*it);
  }
  return context;
}

const NGramModel::Row* NGramModel::find_row(const std::vector<TokenId>& context) const {
  auto it = rows_.find(context);
  return it == rows_.end() ? nullptr : &it->second;
}

LogitVector NGramModel::row_logits(const std::vector<TokenId>& context) const {
  const double v = static_cast<double>(vocab_.size());
  const Row* row = find_row(context);
  const double total = row ? static_cast<double>(row->total) : 0.0;
  const double log_denominator = std::log(total + alpha_ * v);
  std::vector<double> values(vocab_.size(), std::log(alpha_) - log_denominator);
  if (row) {
    for (const auto& [id, c] : row->counts) {
      values[id] = std::log(static_cast<double>(c) + alpha_) - log_denominator;
    }
  }
  return LogitVector(std::move(values));
}

LogitVector NGramModel::logits(std::span<const TokenId> prompt,
                               std::span<const TokenId> generated) const {
  return row_logits(context_of(prompt, generated));
}

LogitVector NGramModel::unconditional_logits(std::span<const TokenId> generated) const {
  return row_logits(context_of({}, generated));
}

std::vector<double> NGramModel::row_probabilities(std::span<const TokenId> history) const {
  const auto context = context_of({}, history);
  const double v = static_cast<double>(vocab_.size());
  const Row* row = find_row(context);
  const double denominator = (row ? static_cast<double>(row->total) : 0.0) + alpha_ * v;
  std::vector<double> probs(vocab_.size(), alpha_ / denominator);
  if (row) {
    for (const auto& [id, c] : row->counts) {
      probs[id] = (static_cast<double>(c) + alpha_) / denominator;
    }
  }
  return probs;
}

std::uint64_t NGramModel::count(std::span<const TokenId> history, TokenId next) const {
  const Row* row = find_row(context_of({}, history));
  if (!row) return 0;
  auto it = std::lower_bound(row->counts.begin(), row->counts.end(), next,
                             [](const auto& entry, TokenId id) { return entry.first < id; });
  return (it != row->counts.end() && it->first == next) ? it->second : 0;
}

std::vector<TokenId> NGramModel::tokenize(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& token : split_tokens(text, mode_)) ids.push_back(vocab_.id(token));
  return ids;
}

std::string NGramModel::detokenize(std::span<const TokenId> tokens) const {
  std::string text;
  for (TokenId id : tokens) {
    if (id == Vocabulary::kBos || id == Vocabulary::kEos) continue;
    const std::string& token = vocab_.token(id < vocab_.size() ? id : Vocabulary::kUnk);
    if (mode_ == TokenMode::Word && !text.empty()) text.push_back(' ');
    text += token;
  }
  return text;
}

std::vector<std::uint8_t> NGramModel::save() const {
  ByteWriter out;
  out.raw(std::string_view(kMagic.data(), kMagic.size()));
  out.u8(kFormatVersion);
  out.u32(static_cast<std::uint32_t>(order_));
  out.u8(static_cast<std::uint8_t>(mode_));
  out.f64(alpha_);
  out.u32(static_cast<std::uint32_t>(vocab_.size()));
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    const std::string& token = vocab_.token(static_cast<TokenId>(id));
    out.u32(static_cast<std::uint32_t>(token.size()));
    out.raw(token);
  }
  out.u64(rows_.size());
  for (const auto& [context, row] : rows_) {
    for (TokenId id : context) out.u32(id);
    out.u32(static_cast<std::uint32_t>(row.counts.size()));
    for (const auto& [id, c] : row.counts) {
      out.u32(id);
      out.u64(c);
    }
  }
  return out.take();
}

NGramModel NGramModel::load(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const std::string magic = in.raw(kMagic.size(), "magic");
  if (magic != std::string_view(kMagic.data(), kMagic.size())) {
    throw FormatError("bad magic bytes, not a dyntemp model", 0);
  }
  const std::size_t version_offset = in.offset();
  const std::uint8_t version = in.u8("version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported model format version: expected " +
                          std::to_string(kFormatVersion) + ", found " + std::to_string(version),
                      version_offset);
  }
  const std::uint32_t order = in.u32("order");
  if (order < 1 || order > static_cast<std::uint32_t>(kMaxOrder)) {
    in.fail("order " + std::to_string(order) + " outside [1, 6]");
  }
  const std::uint8_t mode = in.u8("mode");
  if (mode > 1) in.fail("unknown token mode " + std::to_string(mode));
  const double alpha = in.f64("alpha");
  if (!std::isfinite(alpha) || alpha <= 0.0) in.fail("smoothing alpha must be > 0");
  const std::uint32_t vocab_size = in.u32("vocabulary size");
  if (vocab_size < Vocabulary::kReserved) in.fail("vocabulary smaller than the reserved ids");

  Vocabulary vocab;
  for (std::uint32_t id = 0; id < vocab_size; ++id) {
    const std::uint32_t len = in.u32("token length");
    std::string token = in.raw(len, "token bytes");
    if (id < Vocabulary::kReserved) {
      if (token != vocab.token(id)) in.fail("reserved token " + std::to_string(id) + " mismatch");
      continue;
    }
    if (vocab.find(token)) in.fail("duplicate vocabulary entry '" + token + "'");
    vocab.add(std::move(token));
  }

  NGramModel model(static_cast<int>(order), alpha, static_cast<TokenMode>(mode), std::move(vocab));
  const std::uint64_t row_count = in.u64("row count");
  const std::size_t context_len = order - 1;
  const std::vector<TokenId>* previous = nullptr;
  for (std::uint64_t r = 0; r < row_count; ++r) {
    std::vector<TokenId> context(context_len);
    for (auto& id : context) {
      id = in.u32("context id");
      if (id >= vocab_size) in.fail("context id out of range");
    }
    if (previous && !(*previous < context)) in.fail("rows not in ascending context order");
    const std::uint32_t entries = in.u32("row entry count");
    Row row;
    row.counts.reserve(entries);
    for (std::uint32_t e = 0; e < entries; ++e) {
      const TokenId id = in.u32("entry id");
      const std::uint64_t c = in.u64("entry count");
      if (id >= vocab_size) in.fail("entry id out of range");
      if (c == 0) in.fail("zero count stored");
      if (!row.counts.empty() && row.counts.back().first >= id) {
        in.fail("row entries not in ascending id order");
      }
      row.counts.emplace_back(id, c);
      row.total += c;
    }
    auto [it, inserted] = model.rows_.emplace(std::move(context), std::move(row));
    previous = &it->first;
  }
  if (!in.done()) in.fail("trailing bytes after count table");
  return model;
}

NGramModel NGramModel::load_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open model file '" + path.string() + "': no such file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  return load(bytes);
}

void NGramModel::save_file(const std::filesystem::path& path) const {
  const auto bytes = save();
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError("cannot write model file '" + path.string() + "'");
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw InputError("failed writing model file '" + path.string() + "'");
}

}  // namespace dyntemp
