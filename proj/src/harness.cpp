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

#include "dyntemp/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dyntemp/error.hpp"

namespace dyntemp {

using Json = nlohmann::ordered_json;

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Summarization: return "summarization";
    case Task::Qa: return "qa";
    case Task::Translation: return "translation";
    case Task::Freeform: return "freeform";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "summarization") return Task::Summarization;
  if (name == "qa") return Task::Qa;
  if (name == "translation") return Task::Translation;
  if (name == "freeform") return Task::Freeform;
  throw InputError("unknown task '" + std::string(name) +
                   "' (expected summarization, qa, translation or freeform)");
}

std::string apply_template(Task task, std::string_view input,
                           std::optional<std::string_view> question,
                           std::span<const std::pair<std::string, std::string>> history) {
  std::string out(input);
  switch (task) {
    case Task::Summarization:
      out += "\n";
      break;
    case Task::Qa:
      for (const auto& [q, a] : history) {
        out += "\n\nQ: ";
        out += q;
        out += "\nA: ";
        out += a;
      }
      if (question) {
        out += "\n\nQ: ";
        out += *question;
      }
      out += "\nA: ";
      break;
    case Task::Translation:
      out += "\nTranslate English to Chinese:\n";
      break;
    case Task::Freeform:
      break;
  }
  return out;
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string required_text(const Json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError(fmt::format("dataset line {}: missing field '{}'", line, key));
  }
  if (!it->is_string()) {
    throw InputError(fmt::format("dataset line {}: field '{}' must be a string", line, key));
  }
  auto value = it->get<std::string>();
  if (blank(value)) {
    throw InputError(fmt::format("dataset line {}: field '{}' is empty", line, key));
  }
  return value;
}

}  // namespace

std::vector<DatasetRecord> parse_dataset(std::istream& in, Task task) {
  std::vector<DatasetRecord> records;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    Json obj;
    try {
      obj = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw InputError(fmt::format("dataset line {}: malformed JSON ({})", line, e.what()));
    }
    if (!obj.is_object()) {
      throw InputError(fmt::format("dataset line {}: expected a JSON object", line));
    }

    DatasetRecord record;
    record.task = task;
    if (const auto it = obj.find("id"); it == obj.end()) {
      record.id = std::to_string(line);
    } else if (it->is_string()) {
      record.id = it->get<std::string>();
    } else if (it->is_number_integer()) {
      record.id = std::to_string(it->get<std::int64_t>());
    } else {
      throw InputError(fmt::format("dataset line {}: 'id' must be a string or integer", line));
    }
    if (!seen.insert(record.id).second) {
      throw InputError(fmt::format("dataset line {}: duplicate id '{}'", line, record.id));
    }

    const std::string input = required_text(obj, "input", line);
    record.reference = required_text(obj, "reference", line);

    std::optional<std::string> question;
    std::vector<std::pair<std::string, std::string>> history;
    if (task == Task::Qa) {
      if (obj.contains("question")) question = required_text(obj, "question", line);
      if (const auto it = obj.find("history"); it != obj.end()) {
        if (!it->is_array()) {
          throw InputError(fmt::format("dataset line {}: 'history' must be an array", line));
        }
        for (const auto& turn : *it) {
          if (!turn.is_object()) {
            throw InputError(fmt::format("dataset line {}: history turns must be objects", line));
          }
          history.emplace_back(required_text(turn, "q", line), required_text(turn, "a", line));
        }
      }
    }
    record.input = apply_template(task, input,
                                  question ? std::optional<std::string_view>(*question)
                                           : std::nullopt,
                                  history);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path, Task task) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "': no such file");
  return parse_dataset(in, task);
}

std::string_view to_string(QualityMetric metric) {
  switch (metric) {
    case QualityMetric::Auto: return "auto";
    case QualityMetric::RougeL: return "rouge_l";
    case QualityMetric::Bleu: return "bleu";
  }
  return "unknown";
}

QualityMetric parse_quality_metric(std::string_view name) {
  if (name == "auto") return QualityMetric::Auto;
  if (name == "rouge_l" || name == "rouge-l") return QualityMetric::RougeL;
  if (name == "bleu") return QualityMetric::Bleu;
  throw InputError("unknown quality metric '" + std::string(name) +
                   "' (expected auto, rouge_l or bleu)");
}

double score_quality(QualityMetric metric, Task task, std::string_view hypothesis,
                     std::string_view reference) {
  if (metric == QualityMetric::Auto) {
    metric = task == Task::Translation ? QualityMetric::Bleu : QualityMetric::RougeL;
  }
  const Tokens hyp = normalize_text(hypothesis);
  const Tokens ref = normalize_text(reference);
  if (metric == QualityMetric::Bleu) {
    const std::vector<Tokens> refs{ref};
    return sentence_bleu(hyp, refs);
  }
  return 100.0 * rouge_l_f1(hyp, ref);
}

std::vector<TemperaturePolicy> SweepConfig::expand() const {
  std::vector<TemperaturePolicy> grid;
  for (const auto& spec : policies) {
    for (double t0 : spec.t0s) {
      for (double theta : spec.thetas) {
        for (double sigma : spec.sigmas) {
          TemperaturePolicy p;
          p.kind = spec.kind;
          p.t0 = t0;
          p.theta = theta;
          p.sigma = sigma;
          p.n_base = n_base;
          p.top_p = top_p;
          grid.push_back(p);
        }
      }
    }
  }
  return grid;
}

void SweepConfig::validate() const {
  if (policies.empty()) throw InputError("sweep grid is empty: no policies configured");
  for (const auto& spec : policies) {
    if (spec.t0s.empty() || spec.thetas.empty() || spec.sigmas.empty()) {
      throw InputError(fmt::format("sweep grid is empty for policy '{}'", to_string(spec.kind)));
    }
  }
  if (k_samples < 2) throw InputError("k_samples must be >= 2 (Self-BLEU compares samples)");
  if (max_new_tokens < 1) throw InputError("max_new_tokens must be >= 1");
  if (jobs < 1) throw InputError("jobs must be >= 1");
  if (max_instances && *max_instances < 1) throw InputError("max_instances must be >= 1");
  for (const auto& policy : expand()) {
    try {
      policy.validate();
    } catch (const InputError& e) {
      throw InputError(fmt::format("invalid {} grid point: {}", to_string(policy.kind), e.what()));
    }
  }
}

namespace {

std::vector<double> number_or_list(const Json& value, const std::string& key) {
  std::vector<double> out;
  if (value.is_number()) {
    out.push_back(value.get<double>());
  } else if (value.is_array()) {
    for (const auto& v : value) {
      if (!v.is_number()) throw InputError("config key '" + key + "' must hold numbers");
      out.push_back(v.get<double>());
    }
  } else {
    throw InputError("config key '" + key + "' must be a number or a list of numbers");
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

template <typename T>
T get_as(const Json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

SweepConfig parse_sweep_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed config JSON: ") + e.what());
  }
  if (!root.is_object()) throw InputError("config must be a JSON object");

  static const std::set<std::string> known = {
      "policies", "k_samples", "seed",    "max_new_tokens", "top_p", "n_base",
      "task",     "quality_metric",       "model",          "dataset", "out_dir",
      "jobs",     "max_instances"};
  for (const auto& [key, value] : root.items()) {
    if (!known.contains(key)) throw InputError("unknown config key '" + key + "'");
  }

  SweepConfig config;
  if (root.contains("policies")) {
    const Json& policies = root["policies"];
    if (!policies.is_array()) throw InputError("config key 'policies' must be a list");
    for (const auto& entry : policies) {
      if (!entry.is_object() || !entry.contains("kind") || !entry["kind"].is_string()) {
        throw InputError("every policy needs a string 'kind'");
      }
      PolicyGrid grid;
      grid.kind = parse_policy_kind(entry["kind"].get<std::string>());
      for (const auto& [key, value] : entry.items()) {
        if (key == "kind") continue;
        if (key == "t0") {
          grid.t0s = number_or_list(value, key);
        } else if (key == "theta") {
          grid.thetas = number_or_list(value, key);
        } else if (key == "sigma") {
          grid.sigmas = number_or_list(value, key);
        } else {
          throw InputError("unknown policy key '" + key + "'");
        }
      }
      config.policies.push_back(std::move(grid));
    }
  }
  if (root.contains("k_samples")) config.k_samples = get_as<std::size_t>(root, "k_samples");
  if (root.contains("seed")) config.seed = get_as<std::uint64_t>(root, "seed");
  if (root.contains("max_new_tokens")) {
    config.max_new_tokens = get_as<std::size_t>(root, "max_new_tokens");
  }
  if (root.contains("top_p")) config.top_p = get_as<double>(root, "top_p");
  if (root.contains("n_base")) config.n_base = get_as<double>(root, "n_base");
  if (root.contains("task")) config.task = parse_task(get_as<std::string>(root, "task"));
  if (root.contains("quality_metric")) {
    config.quality_metric = parse_quality_metric(get_as<std::string>(root, "quality_metric"));
  }
  if (root.contains("model")) config.model_path = resolve(base_dir, get_as<std::string>(root, "model"));
  if (root.contains("dataset")) {
    config.dataset_path = resolve(base_dir, get_as<std::string>(root, "dataset"));
  }
  if (root.contains("out_dir")) config.out_dir = resolve(base_dir, get_as<std::string>(root, "out_dir"));
  if (root.contains("jobs")) config.jobs = get_as<std::size_t>(root, "jobs");
  if (root.contains("max_instances")) config.max_instances = get_as<std::size_t>(root, "max_instances");
  return config;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path.string() + "': no such file");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_sweep_config(text, path.parent_path());
}

namespace {

InstanceScore evaluate_instance(const TextLogitSource& source, const DatasetRecord& record,
                                const SweepConfig& config, const TemperaturePolicy& policy,
                                std::size_t grid_index, std::size_t instance_index) {
  InstanceScore score;
  score.instance_id = record.id;
  score.instance_index = instance_index;
  score.grid_index = grid_index;
  score.policy = policy;
  try {
    DecodeRequest request;
    request.prompt = source.tokenize(record.input);
    request.policy = policy;
    request.max_new_tokens = config.max_new_tokens;
    request.eos_token = source.eos_token();
    request.seed = config.seed;
    const auto results = decode_k(source, request, config.k_samples, instance_index);

    std::vector<Tokens> normalized;
    double quality_sum = 0.0;
    for (const auto& result : results) {
      score.samples.push_back(source.detokenize(result.tokens));
      quality_sum +=
          score_quality(config.quality_metric, record.task, score.samples.back(), record.reference);
      normalized.push_back(normalize_text(score.samples.back()));
    }
    score.quality = quality_sum / static_cast<double>(results.size());
    score.self_bleu = self_bleu(normalized);
    score.ok = true;
  } catch (const std::exception& e) {
    score.ok = false;
    score.error = e.what();
  }
  return score;
}

}  // namespace

SweepResult run_sweep(const TextLogitSource& source, std::span<const DatasetRecord> records,
                      const SweepConfig& config) {
  config.validate();
  if (records.empty()) throw InputError("sweep dataset has no records");
  if (config.max_instances && *config.max_instances < records.size()) {
    records = records.first(*config.max_instances);
  }
  const auto grid = config.expand();
  const std::size_t n_items = grid.size() * records.size();

  SweepResult result;
  result.instances.resize(n_items);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t item = next++; item < n_items; item = next++) {
      const std::size_t g = item / records.size();
      const std::size_t i = item % records.size();
      result.instances[item] = evaluate_instance(source, records[i], config, grid[g], g, i);
    }
  };
  const std::size_t threads = std::min(config.jobs, n_items);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<double> qualities, diversities;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TradeoffPoint point;
    point.policy = grid[g];
    double q_sum = 0.0, d_sum = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const InstanceScore& s = result.instances[g * records.size() + i];
      if (!s.ok) {
        ++point.n_failed;
        continue;
      }
      q_sum += s.quality;
      d_sum += s.self_bleu;
      ++point.n_instances;
    }
    result.failures += point.n_failed;
    if (point.n_instances > 0) {
      point.mean_quality = q_sum / static_cast<double>(point.n_instances);
      point.mean_self_bleu = d_sum / static_cast<double>(point.n_instances);
      qualities.push_back(point.mean_quality);
      diversities.push_back(point.mean_self_bleu);
    } else {
      result.warnings.push_back(
          fmt::format("grid point {} ({}): every instance failed", g, to_string(grid[g].kind)));
    }
    result.points.push_back(point);
  }
  if (result.failures > 0) {
    result.warnings.push_back(fmt::format("{} instance evaluations failed", result.failures));
  }

  if (qualities.empty()) return result;
  const SweepNormalizers norms = SweepNormalizers::from_points(qualities, diversities);
  result.normalizers = norms;
  bool eda_warned = false, range_warned = false;
  for (auto& point : result.points) {
    if (point.n_instances == 0) continue;
    try {
      point.eda = eda(point.mean_quality, point.mean_self_bleu, norms);
    } catch (const DomainError& e) {
      if (!eda_warned) result.warnings.push_back(std::string("EDA omitted: ") + e.what());
      eda_warned = true;
    }
    try {
      point.eda_range = eda_range(point.mean_quality, point.mean_self_bleu, norms);
    } catch (const DomainError& e) {
      if (!range_warned) result.warnings.push_back(std::string("EDA_range omitted: ") + e.what());
      range_warned = true;
    }
  }
  return result;
}

std::vector<BestEdaRow> best_eda_table(std::span<const TradeoffPoint> points) {
  std::vector<BestEdaRow> rows;
  const auto take_min = [](std::optional<double>& slot, const std::optional<double>& v) {
    if (v && (!slot || *v < *slot)) slot = v;
  };
  for (const auto& point : points) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const BestEdaRow& r) { return r.kind == point.policy.kind; });
    if (it == rows.end()) {
      rows.push_back(BestEdaRow{point.policy.kind, std::nullopt, std::nullopt});
      it = std::prev(rows.end());
    }
    take_min(it->best_eda, point.eda);
    take_min(it->best_eda_range, point.eda_range);
  }
  return rows;
}

std::vector<HistogramBin> optimal_temperature_histogram(std::span<const InstanceScore> scores) {
  std::set<double> temperatures;
  // instance index -> (best quality, best temperature)
  std::map<std::size_t, std::pair<double, double>> best;
  for (const auto& s : scores) {
    if (s.policy.kind != PolicyKind::Fixed) {
      throw InputError("optimal-temperature histogram needs a fixed-temperature grid, found " +
                       std::string(to_string(s.policy.kind)));
    }
    temperatures.insert(s.policy.t0);
    if (!s.ok) continue;
    auto [it, inserted] = best.try_emplace(s.instance_index, s.quality, s.policy.t0);
    if (inserted) continue;
    auto& [q, t] = it->second;
    if (s.quality > q || (s.quality == q && s.policy.t0 < t)) {
      q = s.quality;
      t = s.policy.t0;
    }
  }

  const std::vector<double> temps(temperatures.begin(), temperatures.end());
  std::vector<HistogramBin> bins(temps.size());
  for (std::size_t b = 0; b < temps.size(); ++b) {
    const double below = b > 0 ? temps[b] - temps[b - 1]
                               : (temps.size() > 1 ? temps[1] - temps[0] : 0.0);
    const double above = b + 1 < temps.size() ? temps[b + 1] - temps[b] : below;
    bins[b].low = temps[b] - below / 2.0;
    bins[b].high = temps[b] + above / 2.0;
  }
  for (const auto& [instance, qt] : best) {
    const auto pos = std::lower_bound(temps.begin(), temps.end(), qt.second) - temps.begin();
    ++bins[static_cast<std::size_t>(pos)].count;
  }
  return bins;
}

namespace {

std::vector<HistogramBin> fixed_width_bins(std::span<const EntropySample> samples, double upper,
                                           std::size_t n_bins) {
  std::vector<HistogramBin> bins(n_bins);
  const double width = upper / static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].low = width * static_cast<double>(b);
    bins[b].high = b + 1 == n_bins ? upper : width * static_cast<double>(b + 1);
  }
  for (const auto& s : samples) {
    auto b = static_cast<std::size_t>(std::floor(s.entropy / width));
    ++bins[std::min(b, n_bins - 1)].count;
  }
  return bins;
}

}  // namespace

EntropyDensity entropy_density_report(const TextLogitSource& source,
                                      std::span<const DatasetRecord> records, std::size_t bins) {
  if (bins < 1) throw InputError("entropy density needs at least one bin");
  EntropyDensity report;
  for (const auto& record : records) {
    const auto prompt = source.tokenize(record.input);
    const auto reference = source.tokenize(record.reference);
    if (reference.empty()) {
      throw InputError("record '" + record.id + "' has a reference with no model tokens");
    }
    const auto entropies = teacher_force_entropies(source, prompt, reference);
    report.first_token.push_back({record.id, 0, entropies.front()});
    for (std::size_t t = 0; t < entropies.size(); ++t) {
      report.all_tokens.push_back({record.id, t, entropies[t]});
    }
  }
  const double upper = std::log(static_cast<double>(source.vocab_size()));
  report.first_token_bins = fixed_width_bins(report.first_token, upper, bins);
  report.all_token_bins = fixed_width_bins(report.all_tokens, upper, bins);
  return report;
}

namespace {

// Shortest round-trip form for configuration values, fixed 6 decimals for scores.
std::string param(double v) { return fmt::format("{}", v); }
std::string score(double v) { return fmt::format("{:.6f}", v); }
std::string score(const std::optional<double>& v) { return v ? score(*v) : std::string(); }

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

void write_points_csv(std::ostream& out, std::span<const TradeoffPoint> points) {
  out << "policy_kind,t0,theta,sigma,top_p,mean_quality,mean_self_bleu,eda,eda_range,n_instances\n";
  for (const auto& p : points) {
    const bool has_means = p.n_instances > 0;
    out << to_string(p.policy.kind) << ',' << param(p.policy.t0) << ',' << param(p.policy.theta)
        << ',' << param(p.policy.sigma) << ',' << param(p.policy.top_p) << ','
        << (has_means ? score(p.mean_quality) : "") << ','
        << (has_means ? score(p.mean_self_bleu) : "") << ',' << score(p.eda) << ','
        << score(p.eda_range) << ',' << p.n_instances << '\n';
  }
}

void write_instances_csv(std::ostream& out, std::span<const InstanceScore> scores) {
  out << "instance_id,policy_kind,t0,theta,sigma,quality,self_bleu\n";
  for (const auto& s : scores) {
    out << csv_field(s.instance_id) << ',' << to_string(s.policy.kind) << ',' << param(s.policy.t0) << ','
        << param(s.policy.theta) << ',' << param(s.policy.sigma) << ','
        << (s.ok ? score(s.quality) : "") << ',' << (s.ok ? score(s.self_bleu) : "") << '\n';
  }
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_low,bin_high,count\n";
  for (const auto& b : bins) out << score(b.low) << ',' << score(b.high) << ',' << b.count << '\n';
}

void write_entropy_samples_csv(std::ostream& out, std::span<const EntropySample> samples) {
  out << "instance_id,position,entropy\n";
  for (const auto& s : samples) out << csv_field(s.instance_id) << ',' << s.position << ',' << score(s.entropy) << '\n';
}

std::string sweep_metadata_json(const SweepConfig& config, const SweepResult& result,
                                const SweepProvenance& provenance) {
  Json meta;
  meta["tool_version"] = std::string(kToolVersion);
  meta["seed"] = config.seed;
  if (result.normalizers) {
    meta["normalizers"] = {{"q_max", result.normalizers->q_max},
                           {"q_min", result.normalizers->q_min},
                           {"d_max", result.normalizers->d_max},
                           {"d_min", result.normalizers->d_min}};
  } else {
    meta["normalizers"] = nullptr;
  }
  meta["model_hash"] = provenance.model_hash;
  meta["dataset_hash"] = provenance.dataset_hash;
  meta["task"] = std::string(to_string(config.task));
  meta["quality_metric"] = std::string(to_string(config.quality_metric));
  meta["k_samples"] = config.k_samples;
  meta["max_new_tokens"] = config.max_new_tokens;
  meta["top_p"] = config.top_p;
  meta["n_base"] = config.n_base;
  meta["grid_points"] = result.points.size();
  meta["failed_instances"] = result.failures;
  meta["warnings"] = result.warnings;
  return meta.dump(2) + "\n";
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "' for hashing: no such file");
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buffer[8192];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buffer[i]);
      h *= 0x100000001B3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_sweep_outputs(const SweepConfig& config, const SweepResult& result,
                         const SweepProvenance& provenance) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    throw InputError("cannot create output directory '" + config.out_dir.string() +
                     "': " + ec.message());
  }
  std::ostringstream points, instances;
  write_points_csv(points, result.points);
  write_instances_csv(instances, result.instances);
  write_file(config.out_dir / "points.csv", points.str());
  write_file(config.out_dir / "instances.csv", instances.str());
  write_file(config.out_dir / "metadata.json", sweep_metadata_json(config, result, provenance));
}

}  // namespace dyntemp
