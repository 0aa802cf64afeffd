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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyntemp/decoder.hpp"
#include "dyntemp/metrics.hpp"
#include "dyntemp/sampling.hpp"

namespace dyntemp {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Task { Summarization, Qa, Translation, Freeform };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

struct DatasetRecord {
  std::string id;
  std::string input;  // prompt template already applied
  std::string reference;
  Task task = Task::Freeform;
};

/// Wraps a raw input in the prompt template of its task:
///   summarization  input + "\n"
///   qa             context, then "\n\nQ: " q "\nA: " a per history turn,
///                  then "\n\nQ: " question "\nA: " (or just "\nA: " when
///                  the record carries no separate question)
///   translation    input + "\nTranslate English to Chinese:\n"
///   freeform       unchanged
std::string apply_template(Task task, std::string_view input,
                           std::optional<std::string_view> question = std::nullopt,
                           std::span<const std::pair<std::string, std::string>> history = {});

/// One JSON object per line with string fields "input" and "reference", an
/// optional "id" (string or integer; defaults to the line number) and, for qa,
/// optional "question" and "history" ([{"q": ..., "a": ...}]). Blank lines are
/// skipped. Errors name the 1-based line number.
std::vector<DatasetRecord> parse_dataset(std::istream& in, Task task);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path, Task task);

enum class QualityMetric { Auto, RougeL, Bleu };
std::string_view to_string(QualityMetric metric);
QualityMetric parse_quality_metric(std::string_view name);

/// ROUGE-L F1 x 100 or BLEU, both on the 0..100 scale. Auto picks BLEU for
/// translation and ROUGE-L otherwise.
double score_quality(QualityMetric metric, Task task, std::string_view hypothesis,
                     std::string_view reference);

/// One policy kind and the Cartesian grid over its hyperparameters.
/// Expansion order is t0-major, then theta, then sigma.
struct PolicyGrid {
  PolicyKind kind = PolicyKind::Fixed;
  std::vector<double> t0s{1.0};
  std::vector<double> thetas{0.0};
  std::vector<double> sigmas{1.0};
};

struct SweepConfig {
  std::vector<PolicyGrid> policies;
  std::size_t k_samples = 5;
  std::uint64_t seed = 0;
  std::size_t max_new_tokens = 32;
  double top_p = 0.95;
  double n_base = 0.8;
  Task task = Task::Freeform;
  QualityMetric quality_metric = QualityMetric::Auto;
  std::filesystem::path model_path;
  std::filesystem::path dataset_path;
  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;
  std::optional<std::size_t> max_instances;

  /// Every grid point as a policy, in output order.
  std::vector<TemperaturePolicy> expand() const;

  /// Throws InputError on an empty grid, k < 2, jobs < 1 or any invalid grid point.
  void validate() const;
};

/// Reads a JSON config. Keys mirror the CLI flags with underscores
/// ("max_new_tokens"); relative model/dataset/out_dir paths resolve against
/// the config file's directory. Grid keys ("t0", "theta", "sigma") take a
/// number or a list of numbers.
SweepConfig parse_sweep_config(std::string_view json_text,
                               const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Quality and diversity of one instance at one grid point.
struct InstanceScore {
  std::string instance_id;
  std::size_t instance_index = 0;
  std::size_t grid_index = 0;
  TemperaturePolicy policy;
  bool ok = false;
  double quality = 0.0;    // mean over the k samples
  double self_bleu = 0.0;  // across the k samples
  std::string error;
  std::vector<std::string> samples;
};

struct TradeoffPoint {
  TemperaturePolicy policy;
  double mean_quality = 0.0;
  double mean_self_bleu = 0.0;
  std::optional<double> eda;
  std::optional<double> eda_range;
  std::size_t n_instances = 0;
  std::size_t n_failed = 0;
};

struct SweepResult {
  std::vector<TradeoffPoint> points;
  std::vector<InstanceScore> instances;  // ordered by (grid index, instance index)
  std::optional<SweepNormalizers> normalizers;
  std::vector<std::string> warnings;
  std::size_t failures = 0;
};

/// Decodes k samples per (grid point, instance), scores them, aggregates per
/// grid point and attaches EDA / EDA_range against normalizers taken over all
/// points. Failing instances are recorded and excluded from the means.
SweepResult run_sweep(const TextLogitSource& source, std::span<const DatasetRecord> records,
                      const SweepConfig& config);

struct BestEdaRow {
  PolicyKind kind = PolicyKind::Fixed;
  std::optional<double> best_eda;
  std::optional<double> best_eda_range;
};

/// Minimum EDA and minimum EDA_range per policy kind, in first-appearance order.
/// The two minima may come from different grid points.
std::vector<BestEdaRow> best_eda_table(std::span<const TradeoffPoint> points);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

/// Per instance, the grid temperature with the highest quality (ties to the
/// lowest temperature). One bin per distinct grid temperature, edges at the
/// midpoints between neighbours. Throws InputError if any point is not Fixed.
std::vector<HistogramBin> optimal_temperature_histogram(std::span<const InstanceScore> scores);

struct EntropySample {
  std::string instance_id;
  std::size_t position = 0;
  double entropy = 0.0;
};

struct EntropyDensity {
  std::vector<EntropySample> first_token;  // one per instance
  std::vector<EntropySample> all_tokens;   // one per reference token
  std::vector<HistogramBin> first_token_bins;
  std::vector<HistogramBin> all_token_bins;
};

/// Teacher-forced entropies of every reference token, binned into `bins`
/// equal-width bins over [0, ln V].
EntropyDensity entropy_density_report(const TextLogitSource& source,
                                      std::span<const DatasetRecord> records,
                                      std::size_t bins = 20);

// Serialization. All writers are deterministic byte-for-byte.

/// policy_kind,t0,theta,sigma,top_p,mean_quality,mean_self_bleu,eda,eda_range,n_instances
void write_points_csv(std::ostream& out, std::span<const TradeoffPoint> points);
/// instance_id,policy_kind,t0,theta,sigma,quality,self_bleu
void write_instances_csv(std::ostream& out, std::span<const InstanceScore> scores);
/// bin_low,bin_high,count
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);
/// instance_id,position,entropy
void write_entropy_samples_csv(std::ostream& out, std::span<const EntropySample> samples);

struct SweepProvenance {
  std::string model_hash;
  std::string dataset_hash;
};

std::string sweep_metadata_json(const SweepConfig& config, const SweepResult& result,
                                const SweepProvenance& provenance);

/// FNV-1a 64 of a file's bytes as 16 lowercase hex digits.
std::string file_hash(const std::filesystem::path& path);

/// Writes points.csv, instances.csv and metadata.json into config.out_dir.
void write_sweep_outputs(const SweepConfig& config, const SweepResult& result,
                         const SweepProvenance& provenance);

}  // namespace dyntemp
