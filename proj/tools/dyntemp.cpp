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

// dyntemp command-line tool: train / decode / sweep / analyze.
//
// Exit status: 0 on success, 2 on usage or validation errors, 1 on runtime
// failures (including any failed instance in a sweep).

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyntemp/decoder.hpp"
#include "dyntemp/error.hpp"
#include "dyntemp/harness.hpp"
#include "dyntemp/sampling.hpp"
#include "dyntemp/toy_lm.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct SharedFlags {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::size_t jobs = 1;
  std::string config;
};

struct TrainFlags {
  std::string corpus;
  int order = 3;
  double alpha = 0.1;
  std::string mode = "word";
  std::string out;
};

struct DecodeFlags {
  std::string model;
  std::string prompt;
  std::string policy = "fixed";
  double t0 = 1.0;
  double theta = 0.0;
  double sigma = 1.0;
  double n_base = 0.8;
  double top_p = 0.95;
  std::size_t k = 1;
  std::size_t max_new_tokens = 32;
  bool trace = false;
};

struct AnalyzeFlags {
  std::string report;
  std::string model;
  std::string dataset;
  std::string task = "freeform";
  std::size_t bins = 20;
  std::optional<std::size_t> max_instances;
};

/// Fills options the user did not pass on the command line from a JSON config
/// whose keys are the flag names with dashes replaced by underscores.
class ConfigOverlay {
 public:
  template <typename T>
  void bind(CLI::App* app, const std::string& flag, T& target) {
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    bindings_.push_back({key, app->get_option("--" + flag), [&target](const Json& v) {
                           target = v.get<T>();
                         }});
  }

  void apply(const std::string& path) const {
    std::ifstream in(path);
    if (!in) throw dyntemp::InputError("cannot open config '" + path + "': no such file");
    Json root;
    try {
      root = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw dyntemp::InputError("malformed config JSON '" + path + "': " + e.what());
    }
    if (!root.is_object()) throw dyntemp::InputError("config '" + path + "' must be a JSON object");
    for (const auto& [key, value] : root.items()) {
      const auto it = std::find_if(bindings_.begin(), bindings_.end(),
                                   [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end()) throw dyntemp::InputError("unknown config key '" + key + "'");
      if (it->option->count() > 0) continue;  // flags win over the file
      try {
        it->set(value);
      } catch (const Json::exception&) {
        throw dyntemp::InputError("config key '" + key + "' has the wrong type");
      }
    }
  }

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<void(const Json&)> set;
  };
  std::vector<Binding> bindings_;
};

void add_shared_flags(CLI::App* app, SharedFlags& shared, ConfigOverlay* overlay) {
  app->add_option("--seed", shared.seed, "Master random seed");
  app->add_option("--out-dir", shared.out_dir, "Output directory");
  app->add_option("--jobs", shared.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--config", shared.config, "JSON config file; command-line flags take precedence");
  if (overlay) {
    overlay->bind(app, "seed", shared.seed);
    overlay->bind(app, "out-dir", shared.out_dir);
    overlay->bind(app, "jobs", shared.jobs);
  }
}

/// Creates the directory and checks that a file can be written into it.
void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw dyntemp::InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path probe = dir / ".dyntemp-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw dyntemp::InputError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dyntemp::InputError("cannot write '" + path.string() + "'");
  out << text;
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt::format("{:.3f}", *v) : std::string("n/a");
}

int run_train(const TrainFlags& flags, const SharedFlags& shared) {
  dyntemp::NGramModel::validate_parameters(flags.order, flags.alpha);
  const auto mode = dyntemp::parse_token_mode(flags.mode);
  const fs::path out = flags.out.empty() ? fs::path(shared.out_dir) / "model.dtlm" : fs::path(flags.out);
  const auto corpus = dyntemp::load_corpus(flags.corpus);
  const auto model = dyntemp::NGramModel::train(corpus, flags.order, flags.alpha, mode);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  model.save_file(out);
  std::cout << "vocabulary size: " << model.vocab_size() << '\n'
            << "contexts: " << model.context_count() << '\n'
            << "model size: " << fs::file_size(out) << " bytes\n"
            << "wrote " << out.string() << '\n';
  return 0;
}

int run_decode(const DecodeFlags& flags, const SharedFlags& shared) {
  dyntemp::TemperaturePolicy policy;
  policy.kind = dyntemp::parse_policy_kind(flags.policy);
  policy.t0 = flags.t0;
  policy.theta = flags.theta;
  policy.sigma = flags.sigma;
  policy.n_base = flags.n_base;
  policy.top_p = flags.top_p;
  policy.validate();
  if (flags.k < 1) throw dyntemp::InputError("--k must be >= 1");
  if (flags.max_new_tokens < 1) throw dyntemp::InputError("--max-new-tokens must be >= 1");

  const auto model = dyntemp::NGramModel::load_file(flags.model);
  dyntemp::DecodeRequest request;
  request.prompt = model.tokenize(flags.prompt);
  request.policy = policy;
  request.max_new_tokens = flags.max_new_tokens;
  request.eos_token = model.eos_token();
  request.seed = shared.seed;

  const auto results = dyntemp::decode_k(model, request, flags.k);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& result = results[i];
    std::cout << "sample " << i << ": " << model.detokenize(result.tokens) << '\n';
    if (!flags.trace) continue;
    std::cout << "step\ttoken\tentropy\ttemperature\n";
    for (std::size_t s = 0; s < result.steps.size(); ++s) {
      const auto& step = result.steps[s];
      std::cout << s << '\t' << model.vocabulary().token(step.chosen_token) << '\t'
                << fmt::format("{:.6f}\t{:.6f}", step.entropy_nats, step.temperature) << '\n';
    }
  }
  return 0;
}

struct SweepOverrides {
  std::string model;
  std::string dataset;
};

dyntemp::SweepConfig sweep_config_from(const SharedFlags& shared, const SweepOverrides& overrides,
                                       const CLI::App* app) {
  if (shared.config.empty()) throw dyntemp::InputError("a sweep needs --config <file>");
  auto config = dyntemp::load_sweep_config(shared.config);
  if (!overrides.model.empty()) config.model_path = overrides.model;
  if (!overrides.dataset.empty()) config.dataset_path = overrides.dataset;
  if (app->get_option("--seed")->count() > 0) config.seed = shared.seed;
  if (app->get_option("--jobs")->count() > 0) config.jobs = shared.jobs;
  if (app->get_option("--out-dir")->count() > 0) config.out_dir = shared.out_dir;
  config.validate();
  if (config.model_path.empty()) throw dyntemp::InputError("config sets no 'model'");
  if (config.dataset_path.empty()) throw dyntemp::InputError("config sets no 'dataset'");
  return config;
}

struct LoadedSweep {
  dyntemp::SweepConfig config;
  dyntemp::SweepResult result;
  dyntemp::SweepProvenance provenance;
};

LoadedSweep load_and_run(dyntemp::SweepConfig config) {
  const auto model = dyntemp::NGramModel::load_file(config.model_path);
  const auto records = dyntemp::load_dataset(config.dataset_path, config.task);
  LoadedSweep run{config, dyntemp::run_sweep(model, records, config),
                  {dyntemp::file_hash(config.model_path), dyntemp::file_hash(config.dataset_path)}};
  for (const auto& warning : run.result.warnings) std::cerr << "warning: " << warning << '\n';
  return run;
}

int run_sweep_cmd(const SharedFlags& shared, const SweepOverrides& overrides,
                  const CLI::App* app) {
  const auto config = sweep_config_from(shared, overrides, app);
  ensure_writable_dir(config.out_dir);
  const auto run = load_and_run(config);
  dyntemp::write_sweep_outputs(run.config, run.result, run.provenance);

  std::cout << "policy_kind\tbest_eda\tbest_eda_range\n";
  for (const auto& row : dyntemp::best_eda_table(run.result.points)) {
    std::cout << dyntemp::to_string(row.kind) << '\t' << fmt_optional(row.best_eda) << '\t'
              << fmt_optional(row.best_eda_range) << '\n';
  }
  std::cout << "wrote " << (config.out_dir / "points.csv").string() << ", instances.csv, metadata.json\n";
  if (run.result.failures > 0) {
    std::cerr << "error: " << run.result.failures << " instance evaluations failed\n";
    return kExitRuntime;
  }
  return 0;
}

int run_analyze(const AnalyzeFlags& flags, const SharedFlags& shared, const CLI::App* app) {
  if (flags.report == "optimal-temp") {
    const auto config = sweep_config_from(shared, {flags.model, flags.dataset}, app);
    for (const auto& grid : config.policies) {
      if (grid.kind != dyntemp::PolicyKind::Fixed) {
        throw dyntemp::InputError("optimal-temp needs a config with only fixed policies");
      }
    }
    ensure_writable_dir(config.out_dir);
    const auto run = load_and_run(config);
    const auto bins = dyntemp::optimal_temperature_histogram(run.result.instances);
    std::ostringstream csv;
    dyntemp::write_histogram_csv(csv, bins);
    write_text(config.out_dir / "optimal_temperature.csv", csv.str());
    std::cout << csv.str();
    return run.result.failures > 0 ? kExitRuntime : 0;
  }

  // entropy-density
  if (flags.model.empty() || flags.dataset.empty()) {
    throw dyntemp::InputError("entropy-density needs --model and --dataset");
  }
  if (flags.bins < 1) throw dyntemp::InputError("--bins must be >= 1");
  const auto task = dyntemp::parse_task(flags.task);
  const fs::path out_dir = shared.out_dir;
  ensure_writable_dir(out_dir);
  const auto model = dyntemp::NGramModel::load_file(flags.model);
  auto records = dyntemp::load_dataset(flags.dataset, task);
  if (flags.max_instances && *flags.max_instances < records.size()) {
    records.resize(*flags.max_instances);
  }
  const auto report = dyntemp::entropy_density_report(model, records, flags.bins);
  const auto emit = [&](const fs::path& name, auto&& writer) {
    std::ostringstream csv;
    writer(csv);
    write_text(out_dir / name, csv.str());
  };
  emit("entropy_first_token.csv",
       [&](std::ostream& o) { dyntemp::write_histogram_csv(o, report.first_token_bins); });
  emit("entropy_all_tokens.csv",
       [&](std::ostream& o) { dyntemp::write_histogram_csv(o, report.all_token_bins); });
  emit("entropy_first_token_samples.csv",
       [&](std::ostream& o) { dyntemp::write_entropy_samples_csv(o, report.first_token); });
  emit("entropy_all_token_samples.csv",
       [&](std::ostream& o) { dyntemp::write_entropy_samples_csv(o, report.all_tokens); });
  std::cout << "instances: " << report.first_token.size() << '\n'
            << "reference tokens: " << report.all_tokens.size() << '\n'
            << "wrote entropy CSVs to " << out_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-based dynamic temperature sampling toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dyntemp::kToolVersion));

  SharedFlags shared;

  TrainFlags train_flags;
  ConfigOverlay train_overlay;
  auto* train = app.add_subcommand("train", "Train the n-gram model on a text corpus");
  add_shared_flags(train, shared, &train_overlay);
  train->add_option("--corpus", train_flags.corpus, "Text corpus, one record per line");
  train->add_option("--order", train_flags.order, "n-gram order, 1..6");
  train->add_option("--alpha", train_flags.alpha, "Add-alpha smoothing constant");
  train->add_option("--mode", train_flags.mode, "Tokenization: word or char");
  train->add_option("--out", train_flags.out, "Model output path (default <out-dir>/model.dtlm)");
  train_overlay.bind(train, "corpus", train_flags.corpus);
  train_overlay.bind(train, "out", train_flags.out);
  train_overlay.bind(train, "mode", train_flags.mode);
  train_overlay.bind(train, "order", train_flags.order);
  train_overlay.bind(train, "alpha", train_flags.alpha);

  DecodeFlags decode_flags;
  ConfigOverlay decode_overlay;
  auto* decode = app.add_subcommand("decode", "Generate samples from a trained model");
  add_shared_flags(decode, shared, &decode_overlay);
  decode->add_option("--model", decode_flags.model, "Model file");
  decode->add_option("--prompt", decode_flags.prompt, "Prompt text");
  decode->add_option("--policy", decode_flags.policy, "fixed, edt, instance_edt, udt or kld");
  decode->add_option("--t0", decode_flags.t0, "Baseline temperature");
  decode->add_option("--theta", decode_flags.theta, "EDT/UDT sharpness");
  decode->add_option("--sigma", decode_flags.sigma, "KLD half-life");
  decode->add_option("--n-base", decode_flags.n_base, "Schedule base, in (0, 1)");
  decode->add_option("--top-p", decode_flags.top_p, "Nucleus mass");
  decode->add_option("--k", decode_flags.k, "Number of samples");
  decode->add_option("--max-new-tokens", decode_flags.max_new_tokens, "Generation length cap");
  decode->add_flag("--trace", decode_flags.trace, "Print the per-step trace");
  decode_overlay.bind(decode, "model", decode_flags.model);
  decode_overlay.bind(decode, "prompt", decode_flags.prompt);
  decode_overlay.bind(decode, "policy", decode_flags.policy);
  decode_overlay.bind(decode, "t0", decode_flags.t0);
  decode_overlay.bind(decode, "theta", decode_flags.theta);
  decode_overlay.bind(decode, "sigma", decode_flags.sigma);
  decode_overlay.bind(decode, "n-base", decode_flags.n_base);
  decode_overlay.bind(decode, "top-p", decode_flags.top_p);
  decode_overlay.bind(decode, "k", decode_flags.k);
  decode_overlay.bind(decode, "max-new-tokens", decode_flags.max_new_tokens);
  decode_overlay.bind(decode, "trace", decode_flags.trace);

  auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter sweep from a JSON config");
  add_shared_flags(sweep, shared, nullptr);
  sweep->add_option("config_path", shared.config, "Sweep config (same as --config)");
  SweepOverrides sweep_overrides;
  sweep->add_option("--model", sweep_overrides.model, "Model file, overriding the config");
  sweep->add_option("--dataset", sweep_overrides.dataset, "Dataset file, overriding the config");

  AnalyzeFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "Optimal-temperature histogram or entropy density");
  analyze->add_option("report", analyze_flags.report, "optimal-temp or entropy-density")
      ->required()
      ->check(CLI::IsMember({"optimal-temp", "entropy-density"}));
  add_shared_flags(analyze, shared, nullptr);
  analyze->add_option("--model", analyze_flags.model, "Model file (overrides the config for optimal-temp)");
  analyze->add_option("--dataset", analyze_flags.dataset, "JSONL dataset (overrides the config for optimal-temp)");
  analyze->add_option("--task", analyze_flags.task, "Dataset task (entropy-density)");
  analyze->add_option("--bins", analyze_flags.bins, "Histogram bins over [0, ln V]");
  analyze->add_option("--max-instances", analyze_flags.max_instances, "Use only the first N records");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (train->parsed()) {
      if (!shared.config.empty()) train_overlay.apply(shared.config);
      if (train_flags.corpus.empty()) throw dyntemp::InputError("train needs --corpus");
      return run_train(train_flags, shared);
    }
    if (decode->parsed()) {
      if (!shared.config.empty()) decode_overlay.apply(shared.config);
      if (decode_flags.model.empty()) throw dyntemp::InputError("decode needs --model");
      return run_decode(decode_flags, shared);
    }
    if (sweep->parsed()) return run_sweep_cmd(shared, sweep_overrides, sweep);
    if (analyze->parsed()) return run_analyze(analyze_flags, shared, analyze);
  } catch (const dyntemp::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const dyntemp::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
