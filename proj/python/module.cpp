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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dyntemp/decoder.hpp"
#include "dyntemp/error.hpp"
#include "dyntemp/harness.hpp"
#include "dyntemp/metrics.hpp"
#include "dyntemp/sampling.hpp"
#include "dyntemp/toy_lm.hpp"

namespace py = pybind11;
using namespace dyntemp;

namespace {

std::vector<double> as_vector(const CategoricalDistribution& d) {
  return {d.probs().begin(), d.probs().end()};
}

template <typename Writer, typename Items>
std::string to_csv(Writer writer, const Items& items) {
  std::ostringstream out;
  writer(out, items);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dynamic-temperature sampling core (C++).";
  m.attr("__version__") = std::string(kToolVersion);

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", error);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<FormatError>(m, "FormatError", error);
  py::register_exception<DecodeError>(m, "DecodeError", error);

  // Sampling primitives.
  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("FIXED", PolicyKind::Fixed)
      .value("EDT", PolicyKind::EDT)
      .value("INSTANCE_EDT", PolicyKind::InstanceEDT)
      .value("UDT", PolicyKind::UDT)
      .value("KLD", PolicyKind::KLD);

  py::class_<TemperaturePolicy>(m, "TemperaturePolicy")
      .def(py::init<>())
      .def_readwrite("kind", &TemperaturePolicy::kind)
      .def_readwrite("t0", &TemperaturePolicy::t0)
      .def_readwrite("theta", &TemperaturePolicy::theta)
      .def_readwrite("n_base", &TemperaturePolicy::n_base)
      .def_readwrite("sigma", &TemperaturePolicy::sigma)
      .def_readwrite("top_p", &TemperaturePolicy::top_p)
      .def("validate", &TemperaturePolicy::validate)
      .def_static("fixed", &TemperaturePolicy::fixed, py::arg("t0"))
      .def_static("edt", &TemperaturePolicy::edt, py::arg("t0"), py::arg("theta"))
      .def_static("instance_edt", &TemperaturePolicy::instance_edt, py::arg("t0"), py::arg("theta"))
      .def_static("udt", &TemperaturePolicy::udt, py::arg("t0"), py::arg("theta"))
      .def_static("kld", &TemperaturePolicy::kld, py::arg("t0"), py::arg("sigma"))
      .def("__repr__", [](const TemperaturePolicy& p) {
        std::ostringstream out;
        out << "TemperaturePolicy(kind=" << to_string(p.kind) << ", t0=" << p.t0
            << ", theta=" << p.theta << ", sigma=" << p.sigma << ", top_p=" << p.top_p << ")";
        return out.str();
      });

  m.def("parse_policy_kind", &parse_policy_kind, py::arg("name"));
  m.def(
      "softmax_with_temperature",
      [](std::vector<double> logits, double t) {
        return as_vector(softmax_with_temperature(LogitVector(std::move(logits)), t));
      },
      py::arg("logits"), py::arg("t"));
  m.def(
      "greedy_argmax", [](std::vector<double> logits) { return greedy_argmax(LogitVector(std::move(logits))); },
      py::arg("logits"));
  m.def(
      "entropy_nats",
      [](std::vector<double> probs) { return entropy_nats(CategoricalDistribution(std::move(probs))); },
      py::arg("probs"));
  m.def("uncertainty_from_top1", &uncertainty_from_top1, py::arg("top1_prob"));
  m.def("edt_temperature", &edt_temperature, py::arg("entropy"), py::arg("policy"));
  m.def("udt_temperature", &udt_temperature, py::arg("top1_prob"), py::arg("policy"));
  m.def("kld_temperature", &kld_temperature, py::arg("kl"), py::arg("policy"));
  m.def(
      "kl_divergence",
      [](std::vector<double> p, std::vector<double> q) {
        return kl_divergence(CategoricalDistribution(std::move(p)), CategoricalDistribution(std::move(q)));
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "top_p_filter",
      [](std::vector<double> probs, double p) {
        return as_vector(top_p_filter(CategoricalDistribution(std::move(probs)), p));
      },
      py::arg("probs"), py::arg("p"));

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_unit", &RandomStream::next_unit)
      .def("next_u64", &RandomStream::next_u64)
      .def(
          "sample",
          [](RandomStream& rng, std::vector<double> probs) {
            return sample_token(CategoricalDistribution(std::move(probs)), rng);
          },
          py::arg("probs"));
  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("instance"), py::arg("sample"));

  // Toy language model.
  py::enum_<TokenMode>(m, "TokenMode").value("WORD", TokenMode::Word).value("CHAR", TokenMode::Char);

  py::class_<NGramModel>(m, "NGramModel")
      .def_static(
          "train",
          [](const std::vector<std::string>& corpus, int order, double alpha, TokenMode mode) {
            return NGramModel::train(corpus, order, alpha, mode);
          },
          py::arg("corpus"), py::arg("order"), py::arg("alpha"), py::arg("mode") = TokenMode::Word)
      .def_static("load", &NGramModel::load_file, py::arg("path"))
      .def_static(
          "from_bytes",
          [](const py::bytes& data) {
            const std::string s = data;
            const std::vector<std::uint8_t> bytes(s.begin(), s.end());
            return NGramModel::load(bytes);
          },
          py::arg("data"))
      .def("to_bytes",
           [](const NGramModel& model) {
             const auto bytes = model.save();
             return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
           })
      .def("save", &NGramModel::save_file, py::arg("path"))
      .def_property_readonly("order", &NGramModel::order)
      .def_property_readonly("alpha", &NGramModel::alpha)
      .def_property_readonly("mode", &NGramModel::mode)
      .def_property_readonly("vocab_size", &NGramModel::vocab_size)
      .def_property_readonly("context_count", &NGramModel::context_count)
      .def_property_readonly("eos_token", &NGramModel::eos_token)
      .def("tokenize", &NGramModel::tokenize, py::arg("text"))
      .def(
          "detokenize",
          [](const NGramModel& model, const std::vector<TokenId>& tokens) { return model.detokenize(tokens); },
          py::arg("tokens"))
      .def(
          "token", [](const NGramModel& model, TokenId id) { return model.vocabulary().token(id); },
          py::arg("id"))
      .def(
          "logits",
          [](const NGramModel& model, const std::vector<TokenId>& prompt, const std::vector<TokenId>& generated) {
            const auto l = model.logits(prompt, generated);
            return std::vector<double>(l.values().begin(), l.values().end());
          },
          py::arg("prompt"), py::arg("generated") = std::vector<TokenId>{})
      .def(
          "row_probabilities",
          [](const NGramModel& model, const std::vector<TokenId>& history) {
            return model.row_probabilities(history);
          },
          py::arg("history"));

  // Decoding.
  py::enum_<Termination>(m, "Termination").value("EOS", Termination::Eos).value("MAX_LENGTH", Termination::MaxLength);

  py::class_<StepDecision>(m, "StepDecision")
      .def_readonly("temperature", &StepDecision::temperature)
      .def_readonly("entropy_nats", &StepDecision::entropy_nats)
      .def_readonly("uncertainty", &StepDecision::uncertainty)
      .def_readonly("kl_divergence", &StepDecision::kl_divergence)
      .def_readonly("chosen_token", &StepDecision::chosen_token);

  py::class_<DecodeResult>(m, "DecodeResult")
      .def_readonly("tokens", &DecodeResult::tokens)
      .def_readonly("steps", &DecodeResult::steps)
      .def_readonly("terminated_by", &DecodeResult::terminated_by);

  const auto make_request = [](const NGramModel& model, const std::string& prompt,
                               const TemperaturePolicy& policy, std::size_t max_new_tokens,
                               std::uint64_t seed) {
    DecodeRequest request;
    request.prompt = model.tokenize(prompt);
    request.policy = policy;
    request.max_new_tokens = max_new_tokens;
    request.eos_token = model.eos_token();
    request.seed = seed;
    return request;
  };
  m.def(
      "decode",
      [make_request](const NGramModel& model, const std::string& prompt, const TemperaturePolicy& policy,
                     std::size_t max_new_tokens, std::uint64_t seed) {
        const auto request = make_request(model, prompt, policy, max_new_tokens, seed);
        py::gil_scoped_release release;
        return decode(model, request);
      },
      py::arg("model"), py::arg("prompt"), py::arg("policy"), py::arg("max_new_tokens") = 32,
      py::arg("seed") = 0);
  m.def(
      "decode_k",
      [make_request](const NGramModel& model, const std::string& prompt, const TemperaturePolicy& policy,
                     std::size_t k, std::size_t max_new_tokens, std::uint64_t seed, std::uint64_t instance) {
        const auto request = make_request(model, prompt, policy, max_new_tokens, seed);
        py::gil_scoped_release release;
        return decode_k(model, request, k, instance);
      },
      py::arg("model"), py::arg("prompt"), py::arg("policy"), py::arg("k"), py::arg("max_new_tokens") = 32,
      py::arg("seed") = 0, py::arg("instance") = 0);
  m.def(
      "teacher_force_entropies",
      [](const NGramModel& model, const std::string& prompt, const std::string& reference) {
        return teacher_force_entropies(model, model.tokenize(prompt), model.tokenize(reference));
      },
      py::arg("model"), py::arg("prompt"), py::arg("reference"));

  // Metrics.
  m.def("normalize_text", &normalize_text, py::arg("text"));
  m.def(
      "rouge_l_f1", [](const Tokens& h, const Tokens& r) { return rouge_l_f1(h, r); }, py::arg("hypothesis"),
      py::arg("reference"));
  m.def(
      "sentence_bleu", [](const Tokens& h, const std::vector<Tokens>& refs) { return sentence_bleu(h, refs); },
      py::arg("hypothesis"), py::arg("references"));
  m.def(
      "self_bleu", [](const std::vector<Tokens>& samples) { return self_bleu(samples); }, py::arg("samples"));

  py::class_<SweepNormalizers>(m, "SweepNormalizers")
      .def(py::init([](double q_max, double d_max, double q_min, double d_min) {
             return SweepNormalizers{q_max, d_max, q_min, d_min};
           }),
           py::arg("q_max"), py::arg("d_max"), py::arg("q_min") = 0.0, py::arg("d_min") = 0.0)
      .def_readwrite("q_max", &SweepNormalizers::q_max)
      .def_readwrite("d_max", &SweepNormalizers::d_max)
      .def_readwrite("q_min", &SweepNormalizers::q_min)
      .def_readwrite("d_min", &SweepNormalizers::d_min);
  m.def("eda", &eda, py::arg("quality"), py::arg("diversity"), py::arg("norms"));
  m.def("eda_range", &eda_range, py::arg("quality"), py::arg("diversity"), py::arg("norms"));

  // Harness.
  py::enum_<Task>(m, "Task")
      .value("SUMMARIZATION", Task::Summarization)
      .value("QA", Task::Qa)
      .value("TRANSLATION", Task::Translation)
      .value("FREEFORM", Task::Freeform);

  py::class_<DatasetRecord>(m, "DatasetRecord")
      .def_readonly("id", &DatasetRecord::id)
      .def_readonly("input", &DatasetRecord::input)
      .def_readonly("reference", &DatasetRecord::reference)
      .def_readonly("task", &DatasetRecord::task);
  m.def("load_dataset", &load_dataset, py::arg("path"), py::arg("task") = Task::Freeform);

  py::class_<PolicyGrid>(m, "PolicyGrid")
      .def(py::init([](PolicyKind kind, std::vector<double> t0s, std::vector<double> thetas,
                       std::vector<double> sigmas) {
             return PolicyGrid{kind, std::move(t0s), std::move(thetas), std::move(sigmas)};
           }),
           py::arg("kind"), py::arg("t0s"), py::arg("thetas") = std::vector<double>{0.0},
           py::arg("sigmas") = std::vector<double>{1.0})
      .def_readwrite("kind", &PolicyGrid::kind)
      .def_readwrite("t0s", &PolicyGrid::t0s)
      .def_readwrite("thetas", &PolicyGrid::thetas)
      .def_readwrite("sigmas", &PolicyGrid::sigmas);

  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("policies", &SweepConfig::policies)
      .def_readwrite("k_samples", &SweepConfig::k_samples)
      .def_readwrite("seed", &SweepConfig::seed)
      .def_readwrite("max_new_tokens", &SweepConfig::max_new_tokens)
      .def_readwrite("top_p", &SweepConfig::top_p)
      .def_readwrite("n_base", &SweepConfig::n_base)
      .def_readwrite("task", &SweepConfig::task)
      .def_readwrite("model_path", &SweepConfig::model_path)
      .def_readwrite("dataset_path", &SweepConfig::dataset_path)
      .def_readwrite("out_dir", &SweepConfig::out_dir)
      .def_readwrite("jobs", &SweepConfig::jobs)
      .def_readwrite("max_instances", &SweepConfig::max_instances)
      .def("expand", &SweepConfig::expand)
      .def("validate", &SweepConfig::validate);
  m.def("load_sweep_config", &load_sweep_config, py::arg("path"));

  py::class_<InstanceScore>(m, "InstanceScore")
      .def_readonly("instance_id", &InstanceScore::instance_id)
      .def_readonly("instance_index", &InstanceScore::instance_index)
      .def_readonly("grid_index", &InstanceScore::grid_index)
      .def_readonly("policy", &InstanceScore::policy)
      .def_readonly("ok", &InstanceScore::ok)
      .def_readonly("quality", &InstanceScore::quality)
      .def_readonly("self_bleu", &InstanceScore::self_bleu)
      .def_readonly("error", &InstanceScore::error)
      .def_readonly("samples", &InstanceScore::samples);

  py::class_<TradeoffPoint>(m, "TradeoffPoint")
      .def_readonly("policy", &TradeoffPoint::policy)
      .def_readonly("mean_quality", &TradeoffPoint::mean_quality)
      .def_readonly("mean_self_bleu", &TradeoffPoint::mean_self_bleu)
      .def_readonly("eda", &TradeoffPoint::eda)
      .def_readonly("eda_range", &TradeoffPoint::eda_range)
      .def_readonly("n_instances", &TradeoffPoint::n_instances)
      .def_readonly("n_failed", &TradeoffPoint::n_failed);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("points", &SweepResult::points)
      .def_readonly("instances", &SweepResult::instances)
      .def_readonly("normalizers", &SweepResult::normalizers)
      .def_readonly("warnings", &SweepResult::warnings)
      .def_readonly("failures", &SweepResult::failures)
      .def("points_csv", [](const SweepResult& r) { return to_csv(write_points_csv, std::span(r.points)); })
      .def("instances_csv",
           [](const SweepResult& r) { return to_csv(write_instances_csv, std::span(r.instances)); });

  m.def(
      "run_sweep",
      [](const NGramModel& model, const std::vector<DatasetRecord>& records, const SweepConfig& config) {
        py::gil_scoped_release release;
        return run_sweep(model, records, config);
      },
      py::arg("model"), py::arg("records"), py::arg("config"));

  py::class_<BestEdaRow>(m, "BestEdaRow")
      .def_readonly("kind", &BestEdaRow::kind)
      .def_readonly("best_eda", &BestEdaRow::best_eda)
      .def_readonly("best_eda_range", &BestEdaRow::best_eda_range);
  m.def(
      "best_eda_table", [](const std::vector<TradeoffPoint>& points) { return best_eda_table(points); },
      py::arg("points"));

  py::class_<HistogramBin>(m, "HistogramBin")
      .def_readonly("low", &HistogramBin::low)
      .def_readonly("high", &HistogramBin::high)
      .def_readonly("count", &HistogramBin::count);
  m.def(
      "optimal_temperature_histogram",
      [](const std::vector<InstanceScore>& scores) { return optimal_temperature_histogram(scores); },
      py::arg("scores"));

  py::class_<EntropySample>(m, "EntropySample")
      .def_readonly("instance_id", &EntropySample::instance_id)
      .def_readonly("position", &EntropySample::position)
      .def_readonly("entropy", &EntropySample::entropy);
  py::class_<EntropyDensity>(m, "EntropyDensity")
      .def_readonly("first_token", &EntropyDensity::first_token)
      .def_readonly("all_tokens", &EntropyDensity::all_tokens)
      .def_readonly("first_token_bins", &EntropyDensity::first_token_bins)
      .def_readonly("all_token_bins", &EntropyDensity::all_token_bins);
  m.def(
      "entropy_density_report",
      [](const NGramModel& model, const std::vector<DatasetRecord>& records, std::size_t bins) {
        return entropy_density_report(model, records, bins);
      },
      py::arg("model"), py::arg("records"), py::arg("bins") = 20);
}
