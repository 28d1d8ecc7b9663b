// Copyright 2026 The advcsc Authors.
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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "advcsc/advtrain.h"
#include "advcsc/attack.h"
#include "advcsc/confusion.h"
#include "advcsc/corpus.h"
#include "advcsc/eval.h"
#include "advcsc/scorer.h"

namespace py = pybind11;
using namespace advcsc;

namespace {

using PyPair = std::pair<std::string, std::string>;

Sentence text(const std::string& s) { return decode_nfc(s); }
std::string str(std::u32string_view s) { return encode_utf8(s); }

Char one_char(const std::string& s) {
  const Sentence t = text(s);
  if (t.size() != 1) throw py::value_error("expected a single character, got '" + s + "'");
  return t[0];
}

std::vector<SentencePair> to_pairs(const std::vector<PyPair>& pairs) {
  std::vector<SentencePair> out;
  out.reserve(pairs.size());
  for (const auto& [s, t] : pairs) {
    SentencePair p{text(s), text(t)};
    if (p.source.size() != p.target.size()) {
      throw py::value_error("source and target lengths differ: '" + s + "' / '" + t + "'");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PyPair> from_pairs(const std::vector<SentencePair>& pairs) {
  std::vector<PyPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.emplace_back(str(p.source), str(p.target));
  return out;
}

std::vector<Sentence> to_sentences(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(text(l));
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

CharClass char_class(const std::string& name) { return parse_char_class(name); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Confusion-set corruption, greedy adversarial attacks and adversarial "
            "training for character-level spelling correction";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<ConfusionSet>(m, "ConfusionSet")
      .def(py::init<>())
      .def_static("parse", [](const std::vector<std::string>& lines) {
        return parse_confusion(lines);
      }, py::arg("lines"))
      .def_static("load", &load_confusion, py::arg("path"))
      .def("add", [](ConfusionSet& d, const std::string& key, const std::string& cands) {
        d.add(one_char(key), text(cands));
      })
      .def("candidates", [](const ConfusionSet& d, const std::string& c) {
        const auto& v = d.candidates(one_char(c));
        return str(Sentence(v.begin(), v.end()));
      })
      .def("characters", [](const ConfusionSet& d) {
        const auto v = d.all_characters();
        return str(Sentence(v.begin(), v.end()));
      })
      .def_property_readonly("dropped_self_loops", &ConfusionSet::dropped_self_loops)
      .def("__len__", &ConfusionSet::size);

  py::class_<Vocab>(m, "Vocab")
      .def(py::init([](const std::string& chars) {
        const Sentence s = text(chars);
        return Vocab(std::vector<Char>(s.begin(), s.end()));
      }), py::arg("characters"))
      .def("id", [](const Vocab& v, const std::string& c) { return v.id(one_char(c)); })
      .def("character", [](const Vocab& v, int id) { return encode_utf8(v.character(id)); })
      .def("encode", [](const Vocab& v, const std::string& s) { return v.encode(text(s)); })
      .def_property_readonly("characters", [](const Vocab& v) {
        const auto c = v.characters();
        return str(Sentence(c.begin(), c.end()));
      })
      .def("__len__", &Vocab::size)
      .def("__eq__", [](const Vocab& a, const Vocab& b) { return a == b; });

  m.def("build_vocab", [](const std::vector<std::string>& sentences, std::size_t min_count,
                          const std::string& forced) {
    const Sentence f = text(forced);
    return build_vocab(to_sentences(sentences), min_count, std::vector<Char>(f.begin(), f.end()));
  }, py::arg("sentences"), py::arg("min_count") = 1, py::arg("forced") = "");

  py::class_<CorruptionPolicy>(m, "CorruptionPolicy")
      .def(py::init([](double select_rate, double confusion_prob, std::uint64_t seed,
                       const std::string& attackable) {
        CorruptionPolicy p{select_rate, confusion_prob, seed, char_class(attackable)};
        p.validate();
        return p;
      }), py::arg("select_rate") = 0.25, py::arg("confusion_prob") = 0.9,
          py::arg("seed") = 0, py::arg("attackable") = "cjk")
      .def_readwrite("select_rate", &CorruptionPolicy::select_rate)
      .def_readwrite("confusion_prob", &CorruptionPolicy::confusion_prob)
      .def_readwrite("seed", &CorruptionPolicy::seed);

  m.def("synthesize", [](const std::vector<std::string>& lines, const CorruptionPolicy& policy,
                         const ConfusionSet& d, const Vocab& vocab, std::size_t workers) {
    SynthesisStats s;
    const auto pairs = synthesize_corpus(to_sentences(lines), policy, d, vocab, workers, &s);
    py::dict stats;
    stats["attackable"] = s.attackable;
    stats["selected"] = s.selected;
    stats["replaced"] = s.replaced;
    stats["confusion_replaced"] = s.confusion_replaced;
    stats["random_replaced"] = s.random_replaced;
    stats["replaced_fraction"] = s.replaced_fraction();
    stats["confusion_fraction"] = s.confusion_fraction();
    return py::make_tuple(from_pairs(pairs), stats);
  }, py::arg("lines"), py::arg("policy"), py::arg("confusion"), py::arg("vocab"),
     py::arg("workers") = 1);

  py::class_<ScorerDims>(m, "ScorerDims")
      .def(py::init([](std::size_t dim, std::size_t window, std::size_t hidden) {
        ScorerDims d;
        d.dim = dim;
        d.window = window;
        d.hidden = hidden;
        return d;
      }), py::arg("dim") = 32, py::arg("window") = 2, py::arg("hidden") = 64)
      .def_readonly("vocab", &ScorerDims::vocab)
      .def_readwrite("dim", &ScorerDims::dim)
      .def_readwrite("window", &ScorerDims::window)
      .def_readwrite("hidden", &ScorerDims::hidden);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](double lr, std::size_t epochs, std::size_t batch, std::uint64_t seed,
                       double init_scale) {
        TrainConfig c{lr, epochs, batch, seed, init_scale};
        c.validate();
        return c;
      }), py::arg("lr") = 0.1, py::arg("epochs") = 1, py::arg("batch") = 16,
          py::arg("seed") = 0, py::arg("init_scale") = 0.05)
      .def_readwrite("lr", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<Scorer>(m, "Scorer")
      .def_property_readonly("vocab", &Scorer::vocab)
      .def("logits", [](const Scorer& f, const std::string& s) { return f.logits(text(s)); })
      .def("predict", [](const Scorer& f, const std::string& s) { return str(predict(f, text(s))); });

  py::class_<WindowScorer, Scorer>(m, "WindowScorer")
      .def_static("initialize", &WindowScorer::initialize, py::arg("vocab"),
                  py::arg("dims") = ScorerDims{}, py::arg("init_scale") = 0.05,
                  py::arg("seed") = 0)
      .def_static("load", [](const std::string& path) { return load_checkpoint(path); })
      .def("save", [](const WindowScorer& f, const std::string& path) { save_checkpoint(f, path); })
      .def("fit", [](WindowScorer& f, const std::vector<PyPair>& pairs, const TrainConfig& cfg) {
        const auto p = to_pairs(pairs);
        std::vector<double> losses;
        {
          py::gil_scoped_release release;
          f.fit(p, cfg, [&](std::size_t, double loss, const ScorerParams&) { losses.push_back(loss); });
        }
        return losses;
      }, py::arg("pairs"), py::arg("config"))
      .def("loss", [](const WindowScorer& f, const std::vector<PyPair>& pairs) {
        return f.loss(to_pairs(pairs));
      })
      .def("copy", [](const WindowScorer& f) { return WindowScorer(f); });

  // Python callables run under the GIL; worker threads take turns.
  py::class_<CallbackScorer, Scorer>(m, "CallbackScorer")
      .def(py::init([](const Vocab& vocab, py::function fn) {
        auto shared = std::make_shared<py::function>(std::move(fn));
        return CallbackScorer(vocab, [shared](std::u32string_view s) {
          py::gil_scoped_acquire gil;
          return (*shared)(str(s)).cast<LogitMatrix>();
        });
      }), py::arg("vocab"), py::arg("fn"));

  py::class_<Substitution>(m, "Substitution")
      .def_readonly("position", &Substitution::position)
      .def_property_readonly("original", [](const Substitution& s) { return encode_utf8(s.original); })
      .def_property_readonly("replacement", [](const Substitution& s) { return encode_utf8(s.replacement); })
      .def_readonly("score", &Substitution::score);

  py::class_<AttackOutcome>(m, "AttackOutcome")
      .def_property_readonly("adversarial", [](const AttackOutcome& o) { return str(o.adversarial); })
      .def_readonly("substitutions", &AttackOutcome::substitutions)
      .def_readonly("success", &AttackOutcome::success)
      .def_property_readonly("skipped", [](const AttackOutcome& o) {
        return std::string(skip_reason_name(o.skipped));
      });

  m.def("positional_scores", [](const LogitMatrix& logits, const std::vector<int>& target) {
    return positional_scores(logits, target);
  }, py::arg("logits"), py::arg("target"));

  m.def("max_substitutions", &max_substitutions, py::arg("lam"), py::arg("n"));

  m.def("attack", [](const std::string& x, const std::string& y, const Scorer& f,
                     const ConfusionSet& d, double lam, const std::string& attackable) {
    const AttackConfig cfg{lam, char_class(attackable)};
    const Sentence sx = text(x), sy = text(y);
    py::gil_scoped_release release;
    return attack(sx, sy, f, d, cfg);
  }, py::arg("x"), py::arg("y"), py::arg("scorer"), py::arg("confusion"),
     py::arg("lam") = 0.02, py::arg("attackable") = "cjk");

  m.def("attack_corpus", [](const std::vector<PyPair>& pairs, const Scorer& f,
                            const ConfusionSet& d, double lam, const std::string& attackable,
                            std::size_t workers) {
    const AttackConfig cfg{lam, char_class(attackable)};
    const auto p = to_pairs(pairs);
    py::gil_scoped_release release;
    return attack_corpus(p, f, d, cfg, workers);
  }, py::arg("pairs"), py::arg("scorer"), py::arg("confusion"), py::arg("lam") = 0.02,
     py::arg("attackable") = "cjk", py::arg("workers") = 1);

  m.def("judge_sentence", [](const std::string& pred, const std::string& source,
                             const std::string& target) {
    const Judgment j = judge_sentence(text(pred), {text(source), text(target)});
    return py::make_tuple(j.flagged, j.detection_hit, j.correction_hit);
  }, py::arg("pred"), py::arg("source"), py::arg("target"));

  m.def("compute_report", [](const std::vector<std::string>& preds,
                             const std::vector<PyPair>& pairs) {
    return json_to_py(to_json(compute_report(to_sentences(preds), to_pairs(pairs))));
  }, py::arg("preds"), py::arg("pairs"));

  m.def("evaluate", [](const Scorer& f, const std::vector<PyPair>& pairs,
                       const ConfusionSet* d, double lam, const std::string& attackable,
                       std::size_t workers) {
    const auto p = to_pairs(pairs);
    nlohmann::json j;
    {
      py::gil_scoped_release release;
      const EvalReport clean = evaluate_clean(f, p, workers);
      j["clean"] = to_json(clean);
      if (d != nullptr) {
        const EvalReport attacked =
            evaluate_under_attack(f, p, *d, {lam, char_class(attackable)}, workers);
        const RobustnessDrop drop = robustness_drop(clean, attacked);
        j["attack"] = to_json(attacked);
        j["drop"] = {{"detection", drop.detection}, {"correction", drop.correction}};
      }
    }
    return json_to_py(j);
  }, py::arg("scorer"), py::arg("pairs"), py::arg("confusion") = nullptr,
     py::arg("lam") = 0.02, py::arg("attackable") = "cjk", py::arg("workers") = 1);

  m.def("robustness_drop", [](double clean_det, double clean_cor, double att_det, double att_cor) {
    EvalReport clean, attacked;
    clean.detection.f1 = clean_det;
    clean.correction.f1 = clean_cor;
    attacked.detection.f1 = att_det;
    attacked.correction.f1 = att_cor;
    const RobustnessDrop d = robustness_drop(clean, attacked);
    return py::make_tuple(d.detection, d.correction);
  }, py::arg("clean_detection_f1"), py::arg("clean_correction_f1"),
     py::arg("attack_detection_f1"), py::arg("attack_correction_f1"));

  py::class_<AdvTrainPlan>(m, "AdvTrainPlan")
      .def(py::init([](std::size_t rounds, double lam, const std::string& ratio,
                       std::size_t epochs_per_round, const TrainConfig& train,
                       std::uint64_t seed, const std::string& attackable, bool accumulate,
                       std::size_t workers) {
        AdvTrainPlan p;
        p.rounds = rounds;
        p.lambda = lam;
        std::tie(p.ratio_clean, p.ratio_adv) = parse_ratio(ratio);
        p.epochs_per_round = epochs_per_round;
        p.train = train;
        p.seed = seed;
        p.attackable = char_class(attackable);
        p.accumulate = accumulate;
        p.workers = workers;
        p.validate();
        return p;
      }), py::arg("rounds") = 3, py::arg("lam") = 0.02, py::arg("ratio") = "2:1",
          py::arg("epochs_per_round") = 1, py::arg("train") = TrainConfig{},
          py::arg("seed") = 0, py::arg("attackable") = "cjk", py::arg("accumulate") = false,
          py::arg("workers") = 1)
      .def_readonly("rounds", &AdvTrainPlan::rounds)
      .def_readonly("lam", &AdvTrainPlan::lambda);

  m.def("generate_adversarial_set", [](const Scorer& f, const std::vector<PyPair>& pairs,
                                       const ConfusionSet& d, double lam,
                                       const std::string& attackable, std::size_t workers) {
    const auto p = to_pairs(pairs);
    std::vector<SentencePair> out;
    {
      py::gil_scoped_release release;
      out = generate_adversarial_set(f, p, d, {lam, char_class(attackable)}, workers);
    }
    return from_pairs(out);
  }, py::arg("scorer"), py::arg("pairs"), py::arg("confusion"), py::arg("lam") = 0.02,
     py::arg("attackable") = "cjk", py::arg("workers") = 1);

  m.def("adversarial_training", [](WindowScorer& f, const std::vector<PyPair>& clean,
                                   const ConfusionSet& d, const AdvTrainPlan& plan) {
    const auto p = to_pairs(clean);
    std::vector<RoundResult> rounds;
    {
      py::gil_scoped_release release;
      rounds = adversarial_training(f, p, d, plan);
    }
    py::list out;
    for (const auto& r : rounds) out.append(json_to_py(to_json(r)));
    return out;
  }, py::arg("scorer"), py::arg("clean"), py::arg("confusion"), py::arg("plan"));

  m.def("pipeline", [](const std::vector<std::string>& corpus, const std::vector<PyPair>& train,
                       const std::vector<PyPair>& test, const ConfusionSet& d,
                       const ScorerDims& dims, const CorruptionPolicy& policy,
                       const TrainConfig& pretrain, const TrainConfig& finetune,
                       std::optional<AdvTrainPlan> plan, double eval_lambda,
                       std::size_t workers) {
    PipelineOptions opt;
    opt.dims = dims;
    opt.policy = policy;
    opt.pretrain = pretrain;
    opt.finetune = finetune;
    opt.plan = plan;
    opt.eval_lambda = eval_lambda;
    opt.workers = workers;
    const auto c = to_sentences(corpus);
    const auto tr = to_pairs(train);
    const auto te = to_pairs(test);
    PipelineReport report;
    std::optional<WindowScorer> f;
    {
      py::gil_scoped_release release;
      f.emplace(pipeline(c, tr, te, d, opt, &report));
    }
    return py::make_tuple(std::move(*f), json_to_py(to_json(report)));
  }, py::arg("corpus"), py::arg("train"), py::arg("test"), py::arg("confusion"),
     py::arg("dims") = ScorerDims{}, py::arg("policy") = CorruptionPolicy{},
     py::arg("pretrain") = TrainConfig{}, py::arg("finetune") = TrainConfig{},
     py::arg("plan") = std::nullopt, py::arg("eval_lambda") = 0.02, py::arg("workers") = 1);
}
