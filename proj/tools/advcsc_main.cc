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

// Command-line front end: synth, train, attack, advtrain, eval, pipeline.
//
// All flags live on the top-level command and may follow the subcommand.
// `--config FILE` supplies defaults as `key = value` lines (keys are flag
// names without dashes); flags given on the command line win. Every run
// prints its effective configuration in that same format.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "advcsc/advtrain.h"
#include "advcsc/attack.h"
#include "advcsc/confusion.h"
#include "advcsc/corpus.h"
#include "advcsc/eval.h"
#include "advcsc/io.h"
#include "advcsc/rng.h"
#include "advcsc/scorer.h"

namespace advcsc {
namespace {

struct RunConfig {
  std::string command;
  std::string confusion;
  std::string corpus;
  std::string pairs;
  std::string test;
  std::string preds;
  std::string checkpoint;
  std::string out;
  std::string trace;
  std::string report;
  std::string judgments;
  std::uint64_t seed = 0;
  double select_rate = 0.25;
  double confusion_prob = 0.9;
  double lambda = 0.02;
  std::size_t rounds = 3;
  std::string ratio = "2:1";
  bool accumulate = false;
  bool no_adversarial = false;
  double lr = 0.1;
  std::size_t epochs = 5;
  std::size_t pretrain_epochs = 2;
  std::size_t batch = 16;
  double init_scale = 0.05;
  std::size_t min_count = 1;
  std::size_t dim = 32;
  std::size_t window = 2;
  std::size_t hidden = 64;
  std::size_t workers = 1;
  std::string attackable = "cjk";
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(std::string("missing required flag ") + flag);
  }
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void print_config(const RunConfig& c,
                  const std::vector<std::pair<std::string, std::string>>& derived) {
  std::cout << "# effective configuration (" << c.command << ")\n"
            << "confusion = \"" << c.confusion << "\"\n"
            << "corpus = \"" << c.corpus << "\"\n"
            << "pairs = \"" << c.pairs << "\"\n"
            << "test = \"" << c.test << "\"\n"
            << "preds = \"" << c.preds << "\"\n"
            << "checkpoint = \"" << c.checkpoint << "\"\n"
            << "out = \"" << c.out << "\"\n"
            << "trace = \"" << c.trace << "\"\n"
            << "report = \"" << c.report << "\"\n"
            << "judgments = \"" << c.judgments << "\"\n"
            << "seed = " << c.seed << "\n"
            << "select-rate = " << fmt_double(c.select_rate) << "\n"
            << "confusion-prob = " << fmt_double(c.confusion_prob) << "\n"
            << "lambda = " << fmt_double(c.lambda) << "\n"
            << "rounds = " << c.rounds << "\n"
            << "ratio = \"" << c.ratio << "\"\n"
            << "accumulate = " << (c.accumulate ? "true" : "false") << "\n"
            << "no-adversarial = " << (c.no_adversarial ? "true" : "false") << "\n"
            << "lr = " << fmt_double(c.lr) << "\n"
            << "epochs = " << c.epochs << "\n"
            << "pretrain-epochs = " << c.pretrain_epochs << "\n"
            << "batch = " << c.batch << "\n"
            << "init-scale = " << fmt_double(c.init_scale) << "\n"
            << "min-count = " << c.min_count << "\n"
            << "dim = " << c.dim << "\n"
            << "window = " << c.window << "\n"
            << "hidden = " << c.hidden << "\n"
            << "workers = " << c.workers << "\n"
            << "attackable = \"" << c.attackable << "\"\n";
  for (const auto& [k, v] : derived) std::cout << "# derived " << k << " = " << v << "\n";
  std::cout << std::flush;
}

ScorerDims dims_of(const RunConfig& c) {
  ScorerDims d;
  d.dim = c.dim;
  d.window = c.window;
  d.hidden = c.hidden;
  return d;
}

TrainConfig train_config_of(const RunConfig& c, std::uint64_t seed,
                            std::size_t epochs) {
  TrainConfig t;
  t.learning_rate = c.lr;
  t.epochs = epochs;
  t.batch_size = c.batch;
  t.seed = seed;
  t.init_scale = c.init_scale;
  t.validate();
  return t;
}

AdvTrainPlan plan_of(const RunConfig& c) {
  AdvTrainPlan plan;
  plan.rounds = c.rounds;
  plan.lambda = c.lambda;
  std::tie(plan.ratio_clean, plan.ratio_adv) = parse_ratio(c.ratio);
  plan.epochs_per_round = c.epochs;
  plan.train = train_config_of(c, derive_seed(c.seed, 4), c.epochs);
  plan.seed = derive_seed(c.seed, 3);
  plan.attackable = parse_char_class(c.attackable);
  plan.accumulate = c.accumulate;
  plan.workers = c.workers;
  plan.validate();
  return plan;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  AtomicOutput out(path);
  out.stream() << j.dump(2) << '\n';
  out.commit();
}

Vocab vocab_from(const std::vector<SentencePair>& pairs, const ConfusionSet* d,
                 std::size_t min_count) {
  std::vector<Sentence> text;
  text.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    text.push_back(p.source);
    text.push_back(p.target);
  }
  const auto forced = d != nullptr ? d->all_characters() : std::vector<Char>{};
  return build_vocab(text, min_count, forced);
}

// --- subcommands --------------------------------------------------------------

int cmd_synth(const RunConfig& c) {
  require(c.corpus, "--corpus");
  require(c.confusion, "--confusion");
  require(c.out, "--out");
  CorruptionPolicy policy;
  policy.select_rate = c.select_rate;
  policy.confusion_prob = c.confusion_prob;
  policy.seed = c.seed;
  policy.attackable = parse_char_class(c.attackable);
  policy.validate();
  print_config(c, {{"line-seed(i)", "derive_seed(seed, i)"}});

  const ConfusionSet d = load_confusion(c.confusion);
  const auto lines = load_sentences(c.corpus);
  if (lines.empty()) throw Error("corpus '" + c.corpus + "' has no sentences");
  const Vocab vocab = build_vocab(lines, c.min_count, d.all_characters());
  SynthesisStats stats;
  const auto pairs = synthesize_corpus(lines, policy, d, vocab, c.workers, &stats);

  AtomicOutput out(c.out);
  write_pairs(pairs, out.stream());
  out.commit();

  std::cout << "sentences = " << pairs.size() << "\n"
            << "attackable_characters = " << stats.attackable << "\n"
            << "selected = " << stats.selected << "\n"
            << "replaced = " << stats.replaced << "\n"
            << "replaced_fraction = " << fmt_double(stats.replaced_fraction()) << "\n"
            << "confusion_fraction = " << fmt_double(stats.confusion_fraction())
            << "\n"
            << "random_replaced = " << stats.random_replaced << "\n"
            << "confusion_self_loops_dropped = " << d.dropped_self_loops() << "\n";
  return 0;
}

int cmd_train(const RunConfig& c) {
  require(c.pairs, "--pairs");
  require(c.out, "--out");
  const TrainConfig cfg = train_config_of(c, c.seed, c.epochs);
  const std::uint64_t init_seed = derive_seed(c.seed, 0x1417);
  print_config(c, {{"init-seed", std::to_string(init_seed)}});

  const auto pairs = load_parallel(c.pairs);
  if (pairs.empty()) throw Error("'" + c.pairs + "' has no sentence pairs");
  std::optional<WindowScorer> f;
  if (!c.checkpoint.empty()) {
    f.emplace(load_checkpoint(c.checkpoint));
  } else {
    std::optional<ConfusionSet> d;
    if (!c.confusion.empty()) d = load_confusion(c.confusion);
    f.emplace(WindowScorer::initialize(vocab_from(pairs, d ? &*d : nullptr, c.min_count),
                                       dims_of(c), c.init_scale, init_seed));
  }
  f->fit(pairs, cfg, [](std::size_t epoch, double loss, const ScorerParams&) {
    std::cout << "epoch " << epoch + 1 << " loss = " << fmt_double(loss) << "\n";
  });
  save_checkpoint(*f, c.out);
  std::cout << "vocab_size = " << f->vocab().size() << "\n";
  return 0;
}

int cmd_attack(const RunConfig& c) {
  require(c.checkpoint, "--checkpoint");
  require(c.pairs, "--pairs");
  require(c.confusion, "--confusion");
  require(c.out, "--out");
  const AttackConfig attack_cfg{c.lambda, parse_char_class(c.attackable)};
  attack_cfg.validate();
  print_config(c, {});

  const WindowScorer f = load_checkpoint(c.checkpoint);
  const ConfusionSet d = load_confusion(c.confusion);
  const auto pairs = load_parallel(c.pairs);
  const auto outcomes = attack_corpus(pairs, f, d, attack_cfg, c.workers);

  AtomicOutput out(c.out);
  write_outcomes_tsv(pairs, outcomes, out.stream());
  std::optional<AtomicOutput> trace;
  if (!c.trace.empty()) {
    trace.emplace(c.trace);
    trace->stream() << outcomes_to_json(pairs, outcomes).dump(2) << '\n';
    trace->commit();
  }
  out.commit();

  const AttackSummary s = summarize(outcomes);
  std::cout << "sentences = " << s.total << "\n"
            << "already_wrong = " << s.already_wrong << "\n"
            << "succeeded = " << s.succeeded << "\n"
            << "success_rate = " << fmt_double(s.success_rate()) << "\n"
            << "no_eligible_position = " << s.no_eligible_position << "\n"
            << "budget_exhausted = " << s.budget_exhausted << "\n"
            << "substitutions = " << s.substitutions << "\n";
  return 0;
}

int cmd_advtrain(const RunConfig& c) {
  require(c.checkpoint, "--checkpoint");
  require(c.pairs, "--pairs");
  require(c.confusion, "--confusion");
  require(c.out, "--out");
  const AdvTrainPlan plan = plan_of(c);
  print_config(c, {{"plan-seed", std::to_string(plan.seed)},
                   {"train-seed", std::to_string(plan.train.seed)}});

  WindowScorer f = load_checkpoint(c.checkpoint);
  const ConfusionSet d = load_confusion(c.confusion);
  const auto pairs = load_parallel(c.pairs);
  if (pairs.empty()) throw Error("'" + c.pairs + "' has no sentence pairs");
  std::vector<SentencePair> test;
  if (!c.test.empty()) test = load_parallel(c.test);

  nlohmann::json rounds = nlohmann::json::array();
  std::vector<SentencePair> pool;
  for (std::size_t r = 0; r < plan.rounds; ++r) {
    const RoundResult rr = adversarial_training_round(f, pairs, d, plan, r, &pool);
    nlohmann::json j = to_json(rr);
    if (!test.empty()) {
      j["clean"] = to_json(evaluate_clean(f, test, c.workers));
      j["attack"] = to_json(
          evaluate_under_attack(f, test, d, plan.attack_config(), c.workers));
    }
    std::cout << "round " << r + 1 << ": sources = " << rr.sources
              << ", adversarial = " << rr.adversarial
              << ", attack_success_rate = " << fmt_double(rr.attack.success_rate())
              << "\n";
    rounds.push_back(std::move(j));
  }
  std::optional<AtomicOutput> report;
  if (!c.report.empty()) {
    report.emplace(c.report);
    report->stream() << nlohmann::json{{"rounds", rounds}}.dump(2) << '\n';
  }
  save_checkpoint(f, c.out);
  if (report) report->commit();
  return 0;
}

int cmd_eval(const RunConfig& c) {
  require(c.pairs, "--pairs");
  require(c.out, "--out");
  if (c.preds.empty() == c.checkpoint.empty()) {
    throw Error("eval needs exactly one of --preds or --checkpoint");
  }
  print_config(c, {});
  const auto pairs = load_parallel(c.pairs);

  nlohmann::json j;
  std::vector<Sentence> preds;
  if (!c.preds.empty()) {
    preds = load_sentences(c.preds);
    if (preds.size() != pairs.size()) {
      throw Error("'" + c.preds + "' has " + std::to_string(preds.size()) +
                  " predictions for " + std::to_string(pairs.size()) + " pairs");
    }
    j["clean"] = to_json(compute_report(preds, pairs));
  } else {
    const WindowScorer f = load_checkpoint(c.checkpoint);
    const EvalReport clean = evaluate_clean(f, pairs, c.workers, &preds);
    j["clean"] = to_json(clean);
    if (!c.confusion.empty()) {
      const ConfusionSet d = load_confusion(c.confusion);
      const AttackConfig attack_cfg{c.lambda, parse_char_class(c.attackable)};
      const EvalReport attacked =
          evaluate_under_attack(f, pairs, d, attack_cfg, c.workers);
      const RobustnessDrop drop = robustness_drop(clean, attacked);
      j["attack"] = to_json(attacked);
      j["drop"] = {{"detection", drop.detection}, {"correction", drop.correction}};
    }
  }
  std::optional<AtomicOutput> judgments;
  if (!c.judgments.empty()) {
    judgments.emplace(c.judgments);
    write_judgments_tsv(preds, pairs, judgments->stream());
  }
  write_json(j, c.out);
  if (judgments) judgments->commit();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_pipeline(const RunConfig& c) {
  require(c.corpus, "--corpus");
  require(c.pairs, "--pairs");
  require(c.test, "--test");
  require(c.confusion, "--confusion");
  require(c.out, "--out");
  PipelineOptions opt;
  opt.dims = dims_of(c);
  opt.policy.select_rate = c.select_rate;
  opt.policy.confusion_prob = c.confusion_prob;
  opt.policy.seed = c.seed;
  opt.policy.attackable = parse_char_class(c.attackable);
  opt.pretrain = train_config_of(c, derive_seed(c.seed, 1), c.pretrain_epochs);
  opt.finetune = train_config_of(c, derive_seed(c.seed, 2), c.epochs);
  if (c.rounds == 0) {
    throw Error("--rounds must be at least 1 (use --no-adversarial to skip the stage)");
  }
  if (!c.no_adversarial) opt.plan = plan_of(c);
  opt.eval_lambda = c.lambda;
  opt.workers = c.workers;
  std::vector<std::pair<std::string, std::string>> derived = {
      {"pretrain-seed", std::to_string(opt.pretrain.seed)},
      {"finetune-seed", std::to_string(opt.finetune.seed)}};
  if (opt.plan) {
    derived.emplace_back("plan-seed", std::to_string(opt.plan->seed));
    derived.emplace_back("round-train-seed", std::to_string(opt.plan->train.seed));
  }
  print_config(c, derived);

  const ConfusionSet d = load_confusion(c.confusion);
  const auto corpus = load_sentences(c.corpus);
  const auto train = load_parallel(c.pairs);
  const auto test = load_parallel(c.test);
  PipelineReport report;
  const WindowScorer f = pipeline(corpus, train, test, d, opt, &report);

  const nlohmann::json j = to_json(report);
  std::optional<AtomicOutput> report_out;
  if (!c.report.empty()) {
    report_out.emplace(c.report);
    report_out->stream() << j.dump(2) << '\n';
  }
  save_checkpoint(f, c.out);
  if (report_out) report_out->commit();
  for (const auto& s : report.stages) {
    std::cout << s.stage << ": clean COR F1 = " << fmt_double(s.clean.correction.f1)
              << ", attack COR F1 = " << fmt_double(s.attacked.correction.f1)
              << ", attack success rate = "
              << fmt_double(s.attacked.attack->success_rate()) << "\n";
  }
  return 0;
}

}  // namespace
}  // namespace advcsc

int main(int argc, char** argv) {
  using advcsc::RunConfig;
  RunConfig c;
  CLI::App app{"Confusion-set corruption, greedy adversarial attacks and "
               "adversarial training for character-level spelling correction"};
  app.set_config("--config", "", "key = value file supplying flag defaults");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--confusion", c.confusion, "Confusion set file (<key>\\t<candidates>)");
  app.add_option("--corpus", c.corpus, "Clean corpus, one sentence per line");
  app.add_option("--pairs", c.pairs, "Parallel pairs (<source>\\t<target>)");
  app.add_option("--test", c.test, "Test pairs for evaluation");
  app.add_option("--preds", c.preds, "Predictions, one sentence per line (eval)");
  app.add_option("--checkpoint", c.checkpoint, "Model checkpoint to load");
  app.add_option("--out", c.out, "Primary output path");
  app.add_option("--trace", c.trace, "JSON substitution trace (attack)");
  app.add_option("--report", c.report, "JSON report (advtrain, pipeline)");
  app.add_option("--judgments", c.judgments, "Per-sentence judgment TSV (eval)");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--select-rate", c.select_rate, "Corruption selection rate")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--confusion-prob", c.confusion_prob,
                 "Probability of a confusion-set replacement")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--lambda", c.lambda, "Attack budget fraction in (0, 1]");
  app.add_option("--rounds", c.rounds, "Adversarial training rounds");
  app.add_option("--ratio", c.ratio, "Clean to adversarial-source ratio, e.g. 2:1");
  app.add_flag("--accumulate", c.accumulate,
               "Keep adversarial pairs from earlier rounds");
  app.add_flag("--no-adversarial", c.no_adversarial,
               "Skip the adversarial stage of the pipeline");
  app.add_option("--lr", c.lr, "SGD learning rate");
  app.add_option("--epochs", c.epochs, "Training epochs (per round for advtrain)");
  app.add_option("--pretrain-epochs", c.pretrain_epochs, "Pre-training epochs (pipeline)");
  app.add_option("--batch", c.batch, "Mini-batch size");
  app.add_option("--init-scale", c.init_scale, "Uniform init half-width");
  app.add_option("--min-count", c.min_count, "Minimum character count for the vocabulary");
  app.add_option("--dim", c.dim, "Embedding size");
  app.add_option("--window", c.window, "Context radius");
  app.add_option("--hidden", c.hidden, "Hidden layer size");
  app.add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--attackable", c.attackable, "Attackable characters")
      ->check(CLI::IsMember({"cjk", "letters", "all"}));

  auto* synth = app.add_subcommand("synth", "Synthesize corrupted pre-training pairs");
  auto* train = app.add_subcommand("train", "Train the reference scorer");
  auto* attack = app.add_subcommand("attack", "Generate adversarial examples");
  auto* advtrain = app.add_subcommand("advtrain", "Run adversarial training rounds");
  auto* eval = app.add_subcommand("eval", "Sentence-level detection/correction metrics");
  auto* pipe = app.add_subcommand("pipeline", "Pre-train, fine-tune, adversarially train");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      c.command = "synth";
      return advcsc::cmd_synth(c);
    }
    if (train->parsed()) {
      c.command = "train";
      return advcsc::cmd_train(c);
    }
    if (attack->parsed()) {
      c.command = "attack";
      return advcsc::cmd_attack(c);
    }
    if (advtrain->parsed()) {
      c.command = "advtrain";
      return advcsc::cmd_advtrain(c);
    }
    if (eval->parsed()) {
      c.command = "eval";
      return advcsc::cmd_eval(c);
    }
    if (pipe->parsed()) {
      c.command = "pipeline";
      return advcsc::cmd_pipeline(c);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
