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

#ifndef ADVCSC_SCORER_H_
#define ADVCSC_SCORER_H_

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "advcsc/corpus.h"
#include "advcsc/text.h"

namespace advcsc {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Row i holds the logit of every vocabulary id at position i.
using LogitMatrix = Matrix;

// Anything that maps a sentence to per-position logits over a vocabulary.
// Implementations must be safe to call concurrently.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual const Vocab& vocab() const = 0;
  virtual LogitMatrix logits(std::u32string_view sentence) const = 0;
};

// Index of the largest entry; ties go to the lowest index.
int argmax(std::span<const double> row);

// Per-position argmax rendered through the vocabulary (UNK -> kUnkChar).
Sentence predict_from_logits(const LogitMatrix& logits, const Vocab& vocab);
Sentence predict(const Scorer& f, std::u32string_view sentence);

// ---------------------------------------------------------------------------
// Reference scorer: a windowed feed-forward classifier. Position i sees the
// embeddings of sentence[i-w .. i+w] (zero vectors past either end), which
// go through one ReLU layer and an affine output layer.

struct ScorerDims {
  std::size_t vocab = 0;
  std::size_t dim = 32;
  std::size_t window = 2;
  std::size_t hidden = 64;

  std::size_t context() const { return (2 * window + 1) * dim; }
  friend bool operator==(const ScorerDims&, const ScorerDims&) = default;
};

struct ScorerParams {
  ScorerDims dims;
  Matrix embedding;      // vocab x dim
  Matrix hidden_weight;  // context x hidden
  Vector hidden_bias;    // hidden
  Matrix output_weight;  // hidden x vocab
  Vector output_bias;    // vocab

  static ScorerParams zeros(const ScorerDims& dims);
  // Entries uniform in [-scale, scale].
  static ScorerParams random(const ScorerDims& dims, double scale,
                             std::uint64_t seed);

  // Parameter blocks in checkpoint order.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  std::size_t size() const;

  // this += a * other
  void axpy(double a, const ScorerParams& other);
  bool all_finite() const;

  friend bool operator==(const ScorerParams& a, const ScorerParams& b);
};

LogitMatrix forward(const ScorerParams& params, std::span<const int> ids);

struct LossAndGrad {
  double loss = 0.0;
  ScorerParams grad;
};

// Mean per-position cross entropy of softmax(logits) against target ids,
// with its exact gradient.
LossAndGrad loss_and_grad(const ScorerParams& params,
                          std::span<const int> source,
                          std::span<const int> target);

// Adds weight * d(loss)/d(params) into `grad` and returns the loss.
double accumulate_loss_and_grad(const ScorerParams& params,
                                std::span<const int> source,
                                std::span<const int> target,
                                ScorerParams& grad, double weight);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  double init_scale = 0.05;

  void validate() const;
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::size_t step);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct EncodedPair {
  std::vector<int> source;
  std::vector<int> target;
};
std::vector<EncodedPair> encode_pairs(std::span<const SentencePair> pairs,
                                      const Vocab& vocab);

// Called after every epoch with the running mean loss of that epoch and the
// parameters at its end.
using EpochCallback = std::function<void(std::size_t epoch, double loss,
                                         const ScorerParams& params)>;

// Mini-batch SGD. Each epoch visits the pairs in an order drawn from
// derive_seed(config.seed, epoch); each step moves against the mean gradient
// of its batch. Throws TrainingDiverged on a non-finite loss or parameter.
ScorerParams train(ScorerParams params, std::span<const EncodedPair> pairs,
                   const TrainConfig& config,
                   const EpochCallback& on_epoch = nullptr);

// Reference scorer bundled with its vocabulary.
class WindowScorer : public Scorer {
 public:
  WindowScorer(Vocab vocab, ScorerParams params);

  // Fresh scorer with random parameters sized for `vocab`.
  static WindowScorer initialize(Vocab vocab, ScorerDims dims,
                                 double init_scale, std::uint64_t seed);

  const Vocab& vocab() const override { return vocab_; }
  LogitMatrix logits(std::u32string_view sentence) const override;

  const ScorerParams& params() const { return params_; }
  ScorerParams& mutable_params() { return params_; }

  // Trains in place on `pairs`.
  void fit(std::span<const SentencePair> pairs, const TrainConfig& config,
           const EpochCallback& on_epoch = nullptr);

  // Mean loss over `pairs`.
  double loss(std::span<const SentencePair> pairs) const;

 private:
  Vocab vocab_;
  ScorerParams params_;
};

// Binary checkpoint: magic, version, dims, vocabulary code points, the
// parameter blocks as little-endian float64, then a CRC-32 of everything
// before it.
void save_checkpoint(const WindowScorer& scorer, std::ostream& out);
void save_checkpoint(const WindowScorer& scorer, const std::string& path);

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Throws CheckpointError on a bad magic/version, truncation, checksum
// mismatch, or (when `expected` is given) a vocabulary that differs from it.
WindowScorer load_checkpoint(std::istream& in, const Vocab* expected = nullptr);
WindowScorer load_checkpoint(const std::string& path,
                             const Vocab* expected = nullptr);

// ---------------------------------------------------------------------------
// External models.

// In-process adapter around any callable.
class CallbackScorer : public Scorer {
 public:
  using Fn = std::function<LogitMatrix(std::u32string_view)>;
  CallbackScorer(Vocab vocab, Fn fn) : vocab_(std::move(vocab)), fn_(std::move(fn)) {}

  const Vocab& vocab() const override { return vocab_; }
  LogitMatrix logits(std::u32string_view sentence) const override;

 private:
  Vocab vocab_;
  Fn fn_;
};

// Logit matrix file: text header line "n |V|", then n*|V| row-major
// little-endian float64 values.
void write_logit_matrix(const LogitMatrix& m, std::ostream& out);
LogitMatrix read_logit_matrix(std::istream& in);

// Batch adapter for out-of-process models: sentence i of the sentence file is
// answered by the i-th matrix in the logits file. Queries for any other
// sentence throw, so attacks against it only work when every perturbed
// sentence was precomputed.
class TableScorer : public Scorer {
 public:
  TableScorer(Vocab vocab, std::map<Sentence, LogitMatrix> table);
  static TableScorer load(Vocab vocab, const std::string& sentences_path,
                          const std::string& logits_path);

  const Vocab& vocab() const override { return vocab_; }
  LogitMatrix logits(std::u32string_view sentence) const override;

 private:
  Vocab vocab_;
  std::map<Sentence, LogitMatrix, std::less<>> table_;
};

}  // namespace advcsc

#endif  // ADVCSC_SCORER_H_
