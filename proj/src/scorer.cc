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

#include "advcsc/scorer.h"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "advcsc/io.h"
#include "advcsc/rng.h"

namespace advcsc {

int argmax(std::span<const double> row) {
  int best = 0;
  for (std::size_t r = 1; r < row.size(); ++r) {
    if (row[r] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(r);
  }
  return best;
}

Sentence predict_from_logits(const LogitMatrix& logits, const Vocab& vocab) {
  Sentence out(static_cast<std::size_t>(logits.rows()), kUnkChar);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double* row = logits.data() + i * logits.cols();
    out[static_cast<std::size_t>(i)] = vocab.character(
        argmax({row, static_cast<std::size_t>(logits.cols())}));
  }
  return out;
}

Sentence predict(const Scorer& f, std::u32string_view sentence) {
  return predict_from_logits(f.logits(sentence), f.vocab());
}

// --- parameters -------------------------------------------------------------

ScorerParams ScorerParams::zeros(const ScorerDims& dims) {
  const auto v = static_cast<Eigen::Index>(dims.vocab);
  const auto d = static_cast<Eigen::Index>(dims.dim);
  const auto c = static_cast<Eigen::Index>(dims.context());
  const auto h = static_cast<Eigen::Index>(dims.hidden);
  ScorerParams p;
  p.dims = dims;
  p.embedding = Matrix::Zero(v, d);
  p.hidden_weight = Matrix::Zero(c, h);
  p.hidden_bias = Vector::Zero(h);
  p.output_weight = Matrix::Zero(h, v);
  p.output_bias = Vector::Zero(v);
  return p;
}

ScorerParams ScorerParams::random(const ScorerDims& dims, double scale,
                                  std::uint64_t seed) {
  ScorerParams p = zeros(dims);
  Rng rng(seed);
  for (auto block : p.blocks()) {
    for (double& x : block) x = rng.uniform(-scale, scale);
  }
  return p;
}

namespace {

template <typename M>
std::span<double> span_of(M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename M>
std::span<const double> span_of(const M& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

std::vector<std::span<double>> ScorerParams::blocks() {
  return {span_of(embedding), span_of(hidden_weight), span_of(hidden_bias),
          span_of(output_weight), span_of(output_bias)};
}

std::vector<std::span<const double>> ScorerParams::blocks() const {
  return {span_of(embedding), span_of(hidden_weight), span_of(hidden_bias),
          span_of(output_weight), span_of(output_bias)};
}

std::size_t ScorerParams::size() const {
  std::size_t n = 0;
  for (auto b : blocks()) n += b.size();
  return n;
}

void ScorerParams::axpy(double a, const ScorerParams& other) {
  embedding += a * other.embedding;
  hidden_weight += a * other.hidden_weight;
  hidden_bias += a * other.hidden_bias;
  output_weight += a * other.output_weight;
  output_bias += a * other.output_bias;
}

bool ScorerParams::all_finite() const {
  return embedding.allFinite() && hidden_weight.allFinite() &&
         hidden_bias.allFinite() && output_weight.allFinite() &&
         output_bias.allFinite();
}

bool operator==(const ScorerParams& a, const ScorerParams& b) {
  return a.dims == b.dims && a.embedding == b.embedding &&
         a.hidden_weight == b.hidden_weight && a.hidden_bias == b.hidden_bias &&
         a.output_weight == b.output_weight && a.output_bias == b.output_bias;
}

// --- forward / backward -----------------------------------------------------

namespace {

Matrix context_matrix(const ScorerParams& p, std::span<const int> ids) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(p.dims.dim);
  const auto w = static_cast<Eigen::Index>(p.dims.window);
  Matrix x = Matrix::Zero(n, static_cast<Eigen::Index>(p.dims.context()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k <= 2 * w; ++k) {
      const Eigen::Index j = i + k - w;
      if (j < 0 || j >= n) continue;
      const int id = ids[static_cast<std::size_t>(j)];
      if (id < 0 || static_cast<std::size_t>(id) >= p.dims.vocab) {
        throw Error("token id " + std::to_string(id) + " outside vocabulary");
      }
      x.block(i, k * d, 1, d) = p.embedding.row(id);
    }
  }
  return x;
}

}  // namespace

LogitMatrix forward(const ScorerParams& params, std::span<const int> ids) {
  const Matrix x = context_matrix(params, ids);
  Matrix z = x * params.hidden_weight;
  z.rowwise() += params.hidden_bias.transpose();
  const Matrix h = z.cwiseMax(0.0);
  LogitMatrix o = h * params.output_weight;
  o.rowwise() += params.output_bias.transpose();
  return o;
}

double accumulate_loss_and_grad(const ScorerParams& params,
                                std::span<const int> source,
                                std::span<const int> target,
                                ScorerParams& grad, double weight) {
  if (source.size() != target.size()) {
    throw Error("source and target lengths differ");
  }
  const auto n = static_cast<Eigen::Index>(source.size());
  if (n == 0) return 0.0;
  const auto d = static_cast<Eigen::Index>(params.dims.dim);
  const auto w = static_cast<Eigen::Index>(params.dims.window);

  const Matrix x = context_matrix(params, source);
  Matrix z = x * params.hidden_weight;
  z.rowwise() += params.hidden_bias.transpose();
  const Matrix h = z.cwiseMax(0.0);
  Matrix o = h * params.output_weight;
  o.rowwise() += params.output_bias.transpose();

  // o becomes d(loss)/d(o): softmax minus one-hot, over n.
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = o.row(i);
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    const int y = target[static_cast<std::size_t>(i)];
    loss += lse - row(y);
    row = (row.array() - lse).exp();
    row(y) -= 1.0;
  }
  loss /= static_cast<double>(n);
  o *= weight / static_cast<double>(n);

  grad.output_bias += o.colwise().sum().transpose();
  grad.output_weight.noalias() += h.transpose() * o;
  Matrix dz = o * params.output_weight.transpose();
  dz.array() *= (z.array() > 0.0).cast<double>();
  grad.hidden_bias += dz.colwise().sum().transpose();
  grad.hidden_weight.noalias() += x.transpose() * dz;
  const Matrix dx = dz * params.hidden_weight.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k <= 2 * w; ++k) {
      const Eigen::Index j = i + k - w;
      if (j < 0 || j >= n) continue;
      grad.embedding.row(source[static_cast<std::size_t>(j)]) +=
          dx.block(i, k * d, 1, d);
    }
  }
  return loss;
}

LossAndGrad loss_and_grad(const ScorerParams& params,
                          std::span<const int> source,
                          std::span<const int> target) {
  LossAndGrad out{0.0, ScorerParams::zeros(params.dims)};
  out.loss = accumulate_loss_and_grad(params, source, target, out.grad, 1.0);
  return out;
}

// --- training ---------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (epochs < 1) throw Error("epochs must be at least 1");
  if (batch_size < 1) throw Error("batch size must be at least 1");
}

TrainingDiverged::TrainingDiverged(std::size_t step)
    : Error("training diverged at step " + std::to_string(step) +
            " (non-finite loss or parameters); lower the learning rate"),
      step_(step) {}

std::vector<EncodedPair> encode_pairs(std::span<const SentencePair> pairs,
                                      const Vocab& vocab) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({vocab.encode(p.source), vocab.encode(p.target)});
  }
  return out;
}

ScorerParams train(ScorerParams params, std::span<const EncodedPair> pairs,
                   const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (pairs.empty()) return params;
  std::vector<std::size_t> order(pairs.size());
  ScorerParams grad = ScorerParams::zeros(params.dims);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, epoch));
    shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      for (auto b : grad.blocks()) std::fill(b.begin(), b.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const EncodedPair& p = pairs[order[k]];
        batch_loss +=
            accumulate_loss_and_grad(params, p.source, p.target, grad, weight);
      }
      if (!std::isfinite(batch_loss)) throw TrainingDiverged(step);
      params.axpy(-config.learning_rate, grad);
      if (!params.all_finite()) throw TrainingDiverged(step);
      epoch_loss += batch_loss;
      ++step;
    }
    if (on_epoch) {
      on_epoch(epoch, epoch_loss / static_cast<double>(pairs.size()), params);
    }
  }
  return params;
}

// --- WindowScorer -----------------------------------------------------------

WindowScorer::WindowScorer(Vocab vocab, ScorerParams params)
    : vocab_(std::move(vocab)), params_(std::move(params)) {
  if (params_.dims.vocab != vocab_.size()) {
    throw Error("parameters sized for " + std::to_string(params_.dims.vocab) +
                " ids but vocabulary has " + std::to_string(vocab_.size()));
  }
}

WindowScorer WindowScorer::initialize(Vocab vocab, ScorerDims dims,
                                      double init_scale, std::uint64_t seed) {
  dims.vocab = vocab.size();
  ScorerParams p = ScorerParams::random(dims, init_scale, seed);
  return WindowScorer(std::move(vocab), std::move(p));
}

LogitMatrix WindowScorer::logits(std::u32string_view sentence) const {
  return forward(params_, vocab_.encode(sentence));
}

void WindowScorer::fit(std::span<const SentencePair> pairs,
                       const TrainConfig& config,
                       const EpochCallback& on_epoch) {
  const auto encoded = encode_pairs(pairs, vocab_);
  params_ = train(std::move(params_), encoded, config, on_epoch);
}

double WindowScorer::loss(std::span<const SentencePair> pairs) const {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : pairs) {
    const auto src = vocab_.encode(p.source);
    const auto tgt = vocab_.encode(p.target);
    const LogitMatrix o = forward(params_, src);
    double l = 0.0;
    for (Eigen::Index i = 0; i < o.rows(); ++i) {
      const auto row = o.row(i);
      const double m = row.maxCoeff();
      l += m + std::log((row.array() - m).exp().sum()) -
           row(tgt[static_cast<std::size_t>(i)]);
    }
    total += l / static_cast<double>(o.rows());
  }
  return total / static_cast<double>(pairs.size());
}

// --- checkpoints ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'A', 'D', 'V', 'C', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put_le(std::string& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (data_.size() - pos_ < sizeof(U)) {
      throw CheckpointError("checkpoint is truncated");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i]))
              << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
            static_cast<uInt>(bytes.size())));
}

}  // namespace

void save_checkpoint(const WindowScorer& scorer, std::ostream& out) {
  const ScorerParams& p = scorer.params();
  std::string buf(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(buf, kCheckpointVersion);
  put_le<std::uint64_t>(buf, p.dims.vocab);
  put_le<std::uint64_t>(buf, p.dims.dim);
  put_le<std::uint64_t>(buf, p.dims.window);
  put_le<std::uint64_t>(buf, p.dims.hidden);
  for (Char c : scorer.vocab().characters()) {
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(c));
  }
  for (auto block : p.blocks()) {
    for (double x : block) put_le<double>(buf, x);
  }
  put_le<std::uint32_t>(buf, crc_of(buf));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void save_checkpoint(const WindowScorer& scorer, const std::string& path) {
  AtomicOutput out(path, /*binary=*/true);
  save_checkpoint(scorer, out.stream());
  out.commit();
}

WindowScorer load_checkpoint(std::istream& in, const Vocab* expected) {
  const std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (data.size() < sizeof(kMagic) + 4 ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const std::string_view body(data.data(), data.size() - 4);
  Reader tail(std::string_view(data).substr(data.size() - 4));
  Reader r(body.substr(sizeof(kMagic)));
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  ScorerDims dims;
  dims.vocab = r.get<std::uint64_t>();
  dims.dim = r.get<std::uint64_t>();
  dims.window = r.get<std::uint64_t>();
  dims.hidden = r.get<std::uint64_t>();
  if (dims.vocab < 1 || dims.vocab > (1u << 24) || dims.dim > (1u << 16) ||
      dims.window > (1u << 10) || dims.hidden > (1u << 16)) {
    throw CheckpointError("implausible checkpoint dimensions");
  }
  ScorerParams p = ScorerParams::zeros(dims);
  const std::size_t need = 4 * (dims.vocab - 1) + 8 * p.size();
  if (r.remaining() != need) {
    throw CheckpointError("checkpoint size does not match its header (" +
                          std::to_string(r.remaining()) + " bytes, expected " +
                          std::to_string(need) + ")");
  }
  if (tail.get<std::uint32_t>() != crc_of(body)) {
    throw CheckpointError("checkpoint checksum mismatch");
  }
  std::vector<Char> chars(dims.vocab - 1);
  for (Char& c : chars) c = static_cast<Char>(r.get<std::uint32_t>());
  for (auto block : p.blocks()) {
    for (double& x : block) x = r.get<double>();
  }
  Vocab vocab(chars);
  if (expected != nullptr && !(vocab == *expected)) {
    throw CheckpointError(
        "checkpoint vocabulary (" + std::to_string(vocab.size()) +
        " ids) does not match the expected vocabulary (" +
        std::to_string(expected->size()) + " ids)");
  }
  return WindowScorer(std::move(vocab), std::move(p));
}

WindowScorer load_checkpoint(const std::string& path, const Vocab* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in, expected);
}

// --- external scorers -------------------------------------------------------

LogitMatrix CallbackScorer::logits(std::u32string_view sentence) const {
  LogitMatrix m = fn_(sentence);
  if (m.rows() != static_cast<Eigen::Index>(sentence.size()) ||
      m.cols() != static_cast<Eigen::Index>(vocab_.size())) {
    throw Error("external scorer returned a " + std::to_string(m.rows()) +
                "x" + std::to_string(m.cols()) + " matrix for a sentence of " +
                std::to_string(sentence.size()) + " characters over " +
                std::to_string(vocab_.size()) + " ids");
  }
  return m;
}

void write_logit_matrix(const LogitMatrix& m, std::ostream& out) {
  out << m.rows() << ' ' << m.cols() << '\n';
  std::string buf;
  buf.reserve(static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index i = 0; i < m.size(); ++i) put_le<double>(buf, m.data()[i]);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

LogitMatrix read_logit_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error("missing logit matrix header");
  std::istringstream hs(header);
  long long rows = -1, cols = -1;
  if (!(hs >> rows >> cols) || rows < 0 || cols < 1) {
    throw Error("bad logit matrix header '" + header + "'");
  }
  std::string buf(static_cast<std::size_t>(rows * cols) * 8, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw Error("logit matrix is truncated");
  }
  LogitMatrix m(rows, cols);
  Reader r(buf);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.get<double>();
  return m;
}

TableScorer::TableScorer(Vocab vocab, std::map<Sentence, LogitMatrix> table)
    : vocab_(std::move(vocab)), table_(table.begin(), table.end()) {
  for (const auto& [s, m] : table_) {
    if (m.rows() != static_cast<Eigen::Index>(s.size()) ||
        m.cols() != static_cast<Eigen::Index>(vocab_.size())) {
      throw Error("logit matrix shape does not match sentence '" +
                  encode_utf8(s) + "'");
    }
  }
}

TableScorer TableScorer::load(Vocab vocab, const std::string& sentences_path,
                              const std::string& logits_path) {
  const auto sentences = load_sentences(sentences_path);
  std::ifstream in(logits_path, std::ios::binary);
  if (!in) throw Error("cannot open '" + logits_path + "'");
  std::map<Sentence, LogitMatrix> table;
  for (const auto& s : sentences) table[s] = read_logit_matrix(in);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error("'" + logits_path + "' holds more matrices than '" +
                sentences_path + "' has sentences");
  }
  return TableScorer(std::move(vocab), std::move(table));
}

LogitMatrix TableScorer::logits(std::u32string_view sentence) const {
  auto it = table_.find(sentence);
  if (it == table_.end()) {
    throw Error("no precomputed logits for '" + encode_utf8(sentence) + "'");
  }
  return it->second;
}

}  // namespace advcsc
