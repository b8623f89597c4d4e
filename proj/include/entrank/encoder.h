// Copyright 2026 The Entrank Authors.
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

#ifndef ENTRANK_ENCODER_H_
#define ENTRANK_ENCODER_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entrank/alignment.h"
#include "entrank/matrix.h"
#include "entrank/tokenizer.h"

namespace entrank {

struct EncoderConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 256;
  int max_positions = 512;
  int vocab_size = 0;  // rows of the token table (specials + word pieces)
  double dropout = 0.0;
  uint64_t seed = 1;

  // Throws ConfigError.
  void Validate() const;
  bool operator==(const EncoderConfig &) const = default;
};

struct TensorInfo {
  std::string name;
  size_t offset = 0;
  size_t rows = 0;
  size_t cols = 0;
  size_t size() const { return rows * cols; }
  bool operator==(const TensorInfo &) const = default;
};

// All parameters live in one flat buffer; tensors are named views into it.
// Entity tokens have no rows here: their input vectors come from an
// EntityVectors provider at lookup time.
class EncoderWeights {
 public:
  EncoderWeights() = default;
  // Seeded, deterministic initialization.
  static EncoderWeights Init(const EncoderConfig &config);

  const EncoderConfig &config() const { return config_; }
  const std::vector<TensorInfo> &tensors() const { return tensors_; }
  const TensorInfo &tensor(std::string_view name) const;
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> Tensor(std::string_view name);
  std::span<const double> Tensor(std::string_view name) const;

  // Copy of the native token table (vocab_size x d_model).
  Matrix TokenTable() const;

  std::string Serialize() const;
  static EncoderWeights Parse(const std::string &content,
                              const std::string &origin);
  static EncoderWeights Load(const std::string &path);

  bool operator==(const EncoderWeights &) const = default;

 private:
  EncoderConfig config_;
  std::vector<TensorInfo> tensors_;
  std::vector<double> params_;
};

struct ScoreOutput {
  double probability = 0.5;  // strictly inside (0, 1)
  double logit = 0.0;
  Matrix final_hidden;  // tokens x d_model
  // attentions[layer][head] is tokens x tokens, rows sum to 1.
  std::vector<std::vector<Matrix>> attentions;
};

// Full forward pass with introspection outputs. Throws MissingEmbedding when
// an entity token has no vector (or `entities` is null).
ScoreOutput Forward(const EncoderWeights &weights, const ModelInput &input,
                    const EntityVectors *entities);
// Probability only.
double Score(const EncoderWeights &weights, const ModelInput &input,
             const EntityVectors *entities);

// -log(s) for label 1, -log(1 - s) for label 0.
double PointwiseLoss(double probability, int label);

// Loss of one example computed from the logit; adds d loss / d params into
// `grad` (same layout as weights.params()). `dropout_rng` enables dropout
// when the config asks for it.
double LossAndGradient(const EncoderWeights &weights, const ModelInput &input,
                       int label, const EntityVectors *entities,
                       std::span<double> grad,
                       std::mt19937_64 *dropout_rng = nullptr);

struct TrainingBatch {
  std::vector<ModelInput> inputs;
  std::vector<int> labels;  // 1 relevant, 0 non-relevant
};

// Sum of per-example losses over the batch.
double BatchLoss(const EncoderWeights &weights, const TrainingBatch &batch,
                 const EntityVectors *entities);

struct TrainOptions {
  double learning_rate = 0.01;
  int epochs = 1;
  int warmup_steps = 0;  // linear warm-up of the learning rate
  uint64_t seed = 1;     // batch order and dropout
  bool shuffle = true;
};

struct TrainResult {
  std::vector<double> loss_trace;  // mean per-example loss of each epoch
  long long steps = 0;
};

// Plain SGD on the batch-mean gradient. Entity vectors stay constant.
// Throws NonFiniteLoss.
TrainResult TrainPointwise(EncoderWeights &weights,
                           std::span<const TrainingBatch> batches,
                           const TrainOptions &options,
                           const EntityVectors *entities);

enum class GradCheckScope { kAll, kClassifier };

struct GradCheckOptions {
  int samples = 200;
  double step = 1e-5;
  uint64_t seed = 7;
  GradCheckScope scope = GradCheckScope::kAll;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  int checked = 0;
  std::string worst_tensor;
};

// Compares analytic gradients with central differences on sampled
// parameters that the input can influence.
GradCheckResult GradCheck(const EncoderWeights &weights, const ModelInput &input,
                          int label, const EntityVectors *entities,
                          const GradCheckOptions &options = {});

// Replaces the token rows of word-initial pieces that are also words of the
// embedding table with a fixed random projection of their word vectors,
// rescaled to the norm of freshly initialized rows. Gives the from-scratch
// encoder a token space that the alignment can actually fit. Returns the
// number of rows replaced.
size_t WarmStartTokenTable(EncoderWeights &weights,
                           const JointEmbeddingTable &table,
                           const Vocabulary &vocab, uint64_t seed);

// Floor of the denominator in GradCheck's relative error.
inline constexpr double kGradCheckFloor = 1e-8;

}  // namespace entrank

#endif  // ENTRANK_ENCODER_H_
