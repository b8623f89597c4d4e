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

#ifndef ENTRANK_EXPERIMENT_H_
#define ENTRANK_EXPERIMENT_H_

#include <cstdint>
#include <string>

#include "entrank/alignment.h"
#include "entrank/embeddings.h"
#include "entrank/encoder.h"
#include "entrank/eval.h"
#include "entrank/pipeline.h"
#include "entrank/synthetic.h"

namespace entrank {

// End-to-end comparison of the entity-enabled and entity-free re-rankers on
// one synthetic world: embeddings, alignment, BM25, two-stage fine-tuning
// per mode from the same initial weights, fold-wise re-ranking, evaluation.
struct ExperimentConfig {
  EmbeddingConfig embeddings{.dim = 16, .window = 2, .negatives = 5, .epochs = 10};
  EncoderConfig encoder{.d_model = 32, .n_layers = 2, .n_heads = 2, .d_ff = 64,
                        .max_positions = 128};
  FinetuneOptions finetune{
      .stage1 = {.learning_rate = 0.05, .epochs = 3},
      .stage2 = {.learning_rate = 0.05, .epochs = 1},
      .batch_size = 8};
  InputLimits limits{.max_query = 32, .max_total = 128};
  int depth = 10;
  bool warm_start = true;  // see WarmStartTokenTable
  uint64_t seed = 1;  // overrides every component seed
};

struct ModeOutcome {
  Run run;
  EvalReport report;
  double split_ndcg10 = 0.0;  // mean NDCG@10 over split-mention queries
  FinetuneResult training;
};

struct ExperimentOutcome {
  Run first_stage;
  ModeOutcome mono;
  ModeOutcome entity;
  ClusterProbe probe;  // entity-mode final-layer entity vectors
};

ExperimentOutcome RunExperiment(const SyntheticWorld &world,
                                const ExperimentConfig &config);

}  // namespace entrank

#endif  // ENTRANK_EXPERIMENT_H_
