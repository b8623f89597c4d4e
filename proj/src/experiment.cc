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

#include "entrank/experiment.h"

#include "entrank/retrieval.h"

namespace entrank {

namespace {

double MeanOver(const EvalReport &report, const std::set<std::string> &ids) {
  double sum = 0.0;
  int count = 0;
  for (const std::string &qid : ids) {
    auto it = report.per_query.find(qid);
    sum += it == report.per_query.end() ? 0.0 : it->second[0];
    ++count;
  }
  return count ? sum / count : 0.0;
}

}  // namespace

ExperimentOutcome RunExperiment(const SyntheticWorld &world,
                                const ExperimentConfig &config) {
  const Collection &collection = world.collection;
  EmbeddingConfig ec = config.embeddings;
  ec.seed = config.seed;
  JointEmbeddingTable table =
      TrainJointEmbeddings(world.corpus, world.graph, ec).table;

  EncoderConfig enc = config.encoder;
  enc.vocab_size = world.vocab.native_size();
  enc.seed = config.seed;
  EncoderWeights initial = EncoderWeights::Init(enc);
  if (config.warm_start) WarmStartTokenTable(initial, table, world.vocab, config.seed);
  const AlignmentMatrix alignment =
      FitAlignment(table, world.vocab, initial.TokenTable());
  const AlignedEntityVectors aligned(table, alignment);
  const Vocabulary vocab = world.vocab.WithEntities(table.entities());

  ExperimentOutcome out;
  const InvertedIndex index = BuildIndex(collection.documents());
  out.first_stage = FirstStageRun(index, collection, config.depth);

  StagePlan plan{world.triples, collection.folds()};
  FinetuneOptions options = config.finetune;
  options.stage1.seed = config.seed;
  options.stage2.seed = config.seed;
  const MentionDictionary mentions(collection);
  const QrelMap qrels = MakeQrelMap(collection.qrels());
  const int cutoffs[] = {10, 100};

  for (bool entity_mode : {false, true}) {
    ModeOutcome &mode = entity_mode ? out.entity : out.mono;
    InputBuilder inputs(collection, vocab, entity_mode ? &aligned : nullptr,
                        config.limits);
    mode.training = TwoStageFinetune(initial, plan, collection, inputs,
                                     &mentions, options);
    mode.run = RerankByFold(out.first_stage, collection, inputs,
                            mode.training.folds, config.depth,
                            entity_mode ? "entity" : "mono", &mode.training.log);
    mode.report = EvaluateRun(mode.run, qrels, cutoffs);
    mode.split_ndcg10 = MeanOver(mode.report, world.split_queries);

    if (entity_mode) {
      std::vector<EmbeddingRow> rows;
      for (const auto &[fold_id, training] : mode.training.folds) {
        std::vector<ProbeInput> probes;
        for (const FoldSpec &f : collection.folds()) {
          if (f.fold_id != fold_id) continue;
          for (const std::string &qid : f.test_query_ids) {
            const Query *q = collection.FindQuery(qid);
            const std::map<std::string, int> *judged = collection.Judgments(qid);
            if (q == nullptr || judged == nullptr) continue;
            for (const auto &[doc_id, grade] : *judged) {
              if (grade > 0) probes.push_back({qid, inputs.Build(*q, doc_id)});
            }
          }
        }
        std::vector<EmbeddingRow> part =
            ExportFinalEmbeddings(training.weights, &aligned, probes);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      out.probe = ProbeClusters(rows, world.cluster_of);
    }
  }
  return out;
}

}  // namespace entrank
