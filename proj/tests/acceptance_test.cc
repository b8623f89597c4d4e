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


// Acceptance run: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "entrank/alignment.h"
#include "entrank/encoder.h"
#include "entrank/eval.h"
#include "entrank/experiment.h"
#include "entrank/retrieval.h"
#include "entrank/synthetic.h"
#include "entrank/text.h"
#include "entrank/tokenizer.h"
#include "oracles.h"

namespace entrank {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::string kVocab = std::string(ENTRANK_TEST_DATA) + "/fixture_vocab.txt";

Outcome NdcgOracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int q = 0; q < 20; ++q) {
    std::map<std::string, int> judged;
    std::vector<std::string> ranking;
    for (int d = 0; d < 50; ++d) {
      ranking.push_back("d" + std::to_string(d));
      if (rng() % 4 != 0) judged[ranking.back()] = static_cast<int>(rng() % 3);
    }
    std::shuffle(ranking.begin(), ranking.end(), rng);
    for (int k : {1, 5, 10, 20, 50, 100}) {
      worst = std::max(worst, std::abs(NdcgAtK(ranking, judged, k) -
                                       oracle::Ndcg(ranking, judged, k)));
    }
  }
  const double t = Seconds(start);
  return {worst < 1e-9 && t < 1.0,
          "max |delta| " + FormatDouble(worst) + ", " + FormatDouble(t) + " s"};
}

Outcome Bm25Exhaustive() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2);
  std::vector<Document> docs;
  std::vector<std::pair<std::string, std::vector<std::string>>> words;
  for (int i = 0; i < 200; ++i) {
    std::string text;
    const int len = 3 + static_cast<int>(rng() % 25);
    for (int j = 0; j < len; ++j) {
      text += (j ? " w" : "w") + std::to_string(static_cast<int>(
                                     std::sqrt(static_cast<double>(rng() % 1600))));
    }
    docs.push_back({"doc" + std::to_string(i), text});
    words.emplace_back(docs.back().doc_id, Words(text));
  }
  const InvertedIndex index = BuildIndex(docs);
  const Bm25Params params;
  int mismatches = 0;
  for (int q = 0; q < 50; ++q) {
    std::vector<std::string> terms;
    const int len = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < len; ++i) terms.push_back("w" + std::to_string(rng() % 40));
    const auto expected = oracle::ExhaustiveBm25(words, terms, params.k, params.b);
    const std::vector<ScoredDoc> got = Search(index, terms, 200, params);
    if (got.size() != expected.size()) {
      ++mismatches;
      continue;
    }
    for (size_t i = 0; i < got.size(); ++i) {
      if (got[i].doc_id != expected[i].first ||
          std::abs(got[i].score - expected[i].second) > 1e-9) {
        ++mismatches;
        break;
      }
    }
  }
  const double t = Seconds(start);
  return {mismatches == 0 && t < 5.0, std::to_string(mismatches) +
                                          " of 50 queries differ, " + FormatDouble(t) + " s"};
}

double Objective(const Matrix &w, const AlignmentPairs &pairs, double ridge) {
  double norm = 0.0;
  for (double v : w.data) norm += v * v;
  return Residual(w, pairs) + ridge * norm;
}

Outcome AlignmentOptimality() {
  const auto start = Clock::now();
  int failures = 0;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> words;
    std::vector<double> vectors;
    for (int i = 0; i < 30; ++i) {
      words.push_back("word" + std::string(1, static_cast<char>('a' + i % 26)) +
                      std::to_string(i));
      for (int d = 0; d < 6; ++d) vectors.push_back(normal(rng));
    }
    const JointEmbeddingTable table(6, words, {}, vectors, {});
    const Vocabulary vocab(words);
    Matrix tokens(vocab.native_size(), 8);
    for (double &v : tokens.data) v = normal(rng);
    const AlignmentPairs pairs = SharedPairs(table, vocab, tokens);
    const AlignmentMatrix fit = FitAlignment(table, vocab, tokens);
    const double best = Objective(fit.weights, pairs, fit.ridge);
    const double best_residual = Residual(fit.weights, pairs);
    for (int trial = 0; trial < 100; ++trial) {
      Matrix delta(fit.weights.rows, fit.weights.cols);
      for (double &v : delta.data) v = normal(rng);
      const double scale = 1e-2 / delta.FrobeniusNorm();
      Matrix w = fit.weights;
      for (size_t i = 0; i < w.data.size(); ++i) w.data[i] += scale * delta.data[i];
      if (Residual(w, pairs) <= best_residual || Objective(w, pairs, fit.ridge) <= best) {
        ++failures;
      }
    }
  }
  // Identical spaces recover the identity.
  std::mt19937_64 rng(9);
  AlignmentPairs same;
  same.source = Matrix(30, 5);
  for (int i = 0; i < 30; ++i) same.keys.push_back("k" + std::to_string(i));
  for (double &v : same.source.data) v = normal(rng);
  same.target = same.source;
  const Matrix w = FitAlignment(same, 0.0).weights;
  double off = 0.0;
  for (size_t r = 0; r < w.rows; ++r) {
    for (size_t c = 0; c < w.cols; ++c) off = std::max(off, std::abs(w(r, c) - (r == c)));
  }
  const double t = Seconds(start);
  return {failures == 0 && off < 1e-6 && t < 1.0,
          std::to_string(failures) + " of 500 perturbations not worse, identity error " +
              FormatDouble(off) + ", " + FormatDouble(t) + " s"};
}

// A query and document over the fixture vocabulary with one entity each.
struct FixtureInput {
  Vocabulary vocab = Vocabulary::Load(kVocab).WithEntities({"France", "Yoko_Ono"});
  JointEmbeddingTable table{2, {}, {"France", "Yoko_Ono"}, {}, {0.6, -0.2, 0.1, 0.9}};
  AlignmentMatrix w;
  std::unique_ptr<AlignedEntityVectors> entities;
  ModelInput input;

  explicit FixtureInput(int d_model) {
    w.weights = Matrix(d_model, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 0.3);
    for (double &v : w.weights.data) v = normal(rng);
    entities = std::make_unique<AlignedEntityVectors>(table, w);
    const std::string q = "who is yoko ono", d = "yoko ono produced films in france";
    auto at = [](const std::string &text, const std::string &m, const std::string &e) {
      const size_t pos = text.find(m);
      return Annotation{"x", pos, pos + m.size(), m, e};
    };
    const std::vector<Annotation> qa = {at(q, "yoko ono", "Yoko_Ono")};
    const std::vector<Annotation> da = {at(d, "yoko ono", "Yoko_Ono"),
                                        at(d, "france", "France")};
    input = BuildInput(AnnotateTokens(q, qa, vocab), AnnotateTokens(d, da, vocab));
  }
};

Outcome GradientCheck() {
  const auto start = Clock::now();
  const FixtureInput fx(64);
  double worst = 0.0;
  int fewest = 1 << 30;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    EncoderConfig config;  // 64 wide, 2 layers, 4 heads, 256 feed-forward
    config.vocab_size = fx.vocab.native_size();
    config.seed = seed;
    const EncoderWeights weights = EncoderWeights::Init(config);
    const GradCheckResult r = GradCheck(weights, fx.input, static_cast<int>(seed % 2),
                                        fx.entities.get(), {.samples = 200, .seed = seed});
    worst = std::max(worst, r.max_relative_error);
    fewest = std::min(fewest, r.checked);
  }
  const double t = Seconds(start);
  return {worst < 1e-4 && fewest >= 200 && t < 30.0,
          "max relative error " + FormatDouble(worst) + " over >= " +
              std::to_string(fewest) + " params per seed, " + FormatDouble(t) + " s"};
}

Outcome CoinFlipLoss() {
  const FixtureInput fx(16);
  EncoderWeights weights = EncoderWeights::Init(
      {.d_model = 16, .n_layers = 1, .n_heads = 2, .d_ff = 32, .max_positions = 64,
       .vocab_size = fx.vocab.native_size()});
  for (double &x : weights.Tensor("classifier.weight")) x = 0.0;
  for (double &x : weights.Tensor("classifier.bias")) x = 0.0;
  const TrainingBatch batch{{fx.input, fx.input}, {1, 0}};
  const double s = Score(weights, fx.input, fx.entities.get());
  const double loss = BatchLoss(weights, batch, fx.entities.get());
  const double delta = std::abs(loss - 2.0 * std::log(2.0));
  return {s == 0.5 && delta < 1e-12, "s = " + FormatDouble(s) + ", |loss - 2 ln 2| = " +
                                          FormatDouble(delta)};
}

Outcome Categories() {
  const Vocabulary v = Vocabulary::Load(kVocab);
  const bool ok = CategorizeMention("France", v) == MentionCategory::kOneToken &&
                  CategorizeMention("Yoko Ono", v) == MentionCategory::kMultiNoCont &&
                  CategorizeMention("Weser", v) == MentionCategory::kOneCont &&
                  CategorizeMention("Frisian", v) == MentionCategory::kMultiCont;
  std::string detail;
  for (const char *m : {"France", "Yoko Ono", "Weser", "Frisian"}) {
    if (!detail.empty()) detail += ", ";
    detail += std::string(m) + " " + std::string(MentionCategoryName(CategorizeMention(m, v)));
  }
  return {ok, detail};
}

bool SameCandidates(const Run &a, const Run &b) {
  if (a.queries.size() != b.queries.size()) return false;
  for (const auto &[qid, entries] : a.queries) {
    auto it = b.queries.find(qid);
    if (it == b.queries.end()) return false;
    std::set<std::string> x, y;
    for (const RunEntry &e : entries) x.insert(e.doc_id);
    for (const RunEntry &e : it->second) y.insert(e.doc_id);
    if (x != y) return false;
  }
  return true;
}

std::string Fingerprint(const ExperimentOutcome &o) {
  std::string s = SerializeRun(o.first_stage) + SerializeRun(o.mono.run) +
                  SerializeRun(o.entity.run) + o.mono.report.ToTsv() +
                  o.entity.report.ToTsv() + o.entity.training.stage1.Serialize();
  for (const auto &[fold, t] : o.entity.training.folds) s += t.weights.Serialize();
  return s;
}

int Main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> fast = {
      {"1 NDCG matches the oracle on 20 queries x 50 docs", NdcgOracle},
      {"2 BM25 search equals exhaustive scoring on 200 docs / 50 queries", Bm25Exhaustive},
      {"3 fitted alignment beats perturbations; identity fixture gives W = I",
       AlignmentOptimality},
      {"4 gradient check on the default encoder, 3 seeds", GradientCheck},
      {"5 batch loss is 2 ln 2 at s = 0.5", CoinFlipLoss},
  };
  std::vector<std::pair<std::string, Outcome>> results;
  for (auto &[name, fn] : fast) results.emplace_back(name, fn());

  // Criteria 6, 7 and 9 share the experiment runs.
  const auto start = Clock::now();
  const SyntheticWorld world = GenerateWorld(SyntheticConfig{});
  double diff_sum = 0.0;
  int probe_wins = 0;
  bool same_candidates = true;
  std::string per_seed, fingerprint;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    ExperimentConfig config;
    config.seed = seed;
    const ExperimentOutcome o = RunExperiment(world, config);
    const double diff = o.entity.split_ndcg10 - o.mono.split_ndcg10;
    diff_sum += diff;
    probe_wins += o.probe.intra > o.probe.inter;
    same_candidates = same_candidates && SameCandidates(o.mono.run, o.entity.run) &&
                      SameCandidates(o.mono.run, o.first_stage);
    per_seed += " " + FormatDouble(diff);
    if (seed == 1) fingerprint = Fingerprint(o);
    std::printf("  seed %d: split NDCG@10 entity %.4f mono %.4f; probe intra %.4f inter %.4f\n",
                static_cast<int>(seed), o.entity.split_ndcg10, o.mono.split_ndcg10,
                o.probe.intra, o.probe.inter);
  }
  const double mean_diff = diff_sum / 5.0;
  const double elapsed = Seconds(start);
  results.emplace_back(
      "6 entity tokens improve split-mention NDCG@10 over 5 seeds",
      Outcome{mean_diff > 0.0 && same_candidates && elapsed < 600.0,
              "mean improvement " + FormatDouble(mean_diff) + " (per seed" + per_seed +
                  "), identical candidates " + (same_candidates ? "yes" : "no") + ", " +
                  FormatDouble(elapsed) + " s"});
  results.emplace_back("7 linked entities cluster in the final layer",
                       Outcome{probe_wins >= 4, std::to_string(probe_wins) + " of 5 seeds"});
  results.emplace_back("8 reference mentions fall into their categories", Categories());

  ExperimentConfig again;
  again.seed = 1;
  const bool identical = Fingerprint(RunExperiment(GenerateWorld(SyntheticConfig{}), again)) ==
                         fingerprint;
  results.emplace_back("9 repeated runs are byte-identical",
                       Outcome{identical, identical ? "runs, reports and weights match"
                                                    : "outputs differ"});

  bool all = true;
  for (const auto &[name, o] : results) {
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    all = all && o.pass;
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}

}  // namespace
}  // namespace entrank

int main() { return entrank::Main(); }
