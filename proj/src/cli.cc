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


#include "entrank/cli.h"

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "entrank/alignment.h"
#include "entrank/corpus.h"
#include "entrank/embeddings.h"
#include "entrank/encoder.h"
#include "entrank/eval.h"
#include "entrank/pipeline.h"
#include "entrank/retrieval.h"
#include "entrank/status.h"
#include "entrank/text.h"
#include "entrank/tokenizer.h"

namespace entrank {

namespace {

// Bad flag combinations detected after parsing; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void Require(const std::string &value, const char *flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

void Emit(const std::string &path, const std::string &content, std::ostream &out) {
  if (path.empty()) {
    out << content;
  } else {
    WriteFile(path, content);
  }
}

std::string FoldModelPath(const std::string &dir, int fold_id) {
  return (std::filesystem::path(dir) / ("fold" + std::to_string(fold_id) + ".model"))
      .string();
}

struct CollectionFlags {
  std::string documents, queries, qrels, annotations, folds;

  void Add(CLI::App *app) {
    app->add_option("--documents", documents, "Abstracts TSV (doc_id, text)");
    app->add_option("--queries", queries, "Queries TSV (query_id, text[, type])");
    app->add_option("--qrels", qrels, "Graded judgments");
    app->add_option("--annotations", annotations, "Entity annotations TSV");
    app->add_option("--folds", folds, "Fold assignments TSV");
  }

  Collection Load() const {
    Require(documents, "--documents");
    Require(queries, "--queries");
    return LoadCollection({documents, queries, qrels, annotations, folds});
  }
};

struct ModelFlags {
  std::string vocab, embeddings, alignment;
  std::string entities = "off";
  int max_query = 64;
  int max_total = 512;

  void Add(CLI::App *app) {
    app->add_option("--vocab", vocab, "Word-piece vocabulary");
    app->add_option("--embeddings", embeddings, "Joint word/entity embeddings");
    app->add_option("--alignment", alignment, "Alignment matrix");
    app->add_option("--entities", entities, "Entity tokens in the input")
        ->check(CLI::IsMember({"on", "off"}));
    app->add_option("--max-query", max_query, "Query token budget");
    app->add_option("--max-total", max_total, "Input token budget");
  }

  bool entity_mode() const { return entities == "on"; }
  InputLimits limits() const { return {max_query, max_total}; }
};

// Vocabulary and entity vectors for one mode.
struct Inputs {
  Vocabulary vocab;
  std::optional<JointEmbeddingTable> table;
  std::optional<AlignedEntityVectors> aligned;

  const EntityVectors *vectors() const {
    return aligned ? &*aligned : nullptr;
  }
};

std::unique_ptr<Inputs> LoadInputs(const ModelFlags &flags) {
  Require(flags.vocab, "--vocab");
  auto inputs = std::make_unique<Inputs>();
  Vocabulary base = Vocabulary::Load(flags.vocab);
  if (!flags.entity_mode()) {
    inputs->vocab = std::move(base);
    return inputs;
  }
  Require(flags.embeddings, "--embeddings");
  Require(flags.alignment, "--alignment");
  inputs->table = JointEmbeddingTable::Load(flags.embeddings);
  AlignmentMatrix alignment;
  alignment.weights = LoadMatrix(flags.alignment);
  inputs->aligned.emplace(*inputs->table, alignment);
  inputs->vocab = base.WithEntities(inputs->table->entities());
  return inputs;
}

std::vector<int> ParseCutoffs(const std::string &text) {
  std::vector<int> cutoffs;
  for (std::string_view part : SplitOn(text, ',')) {
    const long long k = ParseInt(part);
    if (k < 1) throw UsageError("cutoffs must be positive integers");
    cutoffs.push_back(static_cast<int>(k));
  }
  if (cutoffs.empty()) throw UsageError("--cutoffs is empty");
  return cutoffs;
}

std::string TraceTsv(const std::vector<double> &trace) {
  std::string out = "epoch\tloss\n";
  for (size_t i = 0; i < trace.size(); ++i) {
    out += std::to_string(i + 1) + '\t' + FormatDouble(trace[i]) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct BuildVocabCommand {
  std::string documents, out;
  int size = 30000;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    app->add_option("--documents", documents, "Abstracts TSV");
    app->add_option("--size", size, "Target vocabulary size, specials included");
    app->add_option("--out", out, "Output vocabulary");
    app->add_option("--seed", seed, "Unused; accepted everywhere");
  }

  int Run(std::ostream &os) const {
    Require(documents, "--documents");
    std::vector<std::string> corpus;
    for (const Document &d : LoadDocuments(documents)) corpus.push_back(d.text);
    Emit(out, BuildVocab(corpus, size).Serialize(), os);
    return kExitOk;
  }
};

struct TrainEmbeddingsCommand {
  std::string documents, graph, out, trace;
  EmbeddingConfig config;

  void Add(CLI::App *app) {
    app->add_option("--documents", documents, "Abstracts TSV");
    app->add_option("--graph", graph, "Knowledge graph");
    app->add_option("--dim", config.dim, "Vector size");
    app->add_option("--window", config.window, "Context radius");
    app->add_option("--negatives", config.negatives, "Negatives per pair");
    app->add_option("--epochs", config.epochs, "Passes over the pairs");
    app->add_option("--lr", config.learning_rate, "Initial learning rate");
    app->add_option("--min-count", config.min_count, "Minimum word count");
    app->add_option("--seed", config.seed, "Random seed");
    app->add_option("--out", out, "Output table");
    app->add_option("--trace", trace, "Per-epoch loss TSV");
  }

  int Run(std::ostream &os) const {
    Require(documents, "--documents");
    Require(graph, "--graph");
    config.Validate();
    std::vector<std::string> corpus;
    for (const Document &d : LoadDocuments(documents)) corpus.push_back(d.text);
    EmbeddingResult result = TrainJointEmbeddings(corpus, LoadGraph(graph), config);
    Emit(out, result.table.Serialize(), os);
    if (!trace.empty()) {
      std::string tsv = "objective\tepoch\tloss\n";
      auto add = [&](const char *name, const std::vector<double> &values) {
        for (size_t i = 0; i < values.size(); ++i) {
          tsv += std::string(name) + '\t' + std::to_string(i + 1) + '\t' +
                 FormatDouble(values[i]) + '\n';
        }
      };
      add("word", result.trace.word);
      add("entity", result.trace.entity);
      add("anchor", result.trace.anchor);
      WriteFile(trace, tsv);
    }
    return kExitOk;
  }
};

struct FitAlignmentCommand {
  std::string embeddings, vocab, encoder, encoder_out, out;
  std::string warm_start = "on";
  double ridge = -1.0;
  EncoderConfig config;

  void Add(CLI::App *app) {
    app->add_option("--embeddings", embeddings, "Joint word/entity embeddings");
    app->add_option("--vocab", vocab, "Word-piece vocabulary");
    app->add_option("--encoder", encoder, "Existing encoder weights");
    app->add_option("--encoder-out", encoder_out,
                    "Where to write freshly initialized weights");
    app->add_option("--warm-start", warm_start,
                    "Seed fresh token rows from the word vectors")
        ->check(CLI::IsMember({"on", "off"}));
    app->add_option("--ridge", ridge, "Ridge weight; negative picks the default");
    app->add_option("--d-model", config.d_model, "Hidden size");
    app->add_option("--layers", config.n_layers, "Encoder layers");
    app->add_option("--heads", config.n_heads, "Attention heads");
    app->add_option("--d-ff", config.d_ff, "Feed-forward size");
    app->add_option("--max-positions", config.max_positions, "Position rows");
    app->add_option("--dropout", config.dropout, "Dropout rate");
    app->add_option("--seed", config.seed, "Random seed");
    app->add_option("--out", out, "Output alignment matrix");
  }

  int Run(std::ostream &os, std::ostream &err) const {
    Require(embeddings, "--embeddings");
    Require(vocab, "--vocab");
    if (encoder.empty() == encoder_out.empty()) {
      throw UsageError("give exactly one of --encoder and --encoder-out");
    }
    const JointEmbeddingTable table = JointEmbeddingTable::Load(embeddings);
    const Vocabulary pieces = Vocabulary::Load(vocab);
    EncoderWeights weights;
    if (!encoder.empty()) {
      weights = EncoderWeights::Load(encoder);
    } else {
      EncoderConfig c = config;
      c.vocab_size = pieces.native_size();
      c.Validate();
      weights = EncoderWeights::Init(c);
      if (warm_start == "on") WarmStartTokenTable(weights, table, pieces, c.seed);
      WriteFile(encoder_out, weights.Serialize());
    }
    std::optional<double> r;
    if (ridge >= 0.0) r = ridge;
    const AlignmentMatrix alignment =
        FitAlignment(table, pieces, weights.TokenTable(), r);
    err << "alignment fitted on " << alignment.fitted_on << " shared words\n";
    Emit(out, SerializeMatrix(alignment.weights), os);
    return kExitOk;
  }
};

struct IndexCommand {
  std::string documents, out;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    app->add_option("--documents", documents, "Abstracts TSV");
    app->add_option("--out", out, "Output index");
    app->add_option("--seed", seed, "Unused; accepted everywhere");
  }

  int Run(std::ostream &os) const {
    Require(documents, "--documents");
    Emit(out, BuildIndex(LoadDocuments(documents)).Serialize(), os);
    return kExitOk;
  }
};

struct SearchCommand {
  std::string index, queries, tag = "bm25", out;
  int k_top = 100;
  Bm25Params params;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    app->add_option("--index", index, "Inverted index");
    app->add_option("--queries", queries, "Queries TSV");
    app->add_option("--k", k_top, "Results per query");
    app->add_option("--k1", params.k, "BM25 term saturation");
    app->add_option("--b", params.b, "BM25 length normalization");
    app->add_option("--tag", tag, "Run tag");
    app->add_option("--out", out, "Output run");
    app->add_option("--seed", seed, "Unused; accepted everywhere");
  }

  int Run(std::ostream &os) const {
    Require(index, "--index");
    Require(queries, "--queries");
    const Collection collection({}, LoadQueries(queries), {}, {});
    Emit(out,
         SerializeRun(FirstStageRun(InvertedIndex::Load(index), collection,
                                    k_top, params, tag)),
         os);
    return kExitOk;
  }
};

struct TrainCommand {
  CollectionFlags collection;
  ModelFlags model;
  std::string stage = "stage1", triples, init, out, out_dir, trace;
  TrainOptions options;
  int batch_size = 8;
  int fold = -1;

  void Add(CLI::App *app) {
    collection.Add(app);
    model.Add(app);
    app->add_option("--stage", stage, "Fine-tuning stage")
        ->check(CLI::IsMember({"stage1", "stage2"}));
    app->add_option("--triples", triples, "Stage-1 triples TSV");
    app->add_option("--init", init, "Starting weights");
    app->add_option("--lr", options.learning_rate, "Learning rate");
    app->add_option("--epochs", options.epochs, "Epochs");
    app->add_option("--warmup", options.warmup_steps, "Warm-up steps");
    app->add_option("--batch-size", batch_size, "Examples per step");
    app->add_option("--fold", fold, "Train one fold only (stage 2)");
    app->add_option("--seed", options.seed, "Random seed");
    app->add_option("--out", out, "Output weights (stage 1)");
    app->add_option("--out-dir", out_dir, "Output directory (stage 2)");
    app->add_option("--trace", trace, "Loss trace TSV (stage 1)");
  }

  int Run(std::ostream &os) const {
    Require(init, "--init");
    const Collection c = collection.Load();
    const std::unique_ptr<Inputs> in = LoadInputs(model);
    const InputBuilder builder(c, in->vocab, in->vectors(), model.limits());
    const MentionDictionary mentions(c);
    const EncoderWeights initial = EncoderWeights::Load(init);

    FinetuneOptions fo;
    fo.stage1 = options;
    fo.stage2 = options;
    fo.batch_size = batch_size;
    StagePlan plan;
    if (stage == "stage1") {
      Require(triples, "--triples");
      Require(out, "--out");
      plan.stage1 = LoadTriples(triples);
      const FinetuneResult result =
          TwoStageFinetune(initial, plan, c, builder, &mentions, fo);
      WriteFile(out, result.stage1.Serialize());
      if (!trace.empty()) WriteFile(trace, TraceTsv(result.stage1_trace));
      return kExitOk;
    }
    Require(out_dir, "--out-dir");
    for (const FoldSpec &f : c.folds()) {
      if (fold < 0 || f.fold_id == fold) plan.folds.push_back(f);
    }
    if (plan.folds.empty()) throw Error(ErrorCode::kConfig, "no fold to train");
    fo.run_stage1 = false;
    const FinetuneResult result =
        TwoStageFinetune(initial, plan, c, builder, &mentions, fo);
    std::filesystem::create_directories(out_dir);
    std::string summary = "fold\texamples\tinitial_loss\tfinal_loss\n";
    for (const auto &[fold_id, training] : result.folds) {
      WriteFile(FoldModelPath(out_dir, fold_id), training.weights.Serialize());
      summary += std::to_string(fold_id) + '\t' + std::to_string(training.examples) +
                 '\t' + FormatDouble(training.initial_loss) + '\t' +
                 FormatDouble(training.final_loss) + '\n';
    }
    os << summary;
    return kExitOk;
  }
};

struct RerankCommand {
  CollectionFlags collection;
  ModelFlags model;
  std::string run, model_path, model_dir, tag, out;
  int depth = 100;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    collection.Add(app);
    model.Add(app);
    app->add_option("--run", run, "First-stage run");
    app->add_option("--model", model_path, "One model for every query");
    app->add_option("--model-dir", model_dir, "Per-fold models from stage 2");
    app->add_option("--depth", depth, "Candidates re-scored per query");
    app->add_option("--tag", tag, "Run tag (default: mode name)");
    app->add_option("--out", out, "Output run");
    app->add_option("--seed", seed, "Unused; scoring is deterministic");
  }

  int Run(std::ostream &os) const {
    Require(run, "--run");
    if (model_path.empty() == model_dir.empty()) {
      throw UsageError("give exactly one of --model and --model-dir");
    }
    const Collection c = collection.Load();
    const std::unique_ptr<Inputs> in = LoadInputs(model);
    const InputBuilder builder(c, in->vocab, in->vectors(), model.limits());
    const entrank::Run first = ReadRun(run);
    const std::string name =
        !tag.empty() ? tag : (model.entity_mode() ? "entity" : "mono");
    entrank::Run result;
    if (!model_path.empty()) {
      const EncoderWeights weights = EncoderWeights::Load(model_path);
      const NeuralScorer scorer(builder, weights);
      result = Rerank(first, c, scorer, depth, name);
    } else {
      std::map<int, FoldTraining> folds;
      for (const FoldSpec &f : c.folds()) {
        const std::string path = FoldModelPath(model_dir, f.fold_id);
        if (std::filesystem::exists(path)) {
          folds[f.fold_id].weights = EncoderWeights::Load(path);
        }
      }
      if (folds.empty()) {
        throw Error(ErrorCode::kIo, "no fold models found", model_dir);
      }
      result = RerankByFold(first, c, builder, folds, depth, name, nullptr);
    }
    Emit(out, SerializeRun(result), os);
    return kExitOk;
  }
};

struct EvaluateCommand {
  std::string run, qrels, compare, cutoffs = "10,100", out;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    app->add_option("--run", run, "Run to evaluate");
    app->add_option("--qrels", qrels, "Graded judgments");
    app->add_option("--cutoffs", cutoffs, "Comma-separated NDCG cutoffs");
    app->add_option("--compare", compare, "Second run for a paired t-test");
    app->add_option("--out", out, "Output report");
    app->add_option("--seed", seed, "Unused; accepted everywhere");
  }

  int Run(std::ostream &os, std::ostream &err) const {
    Require(run, "--run");
    Require(qrels, "--qrels");
    const std::vector<int> ks = ParseCutoffs(cutoffs);
    const QrelMap judged = MakeQrelMap(LoadQrels(qrels));
    const EvalReport report = EvaluateRun(ReadRun(run), judged, ks);
    for (const std::string &w : report.warnings) err << "warning: " << w << '\n';
    std::string tsv = report.ToTsv();
    if (!compare.empty()) {
      const EvalReport other = EvaluateRun(ReadRun(compare), judged, ks);
      tsv += "\nmetric\tt\tp\tdf\n";
      for (int k : ks) {
        const auto [a, b] = AlignedScores(report, other, k);
        const TTestResult t = PairedTTest(a, b);
        tsv += "ndcg@" + std::to_string(k) + '\t' + FormatDouble(t.t) + '\t' +
               FormatDouble(t.p) + '\t' + std::to_string(t.df) + '\n';
      }
    }
    Emit(out, tsv, os);
    return kExitOk;
  }
};

struct AnalyzeCommand {
  CollectionFlags collection;
  ModelFlags model;
  std::string kind, run_a, run_b, weights, query_id, doc_id, out;
  int cutoff = 10;
  int max_entities = 0;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    collection.Add(app);
    model.Add(app);
    app->add_option("--kind", kind, "Analysis to run")
        ->check(CLI::IsMember(
            {"category", "crosstab", "export-embeddings", "export-attention"}));
    app->add_option("--run-a", run_a, "First run (category)");
    app->add_option("--run-b", run_b, "Second run (category)");
    app->add_option("--cutoff", cutoff, "NDCG cutoff (category)");
    app->add_option("--model", weights, "Encoder weights (exports)");
    app->add_option("--query-id", query_id, "Query to export");
    app->add_option("--doc-id", doc_id, "Document to export (attention)");
    app->add_option("--max-entities", max_entities,
                    "Entity rows to export; 0 keeps all");
    app->add_option("--out", out, "Output TSV");
    app->add_option("--seed", seed, "Unused; accepted everywhere");
  }

  int Run(std::ostream &os) const {
    Require(kind, "--kind");
    Require(model.vocab, "--vocab");
    const Collection c = collection.Load();
    if (kind == "category" || kind == "crosstab") {
      const Vocabulary pieces = Vocabulary::Load(model.vocab);
      if (kind == "crosstab") {
        Emit(out, BuildCrosstab(c, pieces).ToTsv(), os);
        return kExitOk;
      }
      Require(run_a, "--run-a");
      Require(run_b, "--run-b");
      Emit(out,
           BuildCategoryReport(ReadRun(run_a), ReadRun(run_b), c, pieces, cutoff)
               .ToTsv(),
           os);
      return kExitOk;
    }
    Require(weights, "--model");
    const std::unique_ptr<Inputs> in = LoadInputs(model);
    const InputBuilder builder(c, in->vocab, in->vectors(), model.limits());
    const EncoderWeights w = EncoderWeights::Load(weights);
    if (kind == "export-attention") {
      Require(query_id, "--query-id");
      Require(doc_id, "--doc-id");
      const Query *q = c.FindQuery(query_id);
      if (q == nullptr) throw Error(ErrorCode::kUnknownKey, "unknown query", query_id);
      const std::vector<AttentionWeight> attention =
          ExportAttention(w, in->vectors(), builder.Build(*q, doc_id));
      Emit(out, AttentionToTsv(query_id, doc_id, attention), os);
      return kExitOk;
    }
    // Embeddings of every relevant (query, document) pair.
    std::vector<ProbeInput> probes;
    for (const Query &q : c.queries()) {
      if (!query_id.empty() && q.query_id != query_id) continue;
      const std::map<std::string, int> *judged = c.Judgments(q.query_id);
      if (judged == nullptr) continue;
      for (const auto &[doc, grade] : *judged) {
        if (grade > 0) probes.push_back({q.query_id, builder.Build(q, doc)});
      }
    }
    const std::vector<EmbeddingRow> rows =
        ExportFinalEmbeddings(w, in->vectors(), probes, max_entities);
    Emit(out, EmbeddingRowsToTsv(rows), os);
    return kExitOk;
  }
};

struct ValidateCommand {
  CollectionFlags collection;
  std::string graph, out;
  bool strict = false;
  uint64_t seed = 1;

  void Add(CLI::App *app) {
    collection.Add(app);
    app->add_option("--graph", graph, "Knowledge graph");
    app->add_flag("--strict", strict, "Exit 1 when anything is reported");
    app->add_option("--out", out, "Output report");
    app->add_option("--seed", seed, "Unused; accepted everywhere");
  }

  int Run(std::ostream &os) const {
    Require(graph, "--graph");
    const ValidationReport report = Validate(collection.Load(), LoadGraph(graph));
    Emit(out, report.ToTsv(), os);
    return strict && !report.empty() ? kExitDataError : kExitOk;
  }
};

std::vector<const char *> Argv(const std::vector<std::string> &args) {
  std::vector<const char *> argv{"entrank"};
  for (const std::string &a : args) argv.push_back(a.c_str());
  return argv;
}

}  // namespace

std::map<std::string, std::string> ParseConfig(const std::string &content,
                                               const std::string &origin) {
  std::map<std::string, std::string> values;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < content.size()) {
    size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(origin, line_no, "expected key=value");
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t");
      const size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(origin, line_no, "empty key");
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

int Dispatch(const std::vector<std::string> &args, std::ostream &out,
             std::ostream &err) {
  CLI::App app{"Entity-enriched neural re-ranking for entity retrieval", "entrank"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; flags take precedence");

  BuildVocabCommand build_vocab;
  TrainEmbeddingsCommand train_embeddings;
  FitAlignmentCommand fit_alignment;
  IndexCommand index;
  SearchCommand search;
  TrainCommand train;
  RerankCommand rerank;
  EvaluateCommand evaluate;
  AnalyzeCommand analyze;
  ValidateCommand validate;
  build_vocab.Add(app.add_subcommand("build-vocab", "Learn a word-piece vocabulary"));
  train_embeddings.Add(
      app.add_subcommand("train-embeddings", "Train joint word/entity embeddings"));
  fit_alignment.Add(app.add_subcommand(
      "fit-alignment", "Map the embedding space onto encoder token rows"));
  index.Add(app.add_subcommand("index", "Build the BM25 index"));
  search.Add(app.add_subcommand("search", "First-stage BM25 run"));
  train.Add(app.add_subcommand("train", "Fine-tune the re-ranker"));
  rerank.Add(app.add_subcommand("rerank", "Re-rank a run"));
  evaluate.Add(app.add_subcommand("evaluate", "NDCG report for a run"));
  analyze.Add(app.add_subcommand("analyze", "Category, crosstab and exports"));
  validate.Add(app.add_subcommand("validate", "Cross-check collection and graph"));

  try {
    std::vector<const char *> argv = Argv(args);
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (!config_path.empty()) {
      // Config values fill only the options left unset on the command line;
      // keys the subcommand does not know are ignored so one file can serve
      // every step.
      const std::map<std::string, std::string> config =
          ParseConfig(ReadFile(config_path), config_path);
      CLI::App *sub = app.get_subcommands().front();
      std::vector<std::string> merged = args;
      for (const auto &[key, value] : config) {
        const CLI::Option *opt = sub->get_option_no_throw("--" + key);
        if (opt != nullptr && opt->count() == 0) merged.push_back("--" + key + "=" + value);
      }
      app.clear();
      argv = Argv(merged);
      app.parse(static_cast<int>(argv.size()), argv.data());
    }
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "entrank: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error &e) {
    err << "entrank: " << e.what() << '\n';
    return kExitDataError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "build-vocab") return build_vocab.Run(out);
    if (name == "train-embeddings") return train_embeddings.Run(out);
    if (name == "fit-alignment") return fit_alignment.Run(out, err);
    if (name == "index") return index.Run(out);
    if (name == "search") return search.Run(out);
    if (name == "train") return train.Run(out);
    if (name == "rerank") return rerank.Run(out);
    if (name == "evaluate") return evaluate.Run(out, err);
    if (name == "analyze") return analyze.Run(out);
    return validate.Run(out);
  } catch (const UsageError &e) {
    err << "entrank " << name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error &e) {
    err << "entrank " << name << ": " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception &e) {
    err << "entrank " << name << ": " << e.what() << '\n';
    return kExitDataError;
  }
}

}  // namespace entrank
