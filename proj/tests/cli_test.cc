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


#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "entrank/cli.h"
#include "entrank/status.h"
#include "entrank/synthetic.h"
#include "entrank/text.h"

namespace entrank {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out, err;
};

Result Call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Runs the whole pipeline in `dir` and returns every produced file.
std::map<std::string, std::string> Pipeline(const fs::path &dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  SyntheticConfig config;
  WriteWorld(GenerateWorld(config), dir.string());
  auto p = [&](const std::string &name) { return (dir / name).string(); };
  const std::vector<std::string> coll = {
      "--documents", p("documents.tsv"), "--queries", p("queries.tsv"),
      "--qrels", p("qrels.txt"), "--annotations", p("annotations.tsv"),
      "--folds", p("folds.tsv")};
  auto with = [&](std::vector<std::string> a, const std::vector<std::string> &extra) {
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  auto ok = [](const Result &r) {
    INFO(r.err);
    REQUIRE(r.code == kExitOk);
  };
  ok(Call({"build-vocab", "--documents", p("documents.tsv"), "--size", "120",
           "--out", p("learned_vocab.txt")}));
  ok(Call({"train-embeddings", "--documents", p("documents.tsv"), "--graph",
           p("graph.txt"), "--dim", "8", "--epochs", "2", "--seed", "4", "--out",
           p("emb.txt"), "--trace", p("emb_trace.tsv")}));
  ok(Call({"fit-alignment", "--embeddings", p("emb.txt"), "--vocab", p("vocab.txt"),
           "--encoder-out", p("init.model"), "--d-model", "16", "--layers", "1",
           "--heads", "2", "--d-ff", "32", "--max-positions", "128", "--seed", "4",
           "--out", p("w.txt")}));
  ok(Call({"index", "--documents", p("documents.tsv"), "--out", p("index.txt")}));
  ok(Call({"search", "--index", p("index.txt"), "--queries", p("queries.tsv"), "--k",
           "20", "--out", p("bm25.run")}));
  const std::vector<std::string> model = {"--vocab", p("vocab.txt"), "--embeddings",
                                          p("emb.txt"), "--alignment", p("w.txt"),
                                          "--entities", "on", "--max-total", "96"};
  ok(Call(with(with({"train", "--stage", "stage1", "--triples", p("triples.tsv"),
                     "--init", p("init.model"), "--lr", "0.05", "--seed", "4", "--out",
                     p("s1.model"), "--trace", p("s1_trace.tsv")},
                    coll),
               model)));
  ok(Call(with(with({"train", "--stage", "stage2", "--init", p("s1.model"), "--lr",
                     "0.05", "--seed", "4", "--out-dir", p("folds")},
                    coll),
               model)));
  ok(Call(with(with({"rerank", "--run", p("bm25.run"), "--model-dir", p("folds"),
                     "--depth", "10", "--out", p("entity.run")},
                    coll),
               model)));
  ok(Call({"evaluate", "--run", p("entity.run"), "--qrels", p("qrels.txt"), "--compare",
           p("bm25.run"), "--out", p("eval.tsv")}));
  ok(Call(with(with({"analyze", "--kind", "category", "--run-a", p("entity.run"),
                     "--run-b", p("bm25.run"), "--out", p("category.tsv")},
                    coll),
               model)));
  ok(Call(with(with({"analyze", "--kind", "export-attention", "--model",
                     p("folds/fold0.model"), "--query-id", "INEX_LD-01", "--doc-id",
                     "E015", "--out", p("attention.tsv")},
                    coll),
               model)));

  std::map<std::string, std::string> files;
  for (const auto &entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), dir).string()] = ReadFile(entry.path().string());
    }
  }
  return files;
}

TEST_SUITE("cli") {

TEST_CASE("the full pipeline is byte-identical across runs") {
  const fs::path tmp = fs::temp_directory_path();
  const auto a = Pipeline(tmp / "entrank_cli_a"), b = Pipeline(tmp / "entrank_cli_b");
  CHECK(a.size() >= 18);
  CHECK(a == b);
  CHECK(a.at("eval.tsv").starts_with("query_id\tndcg@10\tndcg@100\n"));
  CHECK(a.at("eval.tsv").find("\nmetric\tt\tp\tdf\n") != std::string::npos);
  CHECK(a.count("folds/fold4.model") == 1);
}

TEST_CASE("usage and data errors have distinct exit codes") {
  CHECK(Call({"frobnicate"}).code == kExitUsage);
  CHECK(Call({}).code == kExitUsage);
  CHECK(Call({"index", "--bogus", "1"}).code == kExitUsage);
  CHECK(Call({"--help"}).code == kExitOk);
  const Result missing = Call({"index", "--documents", "/nonexistent/docs.tsv", "--out",
                               "/tmp/entrank_never.txt"});
  CHECK(missing.code == kExitDataError);
  CHECK(!missing.err.empty());
}

TEST_CASE("config files fill in flags that were not given") {
  const std::map<std::string, std::string> c =
      ParseConfig("# comment\n k1 = 1.5 \n\nb=0.5\r\n", "cfg");
  CHECK(c.at("k1") == "1.5");
  CHECK(c.at("b") == "0.5");
  CHECK_THROWS_AS(ParseConfig("novalue\n", "cfg"), Error);

  const fs::path dir = fs::temp_directory_path() / "entrank_cli_config";
  fs::create_directories(dir);
  WriteFile((dir / "docs.tsv").string(), "d1\tthe weser river\nd2\tfrance\n");
  WriteFile((dir / "q.tsv").string(), "q1\triver\n");
  WriteFile((dir / "cfg").string(), "k=1\nunrelated=3\n");
  REQUIRE(Call({"index", "--documents", (dir / "docs.tsv").string(), "--out",
                (dir / "idx").string()}).code == kExitOk);
  const std::vector<std::string> search = {"--config", (dir / "cfg").string(), "search",
                                           "--index", (dir / "idx").string(),
                                           "--queries", (dir / "q.tsv").string()};
  const Result one = Call(search);
  REQUIRE(one.code == kExitOk);
  CHECK(std::count(one.out.begin(), one.out.end(), '\n') == 1);
  std::vector<std::string> flagged = search;
  flagged.insert(flagged.end(), {"--k", "2"});
  const Result two = Call(flagged);
  CHECK(std::count(two.out.begin(), two.out.end(), '\n') == 2);
}

}  // TEST_SUITE

}  // namespace
}  // namespace entrank
