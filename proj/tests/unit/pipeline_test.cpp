#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gnome/pipeline.hpp"

namespace gnome {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("gnome_pipeline_test_" + name);
  fs::remove_all(d);
  return d;
}

PipelineConfig mini() { return load_config(fs::path(GNOME_MINI_DIR) / "mini.conf"); }

TEST(Config, ParseSerializeRoundTrip) {
  auto c = parse_config("# comment\nk = 7\nn=3\n\nscope = pooled\ntemperature = 0.5 # trailing\n");
  EXPECT_EQ(c.k, 7u);
  EXPECT_EQ(c.generation.n_passes, 3u);
  EXPECT_EQ(c.scope, FrequencyScope::Pooled);
  EXPECT_DOUBLE_EQ(c.generation.temperature, 0.5);
  auto again = parse_config(c.serialize());
  EXPECT_EQ(again.serialize(), c.serialize());
  EXPECT_EQ(config_hash(again), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, HashTracksEverySetting) {
  PipelineConfig a, b;
  b.set("k", "251");
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a), config_hash(PipelineConfig{}));
}

TEST(Config, RejectsUnknownKeysBadValuesAndKeys) {
  EXPECT_THROW(parse_config("bogus = 1\n"), Error);
  EXPECT_THROW(parse_config("k = many\n"), Error);
  EXPECT_THROW(parse_config("k\n"), Error);
  EXPECT_THROW(parse_config("llm_api_key = secret\n"), Error);
  EXPECT_THROW(parse_config("input.Reddit = x\n"), Error);
  auto c = parse_config("input.CaSiNo = a.jsonl\n", "/base");
  EXPECT_EQ(c.inputs.at(DatasetId::CaSiNo), fs::path("/base/a.jsonl"));
}

TEST(Pipeline, ZeroKProducesNoRequests) {
  auto cfg = mini();
  cfg.k = 0;
  MockLlmClient client;
  HashingEmbeddings emb;
  auto dir = fresh_dir("k0");
  auto m = run_pipeline(cfg, client, emb, dir);
  EXPECT_EQ(client.calls(), 0u);
  EXPECT_EQ(m.generation.total().attempts, 0u);
  EXPECT_EQ(m.postproc.total.kept, 0u);
  EXPECT_TRUE(m.conserved());
  EXPECT_FALSE(fs::exists(dir / ".partial"));
  fs::remove_all(dir);
}

TEST(Pipeline, UnreachableBackendAbortsAtDomainMap) {
  auto cfg = mini();
  cfg.generation.max_retries = 1;
  MockLlmClient client(MockLlmClient::every(MockFault::TransportError, 1));
  HashingEmbeddings emb;
  auto dir = fresh_dir("unreachable");
  try {
    run_pipeline(cfg, client, emb, dir);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "domain-map");
  }
  ASSERT_TRUE(fs::exists(dir / ".partial"));
  EXPECT_NE(slurp(dir / ".partial").find("domain-map"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "seed.dlg.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "gnome.dlg.jsonl"));
  fs::remove_all(dir);
}

TEST(Pipeline, MissingInputAbortsAtIngest) {
  auto cfg = mini();
  cfg.inputs[DatasetId::JobInterview] = "/nonexistent/file.jsonl";
  MockLlmClient client;
  HashingEmbeddings emb;
  auto dir = fresh_dir("missing");
  try {
    run_pipeline(cfg, client, emb, dir);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
  EXPECT_TRUE(fs::exists(dir / ".partial"));
  fs::remove_all(dir);
}

TEST(Pipeline, RerunsAreByteIdentical) {
  auto cfg = mini();
  const char* files[] = {"seed.dlg.jsonl", "generated.dlg.jsonl", "gnome.dlg.jsonl", "domains.tsv",
                         "manifest.json"};
  std::vector<std::string> first;
  for (int run = 0; run < 2; ++run) {
    MockLlmClient client;
    HashingEmbeddings emb;
    auto dir = fresh_dir("repro" + std::to_string(run));
    auto cfg_run = cfg;
    cfg_run.generation.max_in_flight = run == 0 ? 1 : 8;
    run_pipeline(cfg_run, client, emb, dir);
    for (std::size_t i = 0; i < std::size(files); ++i) {
      auto text = slurp(dir / files[i]);
      if (run == 0) {
        first.push_back(text);
      } else if (std::string(files[i]) != "manifest.json") {
        EXPECT_EQ(text, first[i]) << files[i];
      }
    }
    fs::remove_all(dir);
  }
}

}  // namespace
}  // namespace gnome
