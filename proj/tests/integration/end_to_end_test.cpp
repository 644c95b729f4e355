#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gnome/corpus.hpp"
#include "gnome/pipeline.hpp"

namespace gnome {
namespace {

namespace fs = std::filesystem;

struct MiniRun {
  RunManifest manifest;
  fs::path dir;
  double seconds = 0;
};

const MiniRun& mini_run() {
  static const MiniRun run = [] {
    MiniRun r;
    r.dir = fs::temp_directory_path() / "gnome_e2e_mini";
    fs::remove_all(r.dir);
    auto cfg = load_config(fs::path(GNOME_MINI_DIR) / "mini.conf");
    MockLlmClient client;
    HashingEmbeddings emb;
    auto t0 = std::chrono::steady_clock::now();
    r.manifest = run_pipeline(cfg, client, emb, r.dir);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }();
  return run;
}

TEST(MiniRun, AttemptCountAndRuntime) {
  const auto& r = mini_run();
  EXPECT_EQ(r.manifest.generation.total().attempts, 48u);
  EXPECT_LT(r.seconds, 5.0);
  EXPECT_EQ(r.manifest.completed_stages.size(), 7u);
  EXPECT_FALSE(fs::exists(r.dir / ".partial"));
}

TEST(MiniRun, CountsAreConserved) {
  const auto& m = mini_run().manifest;
  const auto t = m.generation.total();
  const auto& p = m.postproc.total;
  EXPECT_EQ(t.failed() + p.dropped_short + p.duplicates_removed + p.leakage_removed + p.kept, 48u);
  EXPECT_EQ(t.successes, m.generated);
  EXPECT_EQ(p.input, m.generated);
  EXPECT_TRUE(m.conserved());
}

TEST(MiniRun, KeptDialoguesMirrorTheirSeed) {
  const auto& r = mini_run();
  auto seed = seed_from_corpus(read_corpus_file((r.dir / "seed.dlg.jsonl").string(), std::nullopt));
  auto gnome = read_corpus_file((r.dir / "gnome.dlg.jsonl").string(), std::nullopt);
  EXPECT_EQ(gnome.stage, Stage::Postprocessed);
  ASSERT_EQ(gnome.dialogues.size(), r.manifest.postproc.total.kept);
  ASSERT_FALSE(gnome.dialogues.empty());
  for (const auto& d : gnome.dialogues) {
    ASSERT_TRUE(d.provenance);
    const auto* s = seed.find(d.provenance->seed_source, d.provenance->seed_id);
    ASSERT_NE(s, nullptr) << d.id;
    ASSERT_EQ(d.utterances.size(), s->utterances.size()) << d.id;
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      EXPECT_EQ(canonical_labels(d.utterances[i]), canonical_labels(s->utterances[i]));
    }
    EXPECT_NE(normalized_text(d), normalized_text(*s));
  }
}

TEST(MiniRun, ManifestIsValidJson) {
  std::ifstream in(mini_run().dir / "manifest.json");
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
}

#ifdef GNOME_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(GNOME_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const auto root = fs::temp_directory_path() / "gnome_cli_runs";
  fs::remove_all(root);
  const std::string conf = std::string(GNOME_MINI_DIR) + "/mini.conf";
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("run-all --config " + conf + " --output-root " + root.string()), 0);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  EXPECT_EQ(run_cli("run-all --config " + conf + " --set bogus=1"), 1);
  EXPECT_EQ(run_cli("run-all --config " + conf + " --output-root " + root.string() +
                    " --set llm_backend=http --set llm_endpoint=http://127.0.0.1:1 --set max_retries=0"),
            2);
  std::size_t partial = 0, complete = 0;
  for (const auto& e : fs::directory_iterator(root)) {
    (fs::exists(e.path() / ".partial") ? partial : complete) += 1;
  }
  EXPECT_EQ(partial, 1u);
  EXPECT_EQ(complete, 1u);
  fs::remove_all(root);
}

TEST(Cli, StageCommandsChain) {
  const auto dir = fs::temp_directory_path() / "gnome_cli_stages";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string() + "/";
  const std::string mini = std::string(GNOME_MINI_DIR) + "/";
  std::string inputs;
  for (const char* src : {"CaSiNo", "CraigslistBargain", "JobInterview", "PersuasionForGood"}) {
    ASSERT_EQ(run_cli(std::string("ingest --dataset ") + src + " --input " + mini + src +
                      ".dlg.jsonl --output " + d + src + ".raw.jsonl"),
              0);
    ASSERT_EQ(run_cli(std::string("map-labels --input ") + d + src + ".raw.jsonl --output " + d + src +
                      ".mapped.jsonl"),
              0);
    inputs += " --input " + d + src + ".mapped.jsonl";
  }
  ASSERT_EQ(run_cli("build-seed" + inputs + " -k 2 --output " + d + "seed.jsonl"), 0);
  ASSERT_EQ(run_cli("generate --seed " + d + "seed.jsonl -n 2 --backoff-ms 1 --output " + d + "gen.jsonl"), 0);
  ASSERT_EQ(run_cli("postprocess --generated " + d + "gen.jsonl --seed " + d + "seed.jsonl --output " + d +
                    "gnome.jsonl"),
            0);
  EXPECT_EQ(run_cli("analyze --input " + d + "gnome.jsonl"), 0);
  EXPECT_EQ(run_cli("sample-pairs --seed " + d + "seed.jsonl --generated " + d + "gnome.jsonl -m 4 --output " +
                    d + "pairs.jsonl"),
            0);
  EXPECT_EQ(run_cli("sample-pairs --seed " + d + "seed.jsonl --generated " + d + "gnome.jsonl -m 999 --output " +
                    d + "pairs2.jsonl"),
            2);
  EXPECT_EQ(run_cli("build-seed --input " + d + "missing.jsonl -k 2 --output " + d + "x.jsonl"), 1);
  EXPECT_EQ(run_cli("build-seed --input " + mini + "mini.conf -k 2 --output " + d + "x.jsonl"), 2);
  fs::remove_all(dir);
}
#endif

}  // namespace
}  // namespace gnome
