#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gnome/analysis.hpp"
#include "gnome/domainmap.hpp"
#include "gnome/error.hpp"
#include "gnome/llm_client.hpp"
#include "gnome/postproc.hpp"
#include "gnome/seedselect.hpp"

namespace gnome {

struct PipelineConfig {
  std::map<DatasetId, std::filesystem::path> inputs;  // raw corpus per source
  std::filesystem::path output_root = "runs";

  std::size_t k = 250;
  FrequencyScope scope = FrequencyScope::PerSource;
  GenerationParams generation;  // n_passes = 10, temperature = 1.0
  double cluster_threshold = 0.8;
  double split_ratio = 0.6;
  std::uint64_t split_seed = 0;
  std::size_t sample_pairs = 100;
  std::uint64_t sample_seed = 0;

  std::string llm_backend = "mock";  // mock | http
  HttpLlmConfig llm;                 // api_key comes from the environment only

  std::string embeddings = "hashing";  // hashing | file | http
  std::filesystem::path embeddings_file;
  std::string embeddings_endpoint;
  std::string embeddings_model;

  // Applies one `key = value` setting; throws gnome::Error on an unknown key
  // or a malformed value. Relative input paths resolve against `base`.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {});
  // Canonical `key = value` lines, sorted by key.
  std::string serialize() const;
};

// `key = value` lines; `#` starts a comment.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base = {});
PipelineConfig load_config(const std::filesystem::path& path);

// 16 hex digits over the canonical serialization.
std::string config_hash(const PipelineConfig& c);

inline constexpr std::string_view kApiKeyEnv = "GNOME_LLM_API_KEY";

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage " + stage + " failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct SourceCounts {
  std::size_t ingested = 0;
  std::size_t filtered_out = 0;
  std::size_t utterances_excluded = 0;
  std::size_t dialogues_emptied = 0;
  std::size_t mapped = 0;
  std::size_t seed = 0;
};

struct RunManifest {
  std::string config_hash;
  std::vector<std::string> completed_stages;
  std::map<DatasetId, SourceCounts> sources;
  std::vector<std::string> unmapped_tokens;
  std::vector<std::string> warnings;
  std::size_t n_passes = 0;
  GenerationReport generation;
  std::size_t generated = 0;
  PostprocReport postproc;
  std::size_t domain_titles = 0;
  std::size_t domain_count = 0;
  LabelCounts original_labels{};
  LabelCounts gnome_labels{};

  // Stage-to-stage count identities.
  bool conserved() const;
  std::string to_json() const;
};

// ingest -> filter -> map labels -> seed -> domain map -> post-process ->
// analyze, writing every artifact under `out_dir`. While it runs, and after a
// failure, `out_dir/.partial` exists; failures surface as StageError.
RunManifest run_pipeline(const PipelineConfig& config, LlmClient& client, EmbeddingProvider& embedder,
                         const std::filesystem::path& out_dir);

}  // namespace gnome
