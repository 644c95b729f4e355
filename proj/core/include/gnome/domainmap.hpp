#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gnome/corpus.hpp"
#include "gnome/llm_client.hpp"
#include "gnome/seedselect.hpp"

namespace gnome {

struct GenerationParams {
  double temperature = 1.0;
  std::size_t n_passes = 10;
  std::size_t max_retries = 3;
  std::chrono::milliseconds request_timeout{120000};
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{30000};
  // Master seed; every request gets its own seed derived from it.
  std::uint64_t rng_seed = 1;
};

// Checked-in prompt assets, byte for byte.
std::string_view system_template();
std::string_view user_template();

struct Prompt {
  std::string system;
  std::string user;
  bool operator==(const Prompt&) const = default;
};

// One line per utterance, `<speaker>: <text>`, with internal newlines folded.
std::string render_dialogue(const Dialogue& d);

// Substitutes the rendered dialogue for `{dialogue}` in the user template.
Prompt build_prompt(const Dialogue& d);

enum class FailureKind : std::uint8_t {
  MissingDomainHeader,
  MisplacedEos,
  EmptyGeneration,
  TransportError,
  ModelError,
};
inline constexpr std::size_t kNumFailureKinds = 5;
std::string_view to_string(FailureKind k);

struct ParsedGeneration {
  std::string domain_title;
  std::vector<std::string> utterances;
  bool operator==(const ParsedGeneration&) const = default;
};

// Title from the first NEW_DOMAIN{...} group; utterances are the trimmed,
// nonempty [EOS]-delimited segments after it. Only the three parse kinds of
// FailureKind are returned.
std::variant<ParsedGeneration, FailureKind> parse_generation(std::string_view raw,
                                                             std::size_t expected_count);

struct SourceTally {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  std::size_t retries = 0;
  std::array<std::size_t, kNumFailureKinds> failures{};

  std::size_t failed() const;
  SourceTally& operator+=(const SourceTally& o);
};

struct GenerationReport {
  std::map<DatasetId, SourceTally> per_source;
  SourceTally total() const;
};

struct DomainMappingResult {
  Corpus generated;  // dataset Gnome, stage generated, sorted by (seed_id, generation_index)
  GenerationReport report;
};

// Derived per-request seed; a pure function of its inputs.
std::uint64_t request_seed(std::uint64_t master, DatasetId source, std::string_view seed_id,
                           std::size_t generation_index);

// Issues n_passes whole-dialogue requests per seed dialogue. Transport and
// model errors are retried with exponential backoff; parse failures are
// recorded and never retried. Nothing is thrown for per-request failures.
DomainMappingResult run_domain_mapping(LlmClient& client, const SeedDataset& seed,
                                       const GenerationParams& params);

// Builds the generated dialogue for one successful response.
Dialogue make_mapped_dialogue(const Dialogue& seed_dialogue, const ParsedGeneration& parsed,
                              std::size_t generation_index);

}  // namespace gnome
