#include "gnome/domainmap.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <tuple>

#include "gnome/random.hpp"
#include "gnome/text.hpp"

namespace gnome {

namespace detail {
extern const std::string_view kSystemTemplate;
extern const std::string_view kUserTemplate;
}  // namespace detail

namespace {

constexpr std::string_view kDialoguePlaceholder = "{dialogue}";
constexpr std::string_view kDomainHeader = "NEW_DOMAIN";
constexpr std::string_view kEos = "[EOS]";

std::string fold_newlines(std::string_view text) {
  std::string out(text);
  std::replace(out.begin(), out.end(), '\n', ' ');
  std::replace(out.begin(), out.end(), '\r', ' ');
  return out;
}

// Models often mirror the `A: ` prefix used in the prompt.
std::string_view strip_speaker_tag(std::string_view s) {
  if (s.size() >= 2 && (s[0] == 'A' || s[0] == 'B') && s[1] == ':') return trim(s.substr(2));
  return s;
}

}  // namespace

std::string_view system_template() { return detail::kSystemTemplate; }
std::string_view user_template() { return detail::kUserTemplate; }

std::string render_dialogue(const Dialogue& d) {
  std::string out;
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    if (i) out += '\n';
    out += to_string(d.utterances[i].speaker);
    out += ": ";
    out += fold_newlines(d.utterances[i].text);
  }
  return out;
}

Prompt build_prompt(const Dialogue& d) {
  if (d.utterances.empty()) throw PreconditionError("cannot build a prompt for an empty dialogue");
  Prompt p;
  p.system = std::string(system_template());
  std::string_view tmpl = user_template();
  auto pos = tmpl.find(kDialoguePlaceholder);
  p.user.assign(tmpl.substr(0, pos));
  p.user += render_dialogue(d);
  p.user.append(tmpl.substr(pos + kDialoguePlaceholder.size()));
  return p;
}

std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::MissingDomainHeader: return "MissingDomainHeader";
    case FailureKind::MisplacedEos: return "MisplacedEos";
    case FailureKind::EmptyGeneration: return "EmptyGeneration";
    case FailureKind::TransportError: return "TransportError";
    case FailureKind::ModelError: return "ModelError";
  }
  return "?";
}

std::variant<ParsedGeneration, FailureKind> parse_generation(std::string_view raw,
                                                             std::size_t expected_count) {
  if (expected_count == 0) throw PreconditionError("expected_count must be at least 1");
  if (trim(raw).empty()) return FailureKind::EmptyGeneration;

  auto header = raw.find(kDomainHeader);
  if (header == std::string_view::npos) return FailureKind::MissingDomainHeader;
  auto p = header + kDomainHeader.size();
  // Accept both NEW_DOMAIN{x} and the doubled-brace form NEW_DOMAIN{{x}}.
  if (p >= raw.size() || raw[p] != '{') return FailureKind::MissingDomainHeader;
  while (p < raw.size() && raw[p] == '{') ++p;
  auto close = raw.find('}', p);
  if (close == std::string_view::npos) return FailureKind::MissingDomainHeader;
  ParsedGeneration out;
  out.domain_title = std::string(trim(raw.substr(p, close - p)));
  if (out.domain_title.empty()) return FailureKind::MissingDomainHeader;
  p = close;
  while (p < raw.size() && raw[p] == '}') ++p;

  std::string_view body = raw.substr(p);
  std::size_t start = 0;
  while (start <= body.size()) {
    auto eos = body.find(kEos, start);
    auto end = eos == std::string_view::npos ? body.size() : eos;
    auto segment = strip_speaker_tag(trim(body.substr(start, end - start)));
    if (!segment.empty()) out.utterances.emplace_back(segment);
    if (eos == std::string_view::npos) break;
    start = eos + kEos.size();
  }
  if (out.utterances.empty()) return FailureKind::EmptyGeneration;
  if (out.utterances.size() != expected_count) return FailureKind::MisplacedEos;
  return out;
}

std::size_t SourceTally::failed() const {
  std::size_t n = 0;
  for (auto f : failures) n += f;
  return n;
}

SourceTally& SourceTally::operator+=(const SourceTally& o) {
  attempts += o.attempts;
  successes += o.successes;
  retries += o.retries;
  for (std::size_t i = 0; i < kNumFailureKinds; ++i) failures[i] += o.failures[i];
  return *this;
}

SourceTally GenerationReport::total() const {
  SourceTally t;
  for (const auto& [_, s] : per_source) t += s;
  return t;
}

std::uint64_t request_seed(std::uint64_t master, DatasetId source, std::string_view seed_id,
                           std::size_t generation_index) {
  auto h = fnv1a64(seed_id, fnv1a64(to_string(source)));
  return mix64(mix64(master) ^ h ^ mix64(static_cast<std::uint64_t>(generation_index)));
}

Dialogue make_mapped_dialogue(const Dialogue& seed_dialogue, const ParsedGeneration& parsed,
                              std::size_t generation_index) {
  if (parsed.utterances.size() != seed_dialogue.utterances.size()) {
    throw PreconditionError("generated utterance count does not match the seed dialogue");
  }
  Dialogue d;
  d.id = std::string(to_string(seed_dialogue.source)) + "/" + seed_dialogue.id + "/g" +
         std::to_string(generation_index);
  d.source = DatasetId::Gnome;
  d.complete = true;
  for (std::size_t i = 0; i < parsed.utterances.size(); ++i) {
    const auto& s = seed_dialogue.utterances[i];
    d.utterances.push_back({s.speaker, parsed.utterances[i], s.labels});
  }
  d.provenance = Provenance{seed_dialogue.id, seed_dialogue.source, generation_index,
                            parsed.domain_title};
  return d;
}

namespace {

struct Job {
  const Dialogue* seed;
  const Prompt* prompt;
  std::size_t generation_index;
};

struct Outcome {
  std::optional<Dialogue> dialogue;
  std::optional<FailureKind> failure;
  std::size_t retries = 0;
};

Outcome run_job(LlmClient& client, const Job& job, const GenerationParams& params) {
  CompletionRequest req{job.prompt->system, job.prompt->user, params.temperature,
                        request_seed(params.rng_seed, job.seed->source, job.seed->id,
                                     job.generation_index)};
  Outcome out;
  std::string text;
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      text = client.complete(req);
      break;
    } catch (const LlmError& e) {
      if (!e.retryable() || attempt >= params.max_retries) {
        out.failure = e.kind() == LlmError::Kind::Transport ? FailureKind::TransportError
                                                            : FailureKind::ModelError;
        return out;
      }
      ++out.retries;
      auto shift = std::min<std::size_t>(attempt, 30);
      auto delay = params.backoff_initial * (std::int64_t{1} << shift);
      std::this_thread::sleep_for(std::min(delay, params.backoff_max));
    } catch (const std::exception&) {
      out.failure = FailureKind::ModelError;
      return out;
    }
  }
  auto parsed = parse_generation(text, job.seed->utterances.size());
  if (auto* failure = std::get_if<FailureKind>(&parsed)) {
    out.failure = *failure;
    return out;
  }
  out.dialogue = make_mapped_dialogue(*job.seed, std::get<ParsedGeneration>(parsed),
                                      job.generation_index);
  return out;
}

}  // namespace

DomainMappingResult run_domain_mapping(LlmClient& client, const SeedDataset& seed,
                                       const GenerationParams& params) {
  if (params.n_passes == 0) throw PreconditionError("n_passes must be at least 1");

  std::vector<const Dialogue*> seeds;
  for (const auto& [_, list] : seed.per_source) {
    for (const auto& sd : list) seeds.push_back(&sd.dialogue);
  }
  std::vector<Prompt> prompts;
  prompts.reserve(seeds.size());
  for (const auto* d : seeds) prompts.push_back(build_prompt(*d));

  std::vector<Job> jobs;
  jobs.reserve(seeds.size() * params.n_passes);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t g = 1; g <= params.n_passes; ++g) jobs.push_back({seeds[i], &prompts[i], g});
  }

  // Each job owns its outcome slot, so the tally below is schedule-independent.
  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      outcomes[i] = run_job(client, jobs[i], params);
    }
  };
  const auto workers = std::max<std::size_t>(1, std::min(params.max_in_flight, jobs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  DomainMappingResult result;
  result.generated.dataset = DatasetId::Gnome;
  result.generated.stage = Stage::Generated;
  for (const auto& [source, _] : seed.per_source) result.report.per_source[source];
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& tally = result.report.per_source[jobs[i].seed->source];
    auto& o = outcomes[i];
    ++tally.attempts;
    tally.retries += o.retries;
    if (o.dialogue) {
      ++tally.successes;
      result.generated.dialogues.push_back(std::move(*o.dialogue));
    } else {
      ++tally.failures[static_cast<std::size_t>(*o.failure)];
    }
  }
  std::sort(result.generated.dialogues.begin(), result.generated.dialogues.end(),
            [](const Dialogue& a, const Dialogue& b) {
              const auto& pa = *a.provenance;
              const auto& pb = *b.provenance;
              return std::tie(pa.seed_id, pa.generation_index, pa.seed_source) <
                     std::tie(pb.seed_id, pb.generation_index, pb.seed_source);
            });
  return result;
}

}  // namespace gnome
