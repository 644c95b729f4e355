#include "gnome/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gnome/labelmap.hpp"
#include "gnome/text.hpp"

namespace gnome {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error("config key '" + std::string(key) + "': bad number '" + std::string(value) + "'");
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path resolve(std::string_view value, const fs::path& base) {
  fs::path p{std::string(value)};
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
  using std::chrono::milliseconds;
  auto ms = [&] { return milliseconds(parse_number<std::int64_t>(key, value)); };
  if (key.starts_with("input.")) {
    auto id = parse_dataset(key.substr(6));
    if (!id || *id == DatasetId::Gnome) throw Error("config key '" + std::string(key) + "': unknown source");
    inputs[*id] = resolve(value, base);
  } else if (key == "output_root") {
    output_root = resolve(value, base);
  } else if (key == "k") {
    k = parse_number<std::size_t>(key, value);
  } else if (key == "scope") {
    if (value == "per-source") {
      scope = FrequencyScope::PerSource;
    } else if (value == "pooled") {
      scope = FrequencyScope::Pooled;
    } else {
      throw Error("config key 'scope' must be per-source or pooled");
    }
  } else if (key == "n") {
    generation.n_passes = parse_number<std::size_t>(key, value);
  } else if (key == "temperature") {
    generation.temperature = parse_number<double>(key, value);
  } else if (key == "max_retries") {
    generation.max_retries = parse_number<std::size_t>(key, value);
  } else if (key == "max_in_flight") {
    generation.max_in_flight = parse_number<std::size_t>(key, value);
    if (generation.max_in_flight == 0) throw Error("config key 'max_in_flight' must be positive");
  } else if (key == "request_timeout_ms") {
    generation.request_timeout = ms();
    llm.timeout = generation.request_timeout;
  } else if (key == "backoff_initial_ms") {
    generation.backoff_initial = ms();
  } else if (key == "backoff_max_ms") {
    generation.backoff_max = ms();
  } else if (key == "rng_seed") {
    generation.rng_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "cluster_threshold") {
    cluster_threshold = parse_number<double>(key, value);
    if (!(cluster_threshold > 0.0 && cluster_threshold < 1.0)) {
      throw Error("config key 'cluster_threshold' must lie in (0, 1)");
    }
  } else if (key == "split_ratio") {
    split_ratio = parse_number<double>(key, value);
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error("config key 'split_ratio' must lie in (0, 1)");
  } else if (key == "split_seed") {
    split_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "sample_pairs") {
    sample_pairs = parse_number<std::size_t>(key, value);
  } else if (key == "sample_seed") {
    sample_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "llm_backend") {
    if (value != "mock" && value != "http") throw Error("config key 'llm_backend' must be mock or http");
    llm_backend = std::string(value);
  } else if (key == "llm_endpoint") {
    llm.endpoint = std::string(value);
  } else if (key == "llm_path") {
    llm.path = std::string(value);
  } else if (key == "llm_model") {
    llm.model = std::string(value);
  } else if (key == "llm_max_tokens") {
    llm.max_tokens = parse_number<int>(key, value);
  } else if (key == "embeddings") {
    if (value != "hashing" && value != "file" && value != "http") {
      throw Error("config key 'embeddings' must be hashing, file or http");
    }
    embeddings = std::string(value);
  } else if (key == "embeddings_file") {
    embeddings_file = resolve(value, base);
  } else if (key == "embeddings_endpoint") {
    embeddings_endpoint = std::string(value);
  } else if (key == "embeddings_model") {
    embeddings_model = std::string(value);
  } else if (key == "llm_api_key") {
    throw Error("the LLM credential is read from the " + std::string(kApiKeyEnv) +
                " environment variable, not from configuration");
  } else {
    throw Error("unknown config key '" + std::string(key) + "'");
  }
}

std::string PipelineConfig::serialize() const {
  std::map<std::string, std::string> kv;
  for (const auto& [id, p] : inputs) kv["input." + std::string(to_string(id))] = p.string();
  kv["output_root"] = output_root.string();
  kv["k"] = std::to_string(k);
  kv["scope"] = scope == FrequencyScope::PerSource ? "per-source" : "pooled";
  kv["n"] = std::to_string(generation.n_passes);
  kv["temperature"] = fmt_double(generation.temperature);
  kv["max_retries"] = std::to_string(generation.max_retries);
  kv["max_in_flight"] = std::to_string(generation.max_in_flight);
  kv["request_timeout_ms"] = std::to_string(generation.request_timeout.count());
  kv["backoff_initial_ms"] = std::to_string(generation.backoff_initial.count());
  kv["backoff_max_ms"] = std::to_string(generation.backoff_max.count());
  kv["rng_seed"] = std::to_string(generation.rng_seed);
  kv["cluster_threshold"] = fmt_double(cluster_threshold);
  kv["split_ratio"] = fmt_double(split_ratio);
  kv["split_seed"] = std::to_string(split_seed);
  kv["sample_pairs"] = std::to_string(sample_pairs);
  kv["sample_seed"] = std::to_string(sample_seed);
  kv["llm_backend"] = llm_backend;
  kv["llm_endpoint"] = llm.endpoint;
  kv["llm_path"] = llm.path;
  kv["llm_model"] = llm.model;
  kv["llm_max_tokens"] = std::to_string(llm.max_tokens);
  kv["embeddings"] = embeddings;
  kv["embeddings_file"] = embeddings_file.string();
  kv["embeddings_endpoint"] = embeddings_endpoint;
  kv["embeddings_model"] = embeddings_model;
  std::string out;
  for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
  return out;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base) {
  PipelineConfig c;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "empty key");
    try {
      c.set(key, trim(line.substr(eq + 1)), base);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string config_hash(const PipelineConfig& c) { return to_hex(fnv1a64(c.serialize())); }

bool RunManifest::conserved() const {
  std::size_t seed_total = 0;
  for (const auto& [_, s] : sources) {
    if (s.filtered_out + s.dialogues_emptied + s.mapped != s.ingested) return false;
    if (s.seed > s.mapped) return false;
    seed_total += s.seed;
  }
  const auto t = generation.total();
  if (t.attempts != seed_total * n_passes) return false;
  if (t.successes + t.failed() != t.attempts) return false;
  if (generated != t.successes) return false;
  if (postproc.total.input != generated || !postproc.total.conserved()) return false;
  for (const auto& [_, p] : postproc.per_source) {
    if (!p.conserved()) return false;
  }
  return true;
}

namespace {

json label_json(const LabelCounts& c) {
  json j = json::object();
  for (auto l : kAllLabels) j[std::string(to_string(l))] = c[index_of(l)];
  return j;
}

json tally_json(const SourceTally& t) {
  json f = json::object();
  for (std::size_t i = 0; i < kNumFailureKinds; ++i) {
    f[std::string(to_string(static_cast<FailureKind>(i)))] = t.failures[i];
  }
  return {{"attempts", t.attempts}, {"successes", t.successes}, {"retries", t.retries}, {"failures", f}};
}

json postproc_json(const PostprocCounts& p) {
  return {{"input", p.input},
          {"dropped_short", p.dropped_short},
          {"duplicates_removed", p.duplicates_removed},
          {"leakage_removed", p.leakage_removed},
          {"kept", p.kept}};
}

}  // namespace

std::string RunManifest::to_json() const {
  json src = json::object();
  for (const auto& [id, s] : sources) {
    src[std::string(to_string(id))] = {{"ingested", s.ingested},
                                       {"filtered_out", s.filtered_out},
                                       {"utterances_excluded", s.utterances_excluded},
                                       {"dialogues_emptied", s.dialogues_emptied},
                                       {"mapped", s.mapped},
                                       {"seed", s.seed}};
  }
  json gen_src = json::object();
  for (const auto& [id, t] : generation.per_source) gen_src[std::string(to_string(id))] = tally_json(t);
  json pp_src = json::object();
  for (const auto& [id, p] : postproc.per_source) pp_src[std::string(to_string(id))] = postproc_json(p);

  json j = {{"config_hash", config_hash},
            {"completed_stages", completed_stages},
            {"sources", src},
            {"unmapped_tokens", unmapped_tokens},
            {"warnings", warnings},
            {"generation",
             {{"n_passes", n_passes}, {"total", tally_json(generation.total())}, {"per_source", gen_src}}},
            {"generated", generated},
            {"postprocess", {{"total", postproc_json(postproc.total)}, {"per_source", pp_src}}},
            {"analysis",
             {{"domain_titles", domain_titles},
              {"domain_count", domain_count},
              {"original_labels", label_json(original_labels)},
              {"gnome_labels", label_json(gnome_labels)}}},
            {"conserved", conserved()}};
  return j.dump(2);
}

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + p.string());
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config, LlmClient& client, EmbeddingProvider& embedder,
                         const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto marker = out_dir / ".partial";
  write_text(marker, "running\n");
  write_text(out_dir / "config.txt", config.serialize());

  RunManifest m;
  m.config_hash = config_hash(config);
  m.n_passes = config.generation.n_passes;

  auto stage = [&](const char* name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      write_text(marker, std::string("failed stage: ") + name + "\ncause: " + e.what() + "\n");
      write_text(out_dir / "manifest.json", m.to_json());
      throw StageError(name, e.what());
    }
    m.completed_stages.emplace_back(name);
  };

  std::map<DatasetId, Corpus> corpora;
  stage("ingest", [&] {
    for (auto id : kSourceDatasets) {
      auto it = config.inputs.find(id);
      if (it == config.inputs.end()) throw Error("no input configured for " + std::string(to_string(id)));
      corpora[id] = read_corpus_file(it->second.string(), id);
      m.sources[id].ingested = corpora[id].dialogues.size();
    }
  });

  stage("filter", [&] {
    for (auto& [id, c] : corpora) {
      auto r = filter_incomplete(c);
      m.sources[id].filtered_out = r.removed;
      c = std::move(r.corpus);
    }
  });

  stage("map-labels", [&] {
    std::ofstream unmapped(out_dir / "unmapped.tsv", std::ios::binary);
    for (auto& [id, c] : corpora) {
      auto r = map_corpus(c);
      auto& s = m.sources[id];
      s.utterances_excluded = r.utterances_excluded;
      s.dialogues_emptied = r.dialogues_emptied;
      s.mapped = r.corpus.dialogues.size();
      for (const auto& t : r.unmapped) m.unmapped_tokens.push_back(std::string(to_string(id)) + ":" + t);
      for (const auto& e : r.report) {
        unmapped << to_string(id) << '\t' << e.dialogue_id << '\t' << e.utterance_index << '\t' << e.token
                 << '\n';
      }
      c = std::move(r.corpus);
      write_corpus_file(c, (out_dir / ("mapped." + std::string(to_string(id)) + ".dlg.jsonl")).string());
      const auto h = label_histogram(c);
      for (std::size_t l = 0; l < kNumLabels; ++l) m.original_labels[l] += h[l];
    }
  });

  SeedDataset seed;
  stage("build-seed", [&] {
    seed = select_seed(corpora, config.k, config.scope);
    for (const auto& [id, list] : seed.per_source) m.sources[id].seed = list.size();
    m.warnings.insert(m.warnings.end(), seed.warnings.begin(), seed.warnings.end());
    write_corpus_file(seed.to_corpus(), (out_dir / "seed.dlg.jsonl").string());
    std::ofstream manifest(out_dir / "seed_manifest.tsv", std::ios::binary);
    write_seed_manifest(seed, manifest);
  });

  Corpus generated;
  stage("domain-map", [&] {
    auto r = run_domain_mapping(client, seed, config.generation);
    m.generation = r.report;
    m.generated = r.generated.dialogues.size();
    generated = std::move(r.generated);
    write_corpus_file(generated, (out_dir / "generated.dlg.jsonl").string());
    const auto t = m.generation.total();
    const auto transport = t.failures[static_cast<std::size_t>(FailureKind::TransportError)];
    if (t.attempts > 0 && transport == t.attempts) {
      throw Error("all " + std::to_string(t.attempts) + " requests failed with transport errors");
    }
  });

  Corpus gnome;
  stage("postprocess", [&] {
    auto r = postprocess(generated, seed);
    m.postproc = r.report;
    gnome = std::move(r.corpus);
    write_corpus_file(gnome, (out_dir / "gnome.dlg.jsonl").string());
  });

  stage("analyze", [&] {
    m.gnome_labels = label_histogram(gnome);
    auto titles = domain_titles(gnome);
    m.domain_titles = titles.size();
    std::ofstream out(out_dir / "domains.tsv", std::ios::binary);
    if (titles.empty()) return;
    auto clusters = cluster_domain_titles(titles, embedder, config.cluster_threshold);
    m.domain_count = clusters.cluster_count();
    for (std::size_t i = 0; i < clusters.titles.size(); ++i) {
      out << clusters.titles[i] << '\t' << clusters.cluster_of[i] << '\n';
    }
  });

  write_text(out_dir / "manifest.json", m.to_json() + "\n");
  fs::remove(marker);
  return m;
}

}  // namespace gnome
