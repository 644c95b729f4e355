#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>

#include "gnome/analysis.hpp"
#include "gnome/baseline.hpp"
#include "gnome/corpus.hpp"
#include "gnome/domainmap.hpp"
#include "gnome/evalharness.hpp"
#include "gnome/humaneval.hpp"
#include "gnome/labelmap.hpp"
#include "gnome/llm_client.hpp"
#include "gnome/pipeline.hpp"
#include "gnome/postproc.hpp"
#include "gnome/seedselect.hpp"

namespace gnome::cli {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::optional<DatasetId> dataset_option(const std::string& tag) {
  if (tag.empty()) return std::nullopt;
  auto id = parse_dataset(tag);
  if (!id) throw CLI::ValidationError("--dataset", "unknown dataset tag '" + tag + "'");
  return id;
}

json label_counts_json(const LabelCounts& c) {
  json j = json::object();
  for (auto l : kAllLabels) j[std::string(to_string(l))] = c[index_of(l)];
  return j;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::unique_ptr<LlmClient> make_client(const std::string& backend, HttpLlmConfig cfg) {
  if (backend == "mock") return std::make_unique<MockLlmClient>();
  if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str())) cfg.api_key = key;
  return std::make_unique<HttpLlmClient>(std::move(cfg));
}

std::unique_ptr<EmbeddingProvider> make_embedder(const PipelineConfig& c) {
  if (c.embeddings == "file") {
    return std::make_unique<PrecomputedEmbeddings>(PrecomputedEmbeddings::load(c.embeddings_file.string()));
  }
  if (c.embeddings == "http") {
    const char* key = std::getenv(std::string(kApiKeyEnv).c_str());
    return std::make_unique<HttpEmbeddings>(c.embeddings_endpoint, c.embeddings_model, key ? key : "");
  }
  return std::make_unique<HashingEmbeddings>();
}

baseline::ContextWindow parse_context(const std::string& s) {
  if (s == "none") return baseline::ContextWindow::None;
  if (s == "previous") return baseline::ContextWindow::Previous;
  if (s == "full") return baseline::ContextWindow::Full;
  throw CLI::ValidationError("--context", "expected none, previous or full");
}

struct TrainFlags {
  double lr = 0.5;
  std::size_t iterations = 500;
  double l2 = 0.0;
  std::size_t min_count = 1;
  std::string context = "previous";

  void add(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "Learning rate")->capture_default_str();
    cmd->add_option("--iterations", iterations, "Gradient steps")->capture_default_str();
    cmd->add_option("--l2", l2, "L2 penalty")->capture_default_str();
    cmd->add_option("--min-count", min_count, "Vocabulary frequency cutoff")->capture_default_str();
    cmd->add_option("--context", context, "none | previous | full")->capture_default_str();
  }
  baseline::BaselineConfig config() const {
    baseline::BaselineConfig c;
    c.min_count = min_count;
    c.context = parse_context(context);
    c.train.learning_rate = lr;
    c.train.iterations = iterations;
    c.train.l2 = l2;
    return c;
  }
};

AgreementOptions agreement_options(const std::string& metric, const std::string& agreement) {
  AgreementOptions o;
  if (metric == "interval") {
    o.metric = AlphaMetric::Interval;
  } else if (metric == "ordinal") {
    o.metric = AlphaMetric::Ordinal;
  } else {
    throw CLI::ValidationError("--metric", "expected interval or ordinal");
  }
  if (agreement == "exact") {
    o.agreement = AgreementDefinition::AllExact;
  } else if (agreement == "pairwise") {
    o.agreement = AgreementDefinition::Pairwise;
  } else if (agreement == "within-one") {
    o.agreement = AgreementDefinition::WithinOne;
  } else {
    throw CLI::ValidationError("--agreement", "expected exact, pairwise or within-one");
  }
  return o;
}

std::string run_dir_name(const std::string& hash) {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return std::string(buf) + "-" + hash;
}

void ingest(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("ingest", "Validate a raw corpus and drop incomplete dialogues");
  struct Opts {
    std::string input, dataset, output;
    bool skip_bad = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->input, "Raw .dlg.jsonl file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dataset", o->dataset, "Expected source tag");
  cmd->add_option("--output", o->output, "Filtered corpus")->required();
  cmd->add_flag("--skip-bad", o->skip_bad, "Report malformed records instead of failing");
  cmd->callback([&selected, o] {
    selected = [o] {
      auto in = open_in(o->input);
      auto report = parse_corpus_collect(in, dataset_option(o->dataset));
      if (!o->skip_bad && !report.issues.empty()) {
        throw ParseError(report.issues.front().line, report.issues.front().message);
      }
      for (const auto& issue : report.issues) {
        std::cerr << o->input << ":" << issue.line << ": " << issue.message << '\n';
      }
      auto filtered = filter_incomplete(report.corpus);
      write_corpus_file(filtered.corpus, o->output);
      print({{"records", report.records},
             {"malformed", report.issues.size()},
             {"incomplete", filtered.removed},
             {"kept", filtered.corpus.dialogues.size()}});
      return 0;
    };
  });
}

void map_labels(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("map-labels", "Rewrite source strategy tokens into the five canonical labels");
  struct Opts {
    std::string input, output, unmapped, table;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->input, "Filtered raw corpus");
  cmd->add_option("--output", o->output, "Mapped corpus");
  cmd->add_option("--unmapped", o->unmapped, "TSV of excluded (dialogue, utterance, token) rows");
  cmd->add_option("--print-table", o->table, "Print the built-in table for a source and exit");
  cmd->callback([&selected, o] {
    selected = [o] {
      if (!o->table.empty()) {
        auto id = dataset_option(o->table);
        write_mapping_table(mapping_for(*id), std::cout);
        return 0;
      }
      if (o->input.empty() || o->output.empty()) {
        throw CLI::ValidationError("map-labels", "--input and --output are required");
      }
      auto c = read_corpus_file(o->input, std::nullopt);
      auto r = map_corpus(c);
      write_corpus_file(r.corpus, o->output);
      if (!o->unmapped.empty()) {
        auto out = open_out(o->unmapped);
        for (const auto& e : r.report) out << e.dialogue_id << '\t' << e.utterance_index << '\t' << e.token << '\n';
      }
      print({{"dialogues", r.corpus.dialogues.size()},
             {"utterances_excluded", r.utterances_excluded},
             {"dialogues_emptied", r.dialogues_emptied},
             {"unmapped_tokens", r.unmapped},
             {"labels", label_counts_json(tally_labels(r.corpus))}});
      return 0;
    };
  });
}

void build_seed(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("build-seed", "Select the k rarest-label dialogues per source");
  struct Opts {
    std::vector<std::string> inputs;
    std::size_t k = 250;
    std::string scope = "per-source";
    std::string output, manifest;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->inputs, "Mapped corpus per source")->required()->check(CLI::ExistingFile);
  cmd->add_option("-k", o->k, "Dialogues per source")->capture_default_str();
  cmd->add_option("--scope", o->scope, "per-source | pooled")->capture_default_str();
  cmd->add_option("--output", o->output, "Seed corpus")->required();
  cmd->add_option("--manifest", o->manifest, "TSV of (source, id, score)");
  cmd->callback([&selected, o] {
    selected = [o] {
      std::map<DatasetId, Corpus> corpora;
      for (const auto& path : o->inputs) {
        auto c = read_corpus_file(path, std::nullopt);
        if (!c.dataset) throw Error(path + ": corpus header names no dataset");
        if (!corpora.emplace(*c.dataset, std::move(c)).second) throw Error(path + ": source given twice");
      }
      FrequencyScope scope;
      if (o->scope == "per-source") {
        scope = FrequencyScope::PerSource;
      } else if (o->scope == "pooled") {
        scope = FrequencyScope::Pooled;
      } else {
        throw CLI::ValidationError("--scope", "expected per-source or pooled");
      }
      auto seed = select_seed(corpora, o->k, scope);
      write_corpus_file(seed.to_corpus(), o->output);
      if (!o->manifest.empty()) {
        auto out = open_out(o->manifest);
        write_seed_manifest(seed, out);
      }
      for (const auto& w : seed.warnings) std::cerr << "warning: " << w << '\n';
      json per = json::object();
      for (const auto& [id, list] : seed.per_source) per[std::string(to_string(id))] = list.size();
      print({{"seed", seed.size()}, {"per_source", per}});
      return 0;
    };
  });
}

struct LlmFlags {
  std::string backend = "mock";
  HttpLlmConfig http;
  void add(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "mock | http")->capture_default_str();
    cmd->add_option("--endpoint", http.endpoint, "Chat-completions base URL")->capture_default_str();
    cmd->add_option("--model", http.model, "Model name")->capture_default_str();
    cmd->add_option("--max-tokens", http.max_tokens, "Completion length cap")->capture_default_str();
  }
};

void generate(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("generate", "Domain-map every seed dialogue n times");
  struct Opts {
    std::string seed, output, report;
    GenerationParams params;
    std::int64_t backoff_ms = 500;
    LlmFlags llm;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--seed", o->seed, "Seed corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("--output", o->output, "Generated corpus")->required();
  cmd->add_option("--report", o->report, "Per-source attempt/failure JSON");
  cmd->add_option("-n", o->params.n_passes, "Generations per seed dialogue")->capture_default_str();
  cmd->add_option("--temperature", o->params.temperature)->capture_default_str();
  cmd->add_option("--rng-seed", o->params.rng_seed, "Master seed for per-request seeds")->capture_default_str();
  cmd->add_option("--max-retries", o->params.max_retries)->capture_default_str();
  cmd->add_option("--max-in-flight", o->params.max_in_flight)->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--backoff-ms", o->backoff_ms, "Initial retry backoff")->capture_default_str();
  o->llm.add(cmd);
  cmd->callback([&selected, o] {
    selected = [o] {
      if (o->llm.backend != "mock" && o->llm.backend != "http") {
        throw CLI::ValidationError("--backend", "expected mock or http");
      }
      o->params.backoff_initial = std::chrono::milliseconds(o->backoff_ms);
      auto seed = seed_from_corpus(read_corpus_file(o->seed, std::nullopt));
      auto client = make_client(o->llm.backend, o->llm.http);
      auto r = run_domain_mapping(*client, seed, o->params);
      write_corpus_file(r.generated, o->output);
      json per = json::object();
      for (const auto& [id, t] : r.report.per_source) {
        json f = json::object();
        for (std::size_t i = 0; i < kNumFailureKinds; ++i) {
          f[std::string(to_string(static_cast<FailureKind>(i)))] = t.failures[i];
        }
        per[std::string(to_string(id))] = {
            {"attempts", t.attempts}, {"successes", t.successes}, {"retries", t.retries}, {"failures", f}};
      }
      json j = {{"generated", r.generated.dialogues.size()}, {"per_source", per}};
      if (!o->report.empty()) open_out(o->report) << j.dump(2) << '\n';
      print(j);
      const auto t = r.report.total();
      if (t.attempts > 0 && t.failures[static_cast<std::size_t>(FailureKind::TransportError)] == t.attempts) {
        throw StageError("domain-map", "every request failed with a transport error");
      }
      return 0;
    };
  });
}

void postprocess_cmd(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("postprocess", "Drop short generations, duplicates and seed leakage");
  struct Opts {
    std::string generated, seed, output;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--generated", o->generated)->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o->seed)->required()->check(CLI::ExistingFile);
  cmd->add_option("--output", o->output, "Final synthetic corpus")->required();
  cmd->callback([&selected, o] {
    selected = [o] {
      auto seed = seed_from_corpus(read_corpus_file(o->seed, std::nullopt));
      auto r = postprocess(read_corpus_file(o->generated, std::nullopt), seed);
      write_corpus_file(r.corpus, o->output);
      const auto& t = r.report.total;
      print({{"input", t.input},
             {"dropped_short", t.dropped_short},
             {"duplicates_removed", t.duplicates_removed},
             {"leakage_removed", t.leakage_removed},
             {"kept", t.kept}});
      return 0;
    };
  });
}

void analyze(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("analyze", "Label histogram and domain-title clustering");
  struct Opts {
    std::string input, output;
    PipelineConfig config;
    std::string embeddings = "hashing", file, endpoint, model;
    double threshold = 0.8;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--input", o->input, "Mapped or generated corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", o->embeddings, "hashing | file | http")->capture_default_str();
  cmd->add_option("--embeddings-file", o->file, "title<TAB>v1,v2,... table");
  cmd->add_option("--embeddings-endpoint", o->endpoint);
  cmd->add_option("--embeddings-model", o->model);
  cmd->add_option("--threshold", o->threshold, "Cosine threshold")->capture_default_str();
  cmd->add_option("--domains", o->output, "TSV of (title, cluster)");
  cmd->callback([&selected, o] {
    selected = [o] {
      o->config.set("embeddings", o->embeddings);
      o->config.set("cluster_threshold", std::to_string(o->threshold));
      o->config.embeddings_file = o->file;
      o->config.embeddings_endpoint = o->endpoint;
      o->config.embeddings_model = o->model;
      auto c = read_corpus_file(o->input, std::nullopt);
      json j = {{"dialogues", c.dialogues.size()}, {"labels", label_counts_json(label_histogram(c))}};
      auto titles = domain_titles(c);
      if (!titles.empty()) {
        auto embedder = make_embedder(o->config);
        auto clusters = cluster_domain_titles(titles, *embedder, o->threshold);
        j["domain_titles"] = titles.size();
        j["domain_count"] = clusters.cluster_count();
        if (!o->output.empty()) {
          auto out = open_out(o->output);
          for (std::size_t i = 0; i < titles.size(); ++i) out << titles[i] << '\t' << clusters.cluster_of[i] << '\n';
        }
      }
      print(j);
      return 0;
    };
  });
}

void write_prediction_rows(const baseline::BaselineStrategyModel& model, const Corpus& c, std::ostream& out) {
  std::vector<Prediction> rows;
  for (const auto& d : c.dialogues) {
    auto labels = model.predict(d);
    for (std::size_t i = 0; i < labels.size(); ++i) rows.push_back({d.id, i, labels[i]});
  }
  write_predictions(rows, out);
}

void train_baseline(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("train-baseline", "Fit the bag-of-words strategy classifier");
  struct Opts {
    std::vector<std::string> train;
    std::string model_out, load, predict, predictions_out;
    TrainFlags flags;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--train", o->train, "Training corpora")->check(CLI::ExistingFile);
  cmd->add_option("--model-out", o->model_out, "Where to save the fitted model");
  cmd->add_option("--load", o->load, "Use a saved model instead of training")->check(CLI::ExistingFile);
  cmd->add_option("--predict", o->predict, "Corpus to label")->check(CLI::ExistingFile);
  cmd->add_option("--predictions-out", o->predictions_out, "Prediction TSV (stdout when omitted)");
  o->flags.add(cmd);
  cmd->callback([&selected, o] {
    selected = [o] {
      baseline::BaselineStrategyModel model(o->flags.config());
      if (!o->load.empty()) {
        auto in = open_in(o->load);
        model = baseline::BaselineStrategyModel::load(in);
      } else {
        if (o->train.empty()) throw CLI::ValidationError("train-baseline", "--train or --load is required");
        std::vector<Dialogue> dialogues;
        for (const auto& p : o->train) {
          auto c = read_corpus_file(p, std::nullopt);
          dialogues.insert(dialogues.end(), c.dialogues.begin(), c.dialogues.end());
        }
        model.fit(dialogues);
        std::cerr << "final loss " << model.loss_trace().back() << " after "
                  << model.loss_trace().size() - 1 << " iterations\n";
        if (!o->model_out.empty()) {
          auto out = open_out(o->model_out);
          model.save(out);
        }
      }
      if (!o->predict.empty()) {
        auto c = read_corpus_file(o->predict, std::nullopt);
        if (o->predictions_out.empty()) {
          write_prediction_rows(model, c, std::cout);
        } else {
          auto out = open_out(o->predictions_out);
          write_prediction_rows(model, c, out);
        }
      }
      return 0;
    };
  });
}

void evaluate(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("evaluate", "Run the six-regime experiment matrix with the baseline");
  struct Opts {
    std::vector<std::string> sources;
    std::string gnome, json_out;
    MatrixOptions matrix;
    bool keep_seed = false;
    TrainFlags flags;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--source", o->sources, "Mapped corpus of each original source")->required()->check(CLI::ExistingFile);
  cmd->add_option("--gnome", o->gnome, "Post-processed synthetic corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("--ratio", o->matrix.ratio, "Training share of each source")->capture_default_str();
  cmd->add_option("--split-seed", o->matrix.split_seed)->capture_default_str();
  cmd->add_flag("--keep-seed-in-test", o->keep_seed, "Do not drop seed dialogues from validation splits");
  cmd->add_option("--json", o->json_out, "Write full results as JSON");
  o->flags.add(cmd);
  cmd->callback([&selected, o] {
    selected = [o] {
      std::map<DatasetId, Corpus> sources;
      for (const auto& p : o->sources) {
        auto c = read_corpus_file(p, std::nullopt);
        if (!c.dataset) throw Error(p + ": corpus header names no dataset");
        sources[*c.dataset] = std::move(c);
      }
      o->matrix.exclude_seed_from_test = !o->keep_seed;
      const auto cfg = o->flags.config();
      auto result = run_matrix(sources, read_corpus_file(o->gnome, std::nullopt),
                               [cfg] { return std::make_unique<baseline::BaselineStrategyModel>(cfg); },
                               o->matrix);
      write_results_table(result, std::cout);
      if (!o->json_out.empty()) open_out(o->json_out) << results_json(result) << '\n';
      return 0;
    };
  });
}

void score(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("score-predictions", "Score an external prediction TSV against gold labels");
  struct Opts {
    std::string gold, predictions;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--gold", o->gold, "Mapped gold corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("--predictions", o->predictions, "dialogue_id<TAB>index<TAB>labels rows")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->callback([&selected, o] {
    selected = [o] {
      auto gold = read_corpus_file(o->gold, std::nullopt);
      auto in = open_in(o->predictions);
      write_score_report(score_predictions(gold, parse_predictions(in)), std::cout);
      return 0;
    };
  });
}

void sample(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("sample-pairs", "Draw (original, generated) pairs for human rating");
  struct Opts {
    std::string seed, generated, output;
    std::size_t m = 100;
    std::uint64_t rng_seed = 0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--seed", o->seed)->required()->check(CLI::ExistingFile);
  cmd->add_option("--generated", o->generated, "Post-processed corpus")->required()->check(CLI::ExistingFile);
  cmd->add_option("-m", o->m, "Number of pairs")->capture_default_str();
  cmd->add_option("--rng-seed", o->rng_seed)->capture_default_str();
  cmd->add_option("--output", o->output, "Pairs JSONL")->required();
  cmd->callback([&selected, o] {
    selected = [o] {
      auto seed = seed_from_corpus(read_corpus_file(o->seed, std::nullopt));
      auto pairs = sample_pairs(seed, read_corpus_file(o->generated, std::nullopt), o->m, o->rng_seed);
      auto out = open_out(o->output);
      write_pairs(pairs, out);
      print({{"pairs", pairs.size()}});
      return 0;
    };
  });
}

void serve(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("annotate-serve", "Serve pairs and collect ratings over HTTP");
  struct Opts {
    std::string pairs, log, host = "127.0.0.1", static_dir, metric = "interval", agreement = "exact";
    int port = 8080;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--pairs", o->pairs, "Pairs JSONL from sample-pairs")->required()->check(CLI::ExistingFile);
  cmd->add_option("--log", o->log, "Append-only rating log")->required();
  cmd->add_option("--host", o->host)->capture_default_str();
  cmd->add_option("--port", o->port, "0 picks a free port")->capture_default_str();
  cmd->add_option("--static-dir", o->static_dir, "Annotation UI assets");
  cmd->add_option("--metric", o->metric, "interval | ordinal")->capture_default_str();
  cmd->add_option("--agreement", o->agreement, "exact | pairwise | within-one")->capture_default_str();
  cmd->callback([&selected, o] {
    selected = [o] {
      const auto options = agreement_options(o->metric, o->agreement);
      auto in = open_in(o->pairs);
      RatingLog log(o->log);
      RatingService service(read_pairs(in), log, options);
      RatingServer server(service, o->static_dir);
      const int port = server.bind(o->host, o->port);
      std::cerr << "serving " << service.pairs().size() << " pairs on http://" << o->host << ":" << port << '\n';
      server.listen();
      return 0;
    };
  });
}

void stats(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("stats", "Agreement statistics over a rating log");
  struct Opts {
    std::string log, metric = "interval", agreement = "exact";
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--log", o->log, "Rating log")->required()->check(CLI::ExistingFile);
  cmd->add_option("--metric", o->metric, "interval | ordinal")->capture_default_str();
  cmd->add_option("--agreement", o->agreement, "exact | pairwise | within-one")->capture_default_str();
  cmd->callback([&selected, o] {
    selected = [o] {
      const auto options = agreement_options(o->metric, o->agreement);
      RatingLog log(o->log);
      const auto records = log.records();
      std::cout << agreement_json(agreement_stats(records, options)) << '\n';
      return 0;
    };
  });
}

void run_all(CLI::App& app, Action& selected) {
  auto* cmd = app.add_subcommand("run-all", "Run every pipeline stage into a fresh run directory");
  struct Opts {
    std::string config, output_root;
    std::vector<std::string> overrides;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--config", o->config, "key = value configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", o->overrides, "Override a config key (key=value)");
  cmd->add_option("--output-root", o->output_root, "Parent of the run directory");
  cmd->callback([&selected, o] {
    selected = [o] {
      auto config = load_config(o->config);
      for (const auto& kv : o->overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
        try {
          config.set(kv.substr(0, eq), kv.substr(eq + 1));
        } catch (const Error& e) {
          throw CLI::ValidationError("--set", e.what());
        }
      }
      if (!o->output_root.empty()) config.output_root = o->output_root;
      const auto dir = config.output_root / run_dir_name(config_hash(config));
      auto client = make_client(config.llm_backend, config.llm);
      auto embedder = make_embedder(config);
      auto manifest = run_pipeline(config, *client, *embedder, dir);
      std::cerr << "run directory: " << dir.string() << '\n';
      std::cout << manifest.to_json() << '\n';
      return 0;
    };
  });
}

}  // namespace

void register_commands(CLI::App& app, Action& selected) {
  ingest(app, selected);
  map_labels(app, selected);
  build_seed(app, selected);
  generate(app, selected);
  postprocess_cmd(app, selected);
  analyze(app, selected);
  train_baseline(app, selected);
  evaluate(app, selected);
  score(app, selected);
  sample(app, selected);
  serve(app, selected);
  stats(app, selected);
  run_all(app, selected);
}

}  // namespace gnome::cli
