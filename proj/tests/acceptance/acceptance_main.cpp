// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "gnome/baseline.hpp"
#include "gnome/domainmap.hpp"
#include "gnome/evalharness.hpp"
#include "gnome/humaneval.hpp"
#include "gnome/pipeline.hpp"
#include "gnome/seedselect.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace gnome;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

Check mock_run() {
  Check c;
  const auto dir = fs::temp_directory_path() / "gnome_acceptance_mini";
  fs::remove_all(dir);
  auto cfg = load_config(fs::path(GNOME_MINI_DIR) / "mini.conf");
  MockLlmClient client;
  HashingEmbeddings emb;
  const auto t0 = std::chrono::steady_clock::now();
  auto m = run_pipeline(cfg, client, emb, dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto t = m.generation.total();
  const auto& p = m.postproc.total;
  c.require(cfg.k == 3 && cfg.generation.n_passes == 4, "mini config is not k=3, n=4");
  c.require(t.attempts == 48, "attempts = " + std::to_string(t.attempts));
  c.require(p.kept + p.dropped_short + p.duplicates_removed + p.leakage_removed + t.failed() == 48,
            "outcome counts do not sum to 48");
  c.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");

  auto seed = seed_from_corpus(read_corpus_file((dir / "seed.dlg.jsonl").string(), std::nullopt));
  auto gnome = read_corpus_file((dir / "gnome.dlg.jsonl").string(), std::nullopt);
  c.require(gnome.dialogues.size() == p.kept, "kept count differs from corpus size");
  for (const auto& d : gnome.dialogues) {
    const auto* s = d.provenance ? seed.find(d.provenance->seed_source, d.provenance->seed_id) : nullptr;
    c.require(s != nullptr, "no seed for " + d.id);
    if (!s) break;
    c.require(d.utterances.size() == s->utterances.size(), "length mismatch in " + d.id);
    for (std::size_t i = 0; c.ok && i < d.utterances.size(); ++i) {
      c.require(canonical_labels(d.utterances[i]) == canonical_labels(s->utterances[i]), "label mismatch in " + d.id);
    }
  }
  fs::remove_all(dir);
  if (c.ok) {
    c.detail = "48 attempts, " + std::to_string(p.kept) + " kept, " + std::to_string(static_cast<int>(secs * 1000)) + " ms";
  }
  return c;
}

Check metrics() {
  Check c;
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<LabelSet> g, p;
    for (std::size_t j = 0; j < n; ++j) {
      g.push_back(testing::random_label_set(rng, 3, true));
      p.push_back(testing::random_label_set(rng, 3, true));
    }
    worst = std::max(worst, std::abs(weighted_f1(g, p) - testing::oracle_weighted_f1(g, p)));
    auto a = classwise_joint_accuracy(g, p);
    auto b = testing::oracle_class_accuracy(g, p);
    for (std::size_t l = 0; l < kNumLabels; ++l) worst = std::max(worst, std::abs(a[l] - b[l]));
  }
  c.require(worst <= 1e-12, "max deviation " + std::to_string(worst));

  constexpr auto L1 = CanonicalLabel::Rapport;
  constexpr auto L2 = CanonicalLabel::Assessment;
  std::vector<LabelSet> gold{{L1}, {L1}, {L2}, {L1, L2}};
  std::vector<LabelSet> pred{{L1}, {L2}, {L2}, {L1}};
  auto acc = classwise_joint_accuracy(gold, pred);
  c.require(std::abs(weighted_f1(gold, pred) - 0.68) < 1e-15, "worked example F1");
  c.require(acc[index_of(L1)] == 0.75 && acc[index_of(L2)] == 0.5, "worked example accuracy");
  if (c.ok) c.detail = "1000 instances, worked example 0.68 / {0.75, 0.5}";
  return c;
}

Check alpha() {
  Check c;
  RatingMatrix perfect{{1.0, 3.0, 5.0}, {1.0, 3.0, 5.0}};
  c.require(krippendorff_alpha(perfect) == 1.0, "perfect agreement");
  RatingMatrix flip{{1.0, 5.0}, {5.0, 1.0}};
  c.require(std::abs(krippendorff_alpha(flip) + 0.5) < 1e-9, "(1,5)/(5,1)");
  std::mt19937_64 rng(55);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t raters = 2 + rng() % 3, items = 2 + rng() % 9;
    RatingMatrix m(raters, std::vector<std::optional<double>>(items));
    for (auto& row : m) {
      for (auto& cell : row) {
        if (rng() % 5) cell = static_cast<double>(1 + rng() % 5);
      }
    }
    try {
      const double a = krippendorff_alpha(m);
      c.require(std::abs(a - testing::oracle_alpha(m)) < 1e-9, "random matrix " + std::to_string(trial));
      ++compared;
    } catch (const InsufficientData&) {
    }
  }
  c.require(compared >= 150, "too few comparable matrices");
  if (c.ok) c.detail = std::to_string(compared) + " random matrices";
  return c;
}

std::vector<std::string> ids(const std::vector<ScoredDialogue>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.dialogue.id);
  return out;
}

Check seed_selection() {
  Check c;
  std::mt19937_64 rng(8);
  auto base = testing::random_mapped_corpus(DatasetId::CaSiNo, 25, rng, "p");
  Corpus corpus = base;
  for (const auto& d : base.dialogues) {
    Dialogue twin = d;
    twin.id = "q" + d.id.substr(1);
    corpus.dialogues.push_back(twin);
  }
  auto stats = label_stats(corpus);
  for (std::size_t k : {1u, 5u, 10u}) {
    c.require(ids(select_top_k(corpus, stats, k)) == testing::oracle_top_k(corpus, k), "k=" + std::to_string(k));
    c.require(ids(select_top_k(corpus, stats.scaled(7.0), k)) == testing::oracle_top_k(corpus, k, 7.0),
              "scaled k=" + std::to_string(k));
  }
  std::map<DatasetId, Corpus> one{{DatasetId::CaSiNo, corpus}};
  c.require(ids(select_seed(one, 10).per_source[DatasetId::CaSiNo]) == testing::oracle_top_k(corpus, 10),
            "select_seed differs from top-k");
  if (c.ok) c.detail = "50 dialogues, k in {1,5,10}, x7 scaling";
  return c;
}

Check baseline_checks() {
  using namespace gnome::baseline;
  Check c;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> w(0.0, 0.5);
  std::uniform_real_distribution<double> val(0.0, 2.0);
  auto examples = [&](std::size_t n, std::size_t dim) {
    std::vector<Example> out;
    for (std::size_t i = 0; i < n; ++i) {
      Example e;
      e.x.dimension = dim;
      for (std::uint32_t f = 0; f < dim; ++f) {
        if (rng() % 2) e.x.entries.emplace_back(f, val(rng));
      }
      e.y = testing::random_label_set(rng, 3, true);
      out.push_back(e);
    }
    return out;
  };
  double worst = 0;
  for (int config = 0; config < 100; ++config) {
    const std::size_t dim = 1 + rng() % 6;
    auto data = examples(1 + rng() % 8, dim);
    ClassifierModel m;
    m.params = Parameters::zeros(dim);
    for (auto& x : m.params.weights) x = w(rng);
    for (auto& b : m.params.bias) b = w(rng);
    m.class_weights = class_weights_for(data);
    const double l2 = config % 2 ? 0.1 : 0.0;
    auto g = loss_and_gradient(m, data, l2);
    auto probe = [&](double analytic, double& param) {
      const double saved = param, h = 1e-5;
      param = saved + h;
      const double up = loss_and_gradient(m, data, l2).loss;
      param = saved - h;
      const double down = loss_and_gradient(m, data, l2).loss;
      param = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3}));
    };
    for (std::size_t i = 0; i < m.params.weights.size(); ++i) probe(g.gradient.weights[i], m.params.weights[i]);
    for (std::size_t l = 0; l < kNumLabels; ++l) probe(g.gradient.bias[l], m.params.bias[l]);
  }
  c.require(worst < 1e-4, "gradient relative error " + std::to_string(worst));

  auto batch = examples(30, 8);
  TrainOptions slow;
  slow.learning_rate = 0.01;
  slow.iterations = 200;
  auto trace = train(batch, slow).loss_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) c.require(trace[i] <= trace[i - 1] + 1e-12, "loss increased");

  std::vector<Example> toy;
  for (int i = 0; i < 20; ++i) {
    Example e;
    e.x.dimension = 2;
    e.x.entries.emplace_back(i % 2, 1.0 + 0.1 * (i % 5));
    e.y = i % 2 ? LabelSet{CanonicalLabel::Coordination} : LabelSet{CanonicalLabel::Rapport};
    toy.push_back(e);
  }
  TrainOptions fast;
  fast.learning_rate = 0.5;
  fast.iterations = 500;
  auto model = train(toy, fast).model;
  std::vector<LabelSet> gold, pred;
  for (const auto& e : toy) {
    gold.push_back(e.y);
    pred.push_back(predict(model, e.x));
  }
  c.require(weighted_f1(gold, pred) == 1.0, "toy set F1 below 1");
  if (c.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "max gradient rel. error %.2e", worst);
    c.detail = buf;
  }
  return c;
}

class Memorizer : public StrategyModel {
 public:
  explicit Memorizer(const std::map<std::string, LabelSet>* table) : table_(table) {}
  void fit(std::span<const Dialogue>) override {}
  std::vector<LabelSet> predict(const Dialogue& d) const override {
    std::vector<LabelSet> out;
    for (const auto& u : d.utterances) out.push_back(table_->at(u.text));
    return out;
  }

 private:
  const std::map<std::string, LabelSet>* table_;
};

Check matrix() {
  Check c;
  std::mt19937_64 rng(21);
  std::map<DatasetId, Corpus> sources;
  std::map<std::string, LabelSet> table;
  for (auto id : kSourceDatasets) {
    sources[id] = testing::random_mapped_corpus(id, 20, rng, std::string(to_string(id)).substr(0, 3));
    for (const auto& d : sources[id].dialogues) {
      for (const auto& u : d.utterances) table[u.text] = canonical_labels(u);
    }
  }
  auto seed = select_seed(sources, 3);
  Corpus gnome;
  gnome.stage = Stage::Postprocessed;
  for (const auto& [_, list] : seed.per_source) {
    for (const auto& sd : list) {
      ParsedGeneration p{"Domain", {}};
      for (std::size_t i = 0; i < sd.dialogue.utterances.size(); ++i) p.utterances.push_back("syn " + sd.dialogue.id + std::to_string(i));
      gnome.dialogues.push_back(make_mapped_dialogue(sd.dialogue, p, 1));
    }
  }
  auto r = run_matrix(sources, gnome, [&] { return std::make_unique<Memorizer>(&table); });
  c.require(r.pairs.size() == 34, std::to_string(r.pairs.size()) + " pair evaluations");
  c.require(r.summaries.size() == 6, "regime count");
  for (const auto& s : r.summaries) c.require(s.mean_f1 == 1.0, std::string(to_string(s.regime)) + " mean F1 below 1");

  auto big = testing::random_mapped_corpus(DatasetId::JobInterview, 1000, rng);
  auto sp = split(big, 0.6, 7);
  std::set<std::string> seen;
  for (const auto& d : sp.train.dialogues) seen.insert(d.id);
  for (const auto& d : sp.validation.dialogues) seen.insert(d.id);
  c.require(sp.train.dialogues.size() == 600 && sp.validation.dialogues.size() == 400 && seen.size() == 1000,
            "split is not a disjoint 600/400 partition");
  if (c.ok) c.detail = "34 pairs, F1 = 1.0 in 6 regimes, 600/400 split";
  return c;
}

Check reference_figures() {
  Check c;
  std::ifstream in(fs::path(GNOME_SOURCE_DIR) / "README.md");
  std::stringstream s;
  s << in.rdbuf();
  const auto text = s.str();
  c.require(!text.empty(), "README.md missing");
  for (const char* needle : {"## Reference figures", "0.5918", "0.8910", "472", "288"}) {
    c.require(text.find(needle) != std::string::npos, std::string("README lacks ") + needle);
  }
  if (c.ok) c.detail = "documented as context, not reproduced";
  return c;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Check()>> criteria[] = {
      {"end-to-end mock run", mock_run},
      {"metric oracle equivalence", metrics},
      {"krippendorff alpha", alpha},
      {"seed selection", seed_selection},
      {"baseline classifier", baseline_checks},
      {"experiment matrix protocol", matrix},
      {"reference figures documented", reference_figures},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    failures += !c.ok;
    std::printf("%s  %-30s %s\n", c.ok ? "PASS" : "FAIL", name, c.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
