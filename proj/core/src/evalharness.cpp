#include "gnome/evalharness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>

#include "gnome/error.hpp"
#include "gnome/random.hpp"
#include "gnome/text.hpp"

namespace gnome {

Split split(const Corpus& c, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw PreconditionError("split ratio must lie in (0, 1)");
  const auto n = c.dialogues.size();
  if (n == 0) throw PreconditionError("cannot split an empty corpus");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  shuffle(std::span<std::size_t>(order), rng);

  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  Split s;
  s.train.dataset = s.validation.dataset = c.dataset;
  s.train.stage = s.validation.stage = c.stage;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? s.train : s.validation).dialogues.push_back(c.dialogues[i]);
  }
  return s;
}

namespace {

void check_lengths(std::size_t gold, std::size_t pred) {
  if (gold != pred) {
    throw Error("gold and predicted label lists differ in length (" + std::to_string(gold) + " vs " +
                std::to_string(pred) + ")");
  }
}

}  // namespace

double weighted_f1(std::span<const LabelSet> gold, std::span<const LabelSet> pred) {
  check_lengths(gold.size(), pred.size());
  if (gold.empty()) throw Error("weighted_f1: empty gold list");
  double weighted = 0.0;
  std::size_t total_support = 0;
  for (auto l : kAllLabels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i].contains(l);
      const bool p = pred[i].contains(l);
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
    }
    const auto support = tp + fn;
    if (support == 0) continue;
    total_support += support;
    // F1 = 2tp / (2tp + fp + fn); the denominator is positive once support > 0.
    weighted += static_cast<double>(support * 2 * tp) / static_cast<double>(2 * tp + fp + fn);
  }
  return total_support ? weighted / static_cast<double>(total_support) : 0.0;
}

std::array<double, kNumLabels> classwise_joint_accuracy(std::span<const LabelSet> gold,
                                                        std::span<const LabelSet> pred) {
  check_lengths(gold.size(), pred.size());
  if (gold.empty()) throw Error("classwise_joint_accuracy: empty gold list");
  std::array<double, kNumLabels> out{};
  for (auto l : kAllLabels) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) agree += gold[i].contains(l) == pred[i].contains(l);
    out[index_of(l)] = static_cast<double>(agree) / static_cast<double>(gold.size());
  }
  return out;
}

double macro_mean(const std::array<double, kNumLabels>& per_class) {
  double s = 0.0;
  for (double v : per_class) s += v;
  return s / static_cast<double>(kNumLabels);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::InDomain: return "In-domain";
    case Regime::SyntheticInDomain: return "Synthetic-in-domain";
    case Regime::OutOfDomain: return "Out-of-domain";
    case Regime::SyntheticOutOfDomain: return "Synthetic-out-of-domain";
    case Regime::LeaveOneOut: return "Leave-one-out";
    case Regime::SyntheticLeaveOneOut: return "Synthetic-leave-one-out";
  }
  return "?";
}

bool is_synthetic(Regime r) {
  return r == Regime::SyntheticInDomain || r == Regime::SyntheticOutOfDomain ||
         r == Regime::SyntheticLeaveOneOut;
}

void ExperimentSpec::validate() const {
  const std::set<DatasetId> all(kSourceDatasets.begin(), kSourceDatasets.end());
  for (const auto* side : {&train_sources, &test_sources}) {
    if (side->empty() || side->contains(DatasetId::Gnome)) {
      throw PreconditionError("experiment sources must be nonempty sets of original datasets");
    }
  }
  bool ok = false;
  switch (regime) {
    case Regime::InDomain:
    case Regime::SyntheticInDomain:
      ok = train_sources == all && test_sources == all;
      break;
    case Regime::OutOfDomain:
    case Regime::SyntheticOutOfDomain:
      ok = train_sources.size() == 1 && test_sources.size() == 1 && train_sources != test_sources;
      break;
    case Regime::LeaveOneOut:
    case Regime::SyntheticLeaveOneOut:
      ok = test_sources.size() == 1 && train_sources.size() == 3 &&
           !train_sources.contains(*test_sources.begin());
      break;
  }
  if (!ok) throw PreconditionError("sources do not fit regime " + std::string(to_string(regime)));
}

namespace {

std::string join_sources(const std::set<DatasetId>& s) {
  std::string out;
  for (auto id : s) {
    if (!out.empty()) out += " + ";
    out += to_string(id);
  }
  return out;
}

}  // namespace

std::string ExperimentSpec::describe() const {
  auto train = join_sources(train_sources);
  if (is_synthetic(regime)) train = "GNOME(" + train + ")";
  return train + " -> " + join_sources(test_sources);
}

std::vector<ExperimentSpec> experiment_matrix() {
  const std::set<DatasetId> all(kSourceDatasets.begin(), kSourceDatasets.end());
  std::vector<ExperimentSpec> out;
  for (auto regime : kAllRegimes) {
    switch (regime) {
      case Regime::InDomain:
      case Regime::SyntheticInDomain:
        out.push_back({regime, all, all});
        break;
      case Regime::OutOfDomain:
      case Regime::SyntheticOutOfDomain:
        for (auto train : kSourceDatasets) {
          for (auto test : kSourceDatasets) {
            if (train != test) out.push_back({regime, {train}, {test}});
          }
        }
        break;
      case Regime::LeaveOneOut:
      case Regime::SyntheticLeaveOneOut:
        for (auto test : kSourceDatasets) {
          auto rest = all;
          rest.erase(test);
          out.push_back({regime, rest, {test}});
        }
        break;
    }
  }
  return out;
}

MatrixResult run_matrix(const std::map<DatasetId, Corpus>& sources, const Corpus& gnome,
                        const ModelFactory& make_model, const MatrixOptions& options) {
  std::map<DatasetId, Split> splits;
  for (auto s : kSourceDatasets) {
    auto it = sources.find(s);
    if (it == sources.end()) throw PreconditionError("missing source corpus " + std::string(to_string(s)));
    splits.emplace(s, split(it->second, options.ratio,
                            mix64(options.split_seed ^ static_cast<std::uint64_t>(s))));
  }

  std::set<std::pair<DatasetId, std::string>> seed_ids;
  std::map<DatasetId, std::vector<Dialogue>> synthetic;
  for (const auto& d : gnome.dialogues) {
    if (!d.provenance) throw PreconditionError("generated dialogue '" + d.id + "' has no provenance");
    seed_ids.emplace(d.provenance->seed_source, d.provenance->seed_id);
    synthetic[d.provenance->seed_source].push_back(d);
  }

  std::map<DatasetId, std::vector<Dialogue>> tests;
  for (auto& [source, sp] : splits) {
    auto& t = tests[source];
    for (const auto& d : sp.validation.dialogues) {
      if (options.exclude_seed_from_test && seed_ids.contains({source, d.id})) continue;
      t.push_back(d);
    }
  }

  MatrixResult result;
  for (const auto& spec : experiment_matrix()) {
    spec.validate();
    std::vector<Dialogue> train;
    for (auto s : spec.train_sources) {
      const auto& pool = is_synthetic(spec.regime) ? synthetic[s] : splits.at(s).train.dialogues;
      train.insert(train.end(), pool.begin(), pool.end());
    }
    if (train.empty()) throw PreconditionError("empty training set for " + spec.describe());
    std::vector<Dialogue> test;
    for (auto s : spec.test_sources) {
      const auto& pool = tests.at(s);
      test.insert(test.end(), pool.begin(), pool.end());
    }
    if (test.empty()) {
      throw PreconditionError("empty test set for " + spec.describe() +
                              (options.exclude_seed_from_test ? " (all held-out dialogues are seed dialogues)" : ""));
    }

    auto model = make_model();
    model->fit(train);
    std::vector<LabelSet> gold, pred;
    for (const auto& d : test) {
      auto p = model->predict(d);
      if (p.size() != d.utterances.size()) {
        throw Error("model returned " + std::to_string(p.size()) + " predictions for dialogue '" +
                    d.id + "' with " + std::to_string(d.utterances.size()) + " utterances");
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        gold.push_back(canonical_labels(d.utterances[i]));
        pred.push_back(p[i]);
      }
    }
    PairResult pr;
    pr.spec = spec;
    pr.weighted_f1 = weighted_f1(gold, pred);
    pr.class_accuracy = classwise_joint_accuracy(gold, pred);
    pr.train_dialogues = train.size();
    pr.test_utterances = gold.size();
    result.pairs.push_back(std::move(pr));
  }

  for (auto regime : kAllRegimes) {
    RegimeSummary s;
    s.regime = regime;
    for (const auto& p : result.pairs) {
      if (p.spec.regime != regime) continue;
      ++s.pairs;
      s.mean_f1 += p.weighted_f1;
      for (std::size_t l = 0; l < kNumLabels; ++l) s.mean_class_accuracy[l] += p.class_accuracy[l];
    }
    if (s.pairs) {
      s.mean_f1 /= static_cast<double>(s.pairs);
      for (auto& a : s.mean_class_accuracy) a /= static_cast<double>(s.pairs);
    }
    result.summaries.push_back(s);
  }
  return result;
}

namespace {

std::string_view pattern_of(Regime r) {
  switch (r) {
    case Regime::InDomain: return "A -> A";
    case Regime::SyntheticInDomain: return "GNOME(A) -> A";
    case Regime::OutOfDomain: return "A -> B";
    case Regime::SyntheticOutOfDomain: return "GNOME(A) -> B";
    case Regime::LeaveOneOut: return "A + B + C -> D";
    case Regime::SyntheticLeaveOneOut: return "GNOME(A + B + C) -> D";
  }
  return "?";
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

void write_results_table(const MatrixResult& r, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-26s %-26s %8s %6s %9s\n", "Experiment", "Fine-tune -> Test",
                "F1", "pairs", "JointAcc");
  out << line;
  for (const auto& s : r.summaries) {
    std::snprintf(line, sizeof line, "%-26s %-26s %8s %6zu %9s\n",
                  std::string(to_string(s.regime)).c_str(), std::string(pattern_of(s.regime)).c_str(),
                  fixed4(s.mean_f1).c_str(), s.pairs, fixed4(macro_mean(s.mean_class_accuracy)).c_str());
    out << line;
  }
  out << "\nPer-pair results\n";
  for (const auto& p : r.pairs) {
    std::snprintf(line, sizeof line, "%-26s %-62s %8s\n", std::string(to_string(p.spec.regime)).c_str(),
                  p.spec.describe().c_str(), fixed4(p.weighted_f1).c_str());
    out << line;
  }
}

std::string results_json(const MatrixResult& r) {
  using nlohmann::json;
  auto class_map = [](const std::array<double, kNumLabels>& a) {
    json j = json::object();
    for (auto l : kAllLabels) j[std::string(to_string(l))] = a[index_of(l)];
    return j;
  };
  json regimes = json::array();
  for (const auto& s : r.summaries) {
    regimes.push_back({{"regime", std::string(to_string(s.regime))},
                       {"pattern", std::string(pattern_of(s.regime))},
                       {"pairs", s.pairs},
                       {"mean_weighted_f1", s.mean_f1},
                       {"mean_class_accuracy", class_map(s.mean_class_accuracy)}});
  }
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    std::vector<std::string> train, test;
    for (auto s : p.spec.train_sources) train.emplace_back(to_string(s));
    for (auto s : p.spec.test_sources) test.emplace_back(to_string(s));
    pairs.push_back({{"regime", std::string(to_string(p.spec.regime))},
                     {"train", train},
                     {"test", test},
                     {"weighted_f1", p.weighted_f1},
                     {"class_accuracy", class_map(p.class_accuracy)},
                     {"train_dialogues", p.train_dialogues},
                     {"test_utterances", p.test_utterances}});
  }
  return json{{"regimes", regimes}, {"pairs", pairs}}.dump(2);
}

std::vector<Prediction> parse_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw ParseError(lineno, "expected dialogue_id<TAB>utterance_index<TAB>labels");
    Prediction p;
    p.dialogue_id = std::string(fields[0]);
    auto idx = trim(fields[1]);
    auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), p.utterance_index);
    if (ec != std::errc() || ptr != idx.data() + idx.size()) {
      throw ParseError(lineno, "bad utterance index '" + std::string(idx) + "'");
    }
    try {
      p.labels = parse_label_list(fields[2]);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_predictions(std::span<const Prediction> predictions, std::ostream& out) {
  for (const auto& p : predictions) {
    out << p.dialogue_id << '\t' << p.utterance_index << '\t' << p.labels.to_string() << '\n';
  }
}

ScoreReport score_predictions(const Corpus& gold, std::span<const Prediction> predictions) {
  std::map<std::pair<std::string, std::size_t>, LabelSet> by_key;
  for (const auto& p : predictions) {
    if (!by_key.emplace(std::make_pair(p.dialogue_id, p.utterance_index), p.labels).second) {
      throw Error("duplicate prediction for " + p.dialogue_id + " utterance " +
                  std::to_string(p.utterance_index));
    }
  }
  std::vector<LabelSet> g, pr;
  for (const auto& d : gold.dialogues) {
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      auto it = by_key.find({d.id, i});
      if (it == by_key.end()) {
        throw Error("missing prediction for " + d.id + " utterance " + std::to_string(i));
      }
      g.push_back(canonical_labels(d.utterances[i]));
      pr.push_back(it->second);
      by_key.erase(it);
    }
  }
  if (!by_key.empty()) {
    const auto& [key, _] = *by_key.begin();
    throw Error("prediction for unknown utterance " + key.first + " #" + std::to_string(key.second));
  }
  ScoreReport r;
  r.instances = g.size();
  r.weighted_f1 = weighted_f1(g, pr);
  r.class_accuracy = classwise_joint_accuracy(g, pr);
  return r;
}

void write_score_report(const ScoreReport& r, std::ostream& out) {
  nlohmann::json classes = nlohmann::json::object();
  for (auto l : kAllLabels) classes[std::string(to_string(l))] = r.class_accuracy[index_of(l)];
  nlohmann::json j = {{"instances", r.instances},
                      {"weighted_f1", r.weighted_f1},
                      {"class_accuracy", classes},
                      {"mean_class_accuracy", macro_mean(r.class_accuracy)}};
  out << j.dump(2) << '\n';
}

}  // namespace gnome
