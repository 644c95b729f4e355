#include "gnome/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>

namespace gnome::baseline {

namespace {

bool is_token_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void add_counts(std::string_view text, const Vocabulary& v, std::size_t offset,
                std::map<std::uint32_t, double>& acc) {
  for (const auto& token : tokenize(text)) {
    if (auto i = v.find(token)) acc[static_cast<std::uint32_t>(*i + offset)] += 1.0;
  }
}

FeatureVector featurize_text(std::string_view text, std::string_view context, const Vocabulary& v) {
  std::map<std::uint32_t, double> acc;
  add_counts(text, v, 0, acc);
  add_counts(context, v, v.size(), acc);
  FeatureVector f;
  f.dimension = 2 * v.size();
  f.entries.assign(acc.begin(), acc.end());
  return f;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocabulary Vocabulary::build(std::span<const std::string> texts, std::size_t min_count) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& token : tokenize(t)) {
      if (counts[token]++ == 0) order.push_back(token);
    }
  }
  std::vector<std::string> kept;
  for (auto& token : order) {
    if (counts[token] >= min_count) kept.push_back(std::move(token));
  }
  return from_tokens(std::move(kept), min_count);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t min_count) {
  Vocabulary v;
  v.min_count_ = min_count;
  for (auto& t : tokens) {
    if (v.index_.emplace(t, v.tokens_.size()).second) v.tokens_.push_back(std::move(t));
  }
  return v;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double FeatureVector::value(std::size_t index) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), index,
                             [](const auto& e, std::size_t i) { return e.first < i; });
  return it != entries.end() && it->first == index ? it->second : 0.0;
}

FeatureVector featurize(const Utterance& u, const Utterance* prev, const Vocabulary& v) {
  return featurize_text(u.text, prev ? std::string_view(prev->text) : std::string_view(), v);
}

std::vector<FeatureVector> featurize_dialogue(const Dialogue& d, const Vocabulary& v,
                                              ContextWindow window) {
  std::vector<FeatureVector> out;
  out.reserve(d.utterances.size());
  std::string history;
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    const auto& u = d.utterances[i];
    switch (window) {
      case ContextWindow::None: out.push_back(featurize(u, nullptr, v)); break;
      case ContextWindow::Previous:
        out.push_back(featurize(u, i ? &d.utterances[i - 1] : nullptr, v));
        break;
      case ContextWindow::Full:
        out.push_back(featurize_text(u.text, history, v));
        history += ' ';
        history += u.text;
        break;
    }
  }
  return out;
}

Parameters Parameters::zeros(std::size_t dimension) {
  Parameters p;
  p.dimension = dimension;
  p.weights.assign(kNumLabels * dimension, 0.0);
  return p;
}

double ClassifierModel::logit(std::size_t label, const FeatureVector& x) const {
  double z = params.bias[label];
  const double* row = params.weights.data() + label * params.dimension;
  for (const auto& [i, value] : x.entries) z += row[i] * value;
  return z;
}

std::array<double, kNumLabels> class_weights_for(std::span<const Example> data) {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& e : data) {
    for (auto l : e.y.labels()) ++counts[index_of(l)];
  }
  std::array<double, kNumLabels> w{};
  const double n = static_cast<double>(data.size());
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    w[l] = counts[l] ? n / (static_cast<double>(kNumLabels) * static_cast<double>(counts[l])) : 1.0;
  }
  return w;
}

LossAndGradient loss_and_gradient(const ClassifierModel& m, std::span<const Example> batch,
                                  double l2) {
  if (batch.empty()) throw Error("loss_and_gradient: empty batch");
  LossAndGradient out;
  out.gradient = Parameters::zeros(m.params.dimension);
  const double scale = 1.0 / static_cast<double>(batch.size());

  for (const auto& e : batch) {
    if (e.x.dimension != m.params.dimension) throw Error("feature dimension does not match model");
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const double z = m.logit(l, e.x);
      const bool positive = e.y.contains(kAllLabels[l]);
      const double w = m.class_weights[l];
      double dz;
      if (positive) {
        out.loss += w * softplus(-z);
        dz = w * (sigmoid(z) - 1.0);
      } else {
        out.loss += softplus(z);
        dz = sigmoid(z);
      }
      dz *= scale;
      out.gradient.bias[l] += dz;
      double* row = out.gradient.weights.data() + l * m.params.dimension;
      for (const auto& [i, value] : e.x.entries) row[i] += dz * value;
    }
  }
  out.loss *= scale;
  if (l2 != 0.0) {
    double sq = 0.0;
    for (std::size_t k = 0; k < m.params.weights.size(); ++k) {
      sq += m.params.weights[k] * m.params.weights[k];
      out.gradient.weights[k] += l2 * m.params.weights[k];
    }
    out.loss += 0.5 * l2 * sq;
  }
  return out;
}

TrainResult train(std::span<const Example> data, const TrainOptions& options) {
  if (data.empty()) throw Error("train: no training examples");
  if (!(options.learning_rate >= 0.0)) throw Error("train: learning rate must be non-negative");
  TrainResult r;
  const auto dim = data.front().x.dimension;
  r.model.params = options.init ? *options.init : Parameters::zeros(dim);
  if (r.model.params.dimension != dim) throw Error("train: initial parameters have the wrong dimension");
  r.model.class_weights = class_weights_for(data);
  r.loss_trace.reserve(options.iterations + 1);

  for (std::size_t t = 0;; ++t) {
    auto lg = loss_and_gradient(r.model, data, options.l2);
    if (!std::isfinite(lg.loss)) throw TrainingDiverged(t);
    r.loss_trace.push_back(lg.loss);
    if (t == options.iterations) break;
    auto& p = r.model.params;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      p.weights[k] -= options.learning_rate * lg.gradient.weights[k];
    }
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      p.bias[l] -= options.learning_rate * lg.gradient.bias[l];
    }
  }
  return r;
}

LabelSet predict(const ClassifierModel& m, const FeatureVector& x) {
  LabelSet out;
  std::size_t best = 0;
  double best_p = -1.0;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const double p = sigmoid(m.logit(l, x));
    if (p >= m.threshold) out.insert(kAllLabels[l]);
    if (p > best_p) {
      best_p = p;
      best = l;
    }
  }
  if (out.empty()) out.insert(kAllLabels[best]);
  return out;
}

std::vector<Example> make_examples(std::span<const Dialogue> dialogues, const Vocabulary& v,
                                   ContextWindow window) {
  std::vector<Example> out;
  for (const auto& d : dialogues) {
    auto features = featurize_dialogue(d, v, window);
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      out.push_back({std::move(features[i]), canonical_labels(d.utterances[i])});
    }
  }
  return out;
}

void BaselineStrategyModel::fit(std::span<const Dialogue> train_set) {
  std::vector<std::string> texts;
  for (const auto& d : train_set) {
    for (const auto& u : d.utterances) texts.push_back(u.text);
  }
  vocab_ = Vocabulary::build(texts, config_.min_count);
  auto examples = make_examples(train_set, vocab_, config_.context);
  auto result = train(examples, config_.train);
  model_ = std::move(result.model);
  loss_trace_ = std::move(result.loss_trace);
}

std::vector<LabelSet> BaselineStrategyModel::predict(const Dialogue& d) const {
  std::vector<LabelSet> out;
  for (const auto& f : featurize_dialogue(d, vocab_, config_.context)) {
    out.push_back(baseline::predict(model_, f));
  }
  return out;
}

namespace {

constexpr int kModelVersion = 1;

std::string_view context_name(ContextWindow w) {
  switch (w) {
    case ContextWindow::None: return "none";
    case ContextWindow::Previous: return "previous";
    case ContextWindow::Full: return "full";
  }
  return "?";
}

}  // namespace

void BaselineStrategyModel::save(std::ostream& out) const {
  nlohmann::json j = {{"format", "gnome-baseline-model"},
                      {"version", kModelVersion},
                      {"context", std::string(context_name(config_.context))},
                      {"min_count", vocab_.min_count()},
                      {"vocabulary", vocab_.tokens()},
                      {"dimension", model_.params.dimension},
                      {"weights", model_.params.weights},
                      {"bias", model_.params.bias},
                      {"class_weights", model_.class_weights},
                      {"threshold", model_.threshold}};
  out << j.dump() << '\n';
  if (!out) throw Error("failed writing model");
}

BaselineStrategyModel BaselineStrategyModel::load(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format") != "gnome-baseline-model") throw Error("not a baseline model file");
    if (j.at("version") != kModelVersion) throw Error("unsupported model version");
    BaselineConfig cfg;
    const auto ctx = j.at("context").get<std::string>();
    if (ctx == "none") {
      cfg.context = ContextWindow::None;
    } else if (ctx == "previous") {
      cfg.context = ContextWindow::Previous;
    } else if (ctx == "full") {
      cfg.context = ContextWindow::Full;
    } else {
      throw Error("unknown context window '" + ctx + "'");
    }
    cfg.min_count = j.at("min_count").get<std::size_t>();
    BaselineStrategyModel m(cfg);
    m.vocab_ = Vocabulary::from_tokens(j.at("vocabulary").get<std::vector<std::string>>(), cfg.min_count);
    m.model_.params.dimension = j.at("dimension").get<std::size_t>();
    m.model_.params.weights = j.at("weights").get<std::vector<double>>();
    m.model_.params.bias = j.at("bias").get<std::array<double, kNumLabels>>();
    m.model_.class_weights = j.at("class_weights").get<std::array<double, kNumLabels>>();
    m.model_.threshold = j.at("threshold").get<double>();
    if (m.model_.params.dimension != 2 * m.vocab_.size() ||
        m.model_.params.weights.size() != kNumLabels * m.model_.params.dimension) {
      throw Error("model parameters do not match the vocabulary size");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace gnome::baseline
