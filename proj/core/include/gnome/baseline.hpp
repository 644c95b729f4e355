#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gnome/corpus.hpp"
#include "gnome/error.hpp"
#include "gnome/model.hpp"

namespace gnome::baseline {

// Lowercased ASCII; split on anything that is not a letter or digit. Bytes
// >= 0x80 are kept inside tokens so UTF-8 words survive.
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;
  // Tokens with corpus frequency >= min_count, in first-seen order.
  static Vocabulary build(std::span<const std::string> texts, std::size_t min_count = 1);
  static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t min_count = 1);

  std::optional<std::size_t> find(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t min_count() const { return min_count_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_count_ = 1;
};

// Sparse vector; entries sorted by index, no duplicates.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::size_t dimension = 0;

  double value(std::size_t index) const;
  bool operator==(const FeatureVector&) const = default;
};

// Unigram counts of `u` at [0, |V|) and of the context text at [|V|, 2|V|).
FeatureVector featurize(const Utterance& u, const Utterance* prev, const Vocabulary& v);

enum class ContextWindow { None, Previous, Full };

std::vector<FeatureVector> featurize_dialogue(const Dialogue& d, const Vocabulary& v,
                                              ContextWindow window);

struct Example {
  FeatureVector x;
  LabelSet y;
};

struct Parameters {
  std::size_t dimension = 0;
  std::vector<double> weights;  // kNumLabels rows of `dimension`, row-major
  std::array<double, kNumLabels> bias{};

  static Parameters zeros(std::size_t dimension);
  double& weight(std::size_t label, std::size_t feature) { return weights[label * dimension + feature]; }
  double weight(std::size_t label, std::size_t feature) const {
    return weights[label * dimension + feature];
  }
};

struct ClassifierModel {
  Parameters params;
  std::array<double, kNumLabels> class_weights{1.0, 1.0, 1.0, 1.0, 1.0};
  double threshold = 0.5;

  double logit(std::size_t label, const FeatureVector& x) const;
};

// N / (5 * count_l) over the examples; 1.0 for labels that never occur.
std::array<double, kNumLabels> class_weights_for(std::span<const Example> data);

struct LossAndGradient {
  double loss = 0.0;
  Parameters gradient;
};

// Mean over the batch of the class-weighted binary cross-entropy summed over
// labels, plus (l2 / 2) * ||weights||^2. The class weight scales positive
// terms only. Throws gnome::Error on an empty batch.
LossAndGradient loss_and_gradient(const ClassifierModel& m, std::span<const Example> batch,
                                  double l2 = 0.0);

struct TrainOptions {
  double learning_rate = 0.5;
  std::size_t iterations = 500;
  double l2 = 0.0;
  std::optional<Parameters> init;  // zeros when absent
};

struct TrainResult {
  ClassifierModel model;
  // Objective before each update, then after the last one (iterations + 1 values).
  std::vector<double> loss_trace;
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::size_t iteration)
      : Error("training diverged: non-finite loss at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Full-batch gradient descent.
TrainResult train(std::span<const Example> data, const TrainOptions& options);

// Labels with sigmoid(logit) >= threshold; the single best label when none clears it.
LabelSet predict(const ClassifierModel& m, const FeatureVector& x);

struct BaselineConfig {
  std::size_t min_count = 1;
  ContextWindow context = ContextWindow::Previous;
  TrainOptions train;
};

// Vocabulary + classifier packaged as a StrategyModel.
class BaselineStrategyModel : public StrategyModel {
 public:
  explicit BaselineStrategyModel(BaselineConfig config = {}) : config_(std::move(config)) {}

  void fit(std::span<const Dialogue> train) override;
  std::vector<LabelSet> predict(const Dialogue& d) const override;

  const Vocabulary& vocabulary() const { return vocab_; }
  const ClassifierModel& classifier() const { return model_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

  // Versioned JSON document holding vocabulary, context window and parameters.
  void save(std::ostream& out) const;
  static BaselineStrategyModel load(std::istream& in);

 private:
  BaselineConfig config_;
  Vocabulary vocab_;
  ClassifierModel model_;
  std::vector<double> loss_trace_;
};

// Builds (features, labels) examples for every utterance of the dialogues.
std::vector<Example> make_examples(std::span<const Dialogue> dialogues, const Vocabulary& v,
                                   ContextWindow window);

}  // namespace gnome::baseline
