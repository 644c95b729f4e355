#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gnome/corpus.hpp"

namespace gnome {

// A trainable per-utterance strategy predictor, as consumed by the
// experiment harness.
class StrategyModel {
 public:
  virtual ~StrategyModel() = default;
  virtual void fit(std::span<const Dialogue> train) = 0;
  // One label set per utterance of `d`.
  virtual std::vector<LabelSet> predict(const Dialogue& d) const = 0;
};

using ModelFactory = std::function<std::unique_ptr<StrategyModel>()>;

}  // namespace gnome
