#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gnome/baseline.hpp"
#include "gnome/evalharness.hpp"
#include "oracles.hpp"

namespace gnome::baseline {
namespace {

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Hi, I'd like 2 TENTS!"),
            (std::vector<std::string>{"hi", "i", "d", "like", "2", "tents"}));
  EXPECT_EQ(tokenize("café au lait"), (std::vector<std::string>{"café", "au", "lait"}));
  EXPECT_TRUE(tokenize("  ,,; ").empty());
}

TEST(Vocabulary, MinCountAndOrder) {
  std::vector<std::string> texts{"b a b", "c b a"};
  auto v = Vocabulary::build(texts, 2);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"b", "a"}));
  EXPECT_FALSE(v.find("c"));
  EXPECT_EQ(*v.find("a"), 1u);
}

TEST(Features, UtteranceAndContextBlocks) {
  std::vector<std::string> texts{"deal price water"};
  auto v = Vocabulary::build(texts);
  Utterance prev{Speaker::A, "water water", {}};
  Utterance cur{Speaker::B, "deal price unknown", {}};
  auto x = featurize(cur, &prev, v);
  EXPECT_EQ(x.dimension, 6u);
  EXPECT_DOUBLE_EQ(x.value(0), 1.0);
  EXPECT_DOUBLE_EQ(x.value(1), 1.0);
  EXPECT_DOUBLE_EQ(x.value(2), 0.0);
  EXPECT_DOUBLE_EQ(x.value(5), 2.0);
  EXPECT_EQ(featurize(cur, nullptr, v).entries.size(), 2u);
}

std::vector<Example> random_examples(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> val(0.0, 2.0);
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
}

TEST(Gradient, MatchesCentralFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> w(0.0, 0.5);
  const double h = 1e-5;
  for (int config = 0; config < 100; ++config) {
    const std::size_t dim = 1 + rng() % 6;
    auto data = random_examples(rng, 1 + rng() % 8, dim);
    ClassifierModel m;
    m.params = Parameters::zeros(dim);
    for (auto& x : m.params.weights) x = w(rng);
    for (auto& b : m.params.bias) b = w(rng);
    m.class_weights = class_weights_for(data);
    const double l2 = (config % 2) ? 0.1 : 0.0;
    auto g = loss_and_gradient(m, data, l2);

    auto check = [&](double analytic, double& param) {
      const double saved = param;
      param = saved + h;
      const double up = loss_and_gradient(m, data, l2).loss;
      param = saved - h;
      const double down = loss_and_gradient(m, data, l2).loss;
      param = saved;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      EXPECT_LT(std::abs(analytic - numeric) / denom, 1e-4) << "config " << config;
    };
    for (std::size_t i = 0; i < m.params.weights.size(); ++i) check(g.gradient.weights[i], m.params.weights[i]);
    for (std::size_t l = 0; l < kNumLabels; ++l) check(g.gradient.bias[l], m.params.bias[l]);
  }
}

TEST(Training, LossIsNonIncreasingAtSmallStep) {
  std::mt19937_64 rng(2);
  auto data = random_examples(rng, 30, 8);
  TrainOptions opt;
  opt.learning_rate = 0.01;
  opt.iterations = 200;
  auto r = train(data, opt);
  ASSERT_EQ(r.loss_trace.size(), 201u);
  for (std::size_t i = 1; i < r.loss_trace.size(); ++i) EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1] + 1e-12);
}

TEST(Training, SeparableToySetIsLearnedExactly) {
  std::vector<Example> data;
  for (int i = 0; i < 20; ++i) {
    Example e;
    e.x.dimension = 2;
    const bool first = i % 2 == 0;
    e.x.entries.emplace_back(first ? 0 : 1, 1.0 + 0.1 * (i % 5));
    e.y = first ? LabelSet{CanonicalLabel::Rapport} : LabelSet{CanonicalLabel::Coordination};
    data.push_back(e);
  }
  TrainOptions opt;
  opt.learning_rate = 0.5;
  opt.iterations = 500;
  auto r = train(data, opt);
  std::vector<LabelSet> gold, pred;
  for (const auto& e : data) {
    gold.push_back(e.y);
    pred.push_back(predict(r.model, e.x));
  }
  EXPECT_DOUBLE_EQ(weighted_f1(gold, pred), 1.0);
}

TEST(Training, DivergenceIsReported) {
  std::mt19937_64 rng(3);
  auto data = random_examples(rng, 10, 4);
  for (auto& e : data) {
    for (auto& [_, v] : e.x.entries) v = 1e200;
  }
  TrainOptions opt;
  opt.learning_rate = 1e200;
  opt.iterations = 5;
  EXPECT_THROW(train(data, opt), TrainingDiverged);
}

TEST(Training, EmptyBatchIsAnError) {
  ClassifierModel m;
  m.params = Parameters::zeros(3);
  EXPECT_THROW(loss_and_gradient(m, {}, 0.0), Error);
}

TEST(Predict, FallsBackToBestLabel) {
  ClassifierModel m;
  m.params = Parameters::zeros(1);
  m.params.bias = {-5, -1, -3, -4, -6};
  FeatureVector x;
  x.dimension = 1;
  EXPECT_EQ(predict(m, x), LabelSet{CanonicalLabel::Assessment});
}

TEST(StrategyModel, SaveLoadPreservesPredictions) {
  std::mt19937_64 rng(8);
  auto c = testing::random_mapped_corpus(DatasetId::CaSiNo, 12, rng);
  BaselineConfig cfg;
  cfg.train.iterations = 50;
  BaselineStrategyModel m(cfg);
  m.fit(c.dialogues);
  std::stringstream buf;
  m.save(buf);
  auto loaded = BaselineStrategyModel::load(buf);
  for (const auto& d : c.dialogues) EXPECT_EQ(m.predict(d), loaded.predict(d));
  EXPECT_EQ(loaded.vocabulary().tokens(), m.vocabulary().tokens());

  std::istringstream junk("{\"version\":99}");
  EXPECT_THROW(BaselineStrategyModel::load(junk), Error);
}

}  // namespace
}  // namespace gnome::baseline
