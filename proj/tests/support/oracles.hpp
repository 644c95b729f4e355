#pragma once

// Independent reference computations used by unit and acceptance tests.
// They deliberately avoid the library's code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "gnome/corpus.hpp"
#include "gnome/labels.hpp"

namespace gnome::testing {

// Per-label precision and recall from explicit indicator vectors, then
// F1 = 2PR / (P + R), weighted by gold support.
inline double oracle_weighted_f1(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
  double num = 0.0, support_total = 0.0;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::vector<int> g, p;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      g.push_back(gold[i].contains(kAllLabels[l]) ? 1 : 0);
      p.push_back(pred[i].contains(kAllLabels[l]) ? 1 : 0);
    }
    double tp = 0, pp = 0, gp = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      tp += g[i] * p[i];
      pp += p[i];
      gp += g[i];
    }
    if (gp == 0) continue;
    const double precision = pp > 0 ? tp / pp : 0.0;
    const double recall = tp / gp;
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    num += gp * f1;
    support_total += gp;
  }
  return support_total > 0 ? num / support_total : 0.0;
}

inline std::array<double, kNumLabels> oracle_class_accuracy(const std::vector<LabelSet>& gold,
                                                            const std::vector<LabelSet>& pred) {
  std::array<double, kNumLabels> out{};
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::size_t tp = 0, tn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i].contains(kAllLabels[l]);
      const bool p = pred[i].contains(kAllLabels[l]);
      tp += g && p;
      tn += !g && !p;
    }
    out[l] = static_cast<double>(tp + tn) / static_cast<double>(gold.size());
  }
  return out;
}

// Krippendorff's alpha by enumerating every ordered pair of ratings:
// within-item pairs weighted 1/(m_u - 1) for observed disagreement, and
// all pooled pairs for expected disagreement. Squared-difference distance.
inline double oracle_alpha(const std::vector<std::vector<std::optional<double>>>& m) {
  std::vector<std::vector<double>> units;
  const std::size_t items = m.empty() ? 0 : m[0].size();
  for (std::size_t i = 0; i < items; ++i) {
    std::vector<double> u;
    for (const auto& row : m) {
      if (row[i]) u.push_back(*row[i]);
    }
    if (u.size() >= 2) units.push_back(u);
  }
  std::vector<double> pooled;
  double observed = 0.0;
  for (const auto& u : units) {
    double s = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a) {
      for (std::size_t b = 0; b < u.size(); ++b) {
        if (a != b) s += (u[a] - u[b]) * (u[a] - u[b]);
      }
    }
    observed += s / static_cast<double>(u.size() - 1);
    pooled.insert(pooled.end(), u.begin(), u.end());
  }
  const double n = static_cast<double>(pooled.size());
  double expected = 0.0;
  for (std::size_t a = 0; a < pooled.size(); ++a) {
    for (std::size_t b = 0; b < pooled.size(); ++b) {
      if (a != b) expected += (pooled[a] - pooled[b]) * (pooled[a] - pooled[b]);
    }
  }
  observed /= n;
  expected /= n * (n - 1);
  return expected == 0.0 ? 1.0 : 1.0 - observed / expected;
}

// Label score = 1 / (number of utterances carrying it); dialogue score is
// the sum over its label incidences. Returns ids of the top k after a full
// sort by (score desc, id asc).
inline std::vector<std::string> oracle_top_k(const Corpus& c, std::size_t k, double scale = 1.0) {
  std::array<double, kNumLabels> count{};
  for (const auto& d : c.dialogues) {
    for (const auto& u : d.utterances) {
      for (const auto& name : u.labels) count[index_of(*parse_canonical(name))] += 1;
    }
  }
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& d : c.dialogues) {
    std::array<double, kNumLabels> n{};
    for (const auto& u : d.utterances) {
      for (const auto& name : u.labels) n[index_of(*parse_canonical(name))] += 1;
    }
    double s = 0.0;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (n[l] > 0) s += n[l] * (scale * (1.0 / count[l]));
    }
    scored.emplace_back(s, d.id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

inline LabelSet random_label_set(std::mt19937_64& rng, std::size_t max_labels, bool allow_empty) {
  LabelSet s;
  const std::size_t lo = allow_empty ? 0 : 1;
  const std::size_t n = lo + rng() % (max_labels - lo + 1);
  while (s.size() < n) s.insert(kAllLabels[rng() % kNumLabels]);
  return s;
}

// Mapped-labels corpus with random canonical labels and unique text.
inline Corpus random_mapped_corpus(DatasetId source, std::size_t dialogues, std::mt19937_64& rng,
                                   const std::string& prefix = "d") {
  Corpus c;
  c.dataset = source;
  c.stage = Stage::MappedLabels;
  for (std::size_t i = 0; i < dialogues; ++i) {
    Dialogue d;
    char id[32];
    std::snprintf(id, sizeof id, "%s%03zu", prefix.c_str(), i);
    d.id = id;
    d.source = source;
    const std::size_t turns = 2 + rng() % 5;
    for (std::size_t t = 0; t < turns; ++t) {
      Utterance u;
      u.speaker = t % 2 ? Speaker::B : Speaker::A;
      u.text = d.id + " turn " + std::to_string(t) + " token" + std::to_string(rng() % 50);
      for (auto l : random_label_set(rng, 2, false).labels()) u.labels.emplace_back(to_string(l));
      d.utterances.push_back(std::move(u));
    }
    c.dialogues.push_back(std::move(d));
  }
  return c;
}

}  // namespace gnome::testing
