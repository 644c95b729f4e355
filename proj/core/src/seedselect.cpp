#include "gnome/seedselect.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "gnome/error.hpp"

namespace gnome {

LabelStats LabelStats::scaled(double factor) const {
  LabelStats out = *this;
  for (auto& s : out.scores) {
    if (s) *s *= factor;
  }
  return out;
}

LabelStats label_stats_from_counts(const LabelCounts& counts) {
  LabelStats s;
  s.counts = counts;
  std::size_t total = 0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    total += counts[i];
    if (counts[i] > 0) s.scores[i] = 1.0 / static_cast<double>(counts[i]);
  }
  if (total == 0) throw Error("no labeled utterances to compute label statistics from");
  return s;
}

LabelStats label_stats(const Corpus& c) {
  if (c.stage != Stage::MappedLabels) {
    throw PreconditionError("label_stats expects a mapped-labels corpus, got stage " +
                            std::string(to_string(c.stage)));
  }
  return label_stats_from_counts(tally_labels(c));
}

double dialogue_score(const Dialogue& d, const LabelStats& s) {
  // count * score per label: equal incidences give bit-identical scores.
  LabelCounts n{};
  for (const auto& u : d.utterances) {
    for (const auto& token : u.labels) {
      auto label = parse_canonical(token);
      if (!label) throw Error("dialogue " + d.id + ": label '" + token + "' is not canonical");
      ++n[index_of(*label)];
    }
  }
  double total = 0.0;
  for (auto l : kAllLabels) {
    if (n[index_of(l)] == 0) continue;
    auto score = s.score(l);
    if (!score) {
      throw Error("dialogue " + d.id + ": label '" + std::string(to_string(l)) + "' missing from label stats");
    }
    total += static_cast<double>(n[index_of(l)]) * *score;
  }
  return total;
}

std::vector<ScoredDialogue> select_top_k(const Corpus& c, const LabelStats& s, std::size_t k) {
  struct Ranked {
    double score;
    const Dialogue* dialogue;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(c.dialogues.size());
  for (const auto& d : c.dialogues) ranked.push_back({dialogue_score(d, s), &d});

  const auto take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(),
                    [](const Ranked& a, const Ranked& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.dialogue->id < b.dialogue->id;
                    });
  std::vector<ScoredDialogue> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({*ranked[i].dialogue, ranked[i].score});
  return out;
}

std::size_t SeedDataset::size() const {
  std::size_t n = 0;
  for (const auto& [_, list] : per_source) n += list.size();
  return n;
}

Corpus SeedDataset::to_corpus() const {
  Corpus c;
  c.stage = Stage::Seed;
  for (const auto& [_, list] : per_source) {
    for (const auto& sd : list) c.dialogues.push_back(sd.dialogue);
  }
  return c;
}

const Dialogue* SeedDataset::find(DatasetId source, const std::string& id) const {
  auto it = per_source.find(source);
  if (it == per_source.end()) return nullptr;
  for (const auto& sd : it->second) {
    if (sd.dialogue.id == id) return &sd.dialogue;
  }
  return nullptr;
}

SeedDataset select_seed(const std::map<DatasetId, Corpus>& corpora, std::size_t k,
                        FrequencyScope scope) {
  SeedDataset seed;
  seed.k = k;
  std::optional<LabelStats> pooled;
  if (scope == FrequencyScope::Pooled) {
    LabelCounts total{};
    for (const auto& [_, c] : corpora) {
      auto counts = tally_labels(c);
      for (std::size_t i = 0; i < kNumLabels; ++i) total[i] += counts[i];
    }
    pooled = label_stats_from_counts(total);
  }
  for (const auto& [source, c] : corpora) {
    if (c.stage != Stage::MappedLabels) {
      throw PreconditionError("select_seed expects mapped-labels corpora; " +
                              std::string(to_string(source)) + " is at stage " +
                              std::string(to_string(c.stage)));
    }
    auto& list = seed.per_source[source];
    if (k == 0) continue;
    if (c.dialogues.size() < k) {
      seed.warnings.push_back(std::string(to_string(source)) + ": only " +
                              std::to_string(c.dialogues.size()) +
                              " dialogues available for k=" + std::to_string(k) +
                              "; taking all");
    }
    if (c.dialogues.empty()) continue;
    const LabelStats stats = pooled ? *pooled : label_stats(c);
    list = select_top_k(c, stats, k);
  }
  return seed;
}

SeedDataset seed_from_corpus(const Corpus& seed) {
  SeedDataset out;
  for (const auto& d : seed.dialogues) out.per_source[d.source].push_back({d, 0.0});
  for (const auto& [_, list] : out.per_source) out.k = std::max(out.k, list.size());
  return out;
}

void write_seed_manifest(const SeedDataset& seed, std::ostream& out) {
  char buf[64];
  for (const auto& [source, list] : seed.per_source) {
    for (const auto& sd : list) {
      std::snprintf(buf, sizeof buf, "%.17g", sd.score);
      out << to_string(source) << '\t' << sd.dialogue.id << '\t' << buf << '\n';
    }
  }
}

}  // namespace gnome
