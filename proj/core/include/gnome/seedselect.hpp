#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gnome/corpus.hpp"

namespace gnome {

// Inverse-frequency label scores for skew correction.
struct LabelStats {
  LabelCounts counts{};
  // 1 / count for labels present in the corpus; nullopt otherwise.
  std::array<std::optional<double>, kNumLabels> scores{};

  std::optional<double> score(CanonicalLabel l) const { return scores[index_of(l)]; }
  LabelStats scaled(double factor) const;
};

// Throws PreconditionError unless the corpus is at mapped-labels, and
// gnome::Error if it has no labeled utterance.
LabelStats label_stats(const Corpus& c);
LabelStats label_stats_from_counts(const LabelCounts& counts);

// Sum over utterances of their label scores, accumulated per label.
// Throws gnome::Error if a label has no score.
double dialogue_score(const Dialogue& d, const LabelStats& s);

struct ScoredDialogue {
  Dialogue dialogue;
  double score = 0.0;
};

// Top-k by score, ties broken by ascending id.
std::vector<ScoredDialogue> select_top_k(const Corpus& c, const LabelStats& s, std::size_t k);

enum class FrequencyScope {
  PerSource,  // stats computed on each source alone
  Pooled,     // stats computed on the union of all sources
};

struct SeedDataset {
  std::size_t k = 0;
  std::map<DatasetId, std::vector<ScoredDialogue>> per_source;
  std::vector<std::string> warnings;

  std::size_t size() const;
  // All selected dialogues in source order, at Stage::Seed.
  Corpus to_corpus() const;
  const Dialogue* find(DatasetId source, const std::string& id) const;
};

SeedDataset select_seed(const std::map<DatasetId, Corpus>& corpora, std::size_t k,
                        FrequencyScope scope = FrequencyScope::PerSource);

// Rebuilds a SeedDataset from a seed corpus (scores are not stored there).
SeedDataset seed_from_corpus(const Corpus& seed);

// `source<TAB>id<TAB>score` rows for audit.
void write_seed_manifest(const SeedDataset& seed, std::ostream& out);

}  // namespace gnome
