#pragma once

#include <map>
#include <string>

#include "gnome/corpus.hpp"
#include "gnome/seedselect.hpp"

namespace gnome {

struct PostprocCounts {
  std::size_t input = 0;
  std::size_t dropped_short = 0;
  std::size_t duplicates_removed = 0;
  std::size_t leakage_removed = 0;
  std::size_t kept = 0;

  bool conserved() const {
    return input == dropped_short + duplicates_removed + leakage_removed + kept;
  }
  PostprocCounts& operator+=(const PostprocCounts& o);
  bool operator==(const PostprocCounts&) const = default;
};

struct PostprocReport {
  PostprocCounts total;
  std::map<DatasetId, PostprocCounts> per_source;  // keyed by seed source
};

struct StepResult {
  Corpus corpus;
  std::size_t removed = 0;
};

// Keeps generated dialogues whose length equals their seed's. Throws
// gnome::Error naming the id if a dialogue's seed cannot be found.
StepResult drop_short(const Corpus& generated, const SeedDataset& seed);

// Exact duplicates on normalized_text(); the first in (seed_id,
// generation_index) order survives, and the output is in that order.
StepResult dedup(const Corpus& generated);

// Removes generated dialogues whose normalized text equals a seed dialogue's.
StepResult remove_leakage(const Corpus& generated, const SeedDataset& seed);

struct PostprocResult {
  Corpus corpus;  // stage postprocessed
  PostprocReport report;
};

// drop_short, then dedup, then remove_leakage.
PostprocResult postprocess(const Corpus& generated, const SeedDataset& seed);

}  // namespace gnome
