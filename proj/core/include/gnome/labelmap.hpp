#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gnome/corpus.hpp"
#include "gnome/labels.hpp"

namespace gnome {

// Raw strategy token -> canonical label set, for one source dataset.
struct LabelMapping {
  DatasetId dataset = DatasetId::CaSiNo;
  std::map<std::string, LabelSet> entries;
  // Misspelled raw tokens accepted as synonyms of an entry key.
  std::map<std::string, std::string> token_aliases;

  // Image of a raw token, following aliases; nullopt when unknown.
  std::optional<LabelSet> lookup(const std::string& raw) const;
};

// Built-in table for a source dataset. Throws PreconditionError for Gnome,
// whose labels are canonical already.
const LabelMapping& mapping_for(DatasetId dataset);

struct UnmappedEntry {
  std::string dialogue_id;
  std::size_t utterance_index = 0;
  std::string token;
};

struct LabelMapResult {
  Corpus corpus;
  std::vector<std::string> unmapped;  // distinct unknown tokens, first-seen order
  std::vector<UnmappedEntry> report;  // one entry per excluded (utterance, token)
  std::size_t utterances_excluded = 0;
  std::size_t dialogues_emptied = 0;  // dialogues dropped because no utterance survived
};

// Rewrites each utterance's raw tokens into the union of their canonical images.
// An utterance with any unknown token is left out and reported.
LabelMapResult map_corpus(const Corpus& c);

// `raw<TAB>canonical[,canonical]` rows, in key order.
void write_mapping_table(const LabelMapping& m, std::ostream& out);

}  // namespace gnome
