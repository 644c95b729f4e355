#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnome/labels.hpp"

namespace gnome {

enum class Speaker : std::uint8_t { A, B };

std::string_view to_string(Speaker s);

struct Utterance {
  Speaker speaker = Speaker::A;
  std::string text;
  // Raw source tokens before label mapping, canonical names afterwards.
  std::vector<std::string> labels;

  bool operator==(const Utterance&) const = default;
};

// Where a generated dialogue came from.
struct Provenance {
  std::string seed_id;
  DatasetId seed_source = DatasetId::CaSiNo;
  std::size_t generation_index = 1;  // 1..n
  std::string domain_title;

  bool operator==(const Provenance&) const = default;
};

struct Dialogue {
  std::string id;
  DatasetId source = DatasetId::CaSiNo;
  bool complete = true;
  std::vector<Utterance> utterances;
  std::optional<Provenance> provenance;  // set only on generated dialogues

  bool operator==(const Dialogue&) const = default;
};

// Pipeline order; a corpus only ever moves forward.
enum class Stage : std::uint8_t { Raw, MappedLabels, Seed, Generated, Postprocessed };

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view s);

struct Corpus {
  // nullopt for corpora that mix sources (the seed set).
  std::optional<DatasetId> dataset;
  Stage stage = Stage::Raw;
  std::vector<Dialogue> dialogues;

  bool operator==(const Corpus&) const = default;
};

// Throws PreconditionError if `to` is behind `c.stage`.
void advance_stage(Corpus& c, Stage to);

// Canonical label set of an utterance; throws gnome::Error on a non-canonical token.
LabelSet canonical_labels(const Utterance& u);

// Shared tally: one count per (utterance, canonical label) incidence.
LabelCounts tally_labels(const Corpus& c);

struct RecordIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseReport {
  Corpus corpus;
  std::vector<RecordIssue> issues;
  std::size_t records = 0;  // nonblank, non-header lines seen
};

// Parses the line-delimited interchange format (`.dlg.jsonl`). The optional
// first-line header carries the stage; without it the corpus is at Stage::Raw.
// `dataset` nullopt accepts mixed sources. Throws ParseError / DuplicateIdError
// on the first bad record.
Corpus parse_corpus(std::istream& in, std::optional<DatasetId> dataset);
Corpus parse_corpus(std::string_view text, std::optional<DatasetId> dataset);

// Same grammar, but bad records are collected instead of thrown:
// corpus.dialogues.size() + issues.size() == records.
ParseReport parse_corpus_collect(std::istream& in, std::optional<DatasetId> dataset);

Corpus read_corpus_file(const std::string& path, std::optional<DatasetId> dataset);

// Single record (one JSON object, no trailing newline) and its inverse.
std::string dialogue_to_record(const Dialogue& d);
Dialogue parse_dialogue_record(std::string_view record);

// Writes a header line followed by one record per dialogue.
void write_corpus(const Corpus& c, std::ostream& out);
std::string write_corpus(const Corpus& c);
void write_corpus_file(const Corpus& c, const std::string& path);

struct FilterResult {
  Corpus corpus;
  std::size_t removed = 0;
};

// Keeps dialogues with complete=true, at least two utterances, and a label
// token on every utterance.
FilterResult filter_incomplete(const Corpus& c);

// Dialogue text with whitespace collapsed per utterance, joined by '\n'.
// Used for duplicate and leakage detection.
std::string normalized_text(const Dialogue& d);

}  // namespace gnome
