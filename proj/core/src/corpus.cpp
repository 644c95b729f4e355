#include "gnome/corpus.hpp"

#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "gnome/error.hpp"
#include "gnome/text.hpp"

namespace gnome {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatTag = "gnome-dialogues";
constexpr int kFormatVersion = 1;

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

DatasetId require_dataset(const json& obj, const char* key) {
  auto tag = require_string(obj, key);
  auto id = parse_dataset(tag);
  if (!id) throw Error("unknown dataset tag '" + tag + "'");
  return *id;
}

Utterance parse_utterance(const json& j) {
  if (!j.is_object()) throw Error("utterance must be an object");
  Utterance u;
  auto speaker = require_string(j, "speaker");
  if (speaker == "A") {
    u.speaker = Speaker::A;
  } else if (speaker == "B") {
    u.speaker = Speaker::B;
  } else {
    throw Error("speaker must be \"A\" or \"B\", got '" + speaker + "'");
  }
  u.text = require_string(j, "text");
  if (trim(u.text).empty()) throw Error("utterance text is empty");
  const auto& labels = require(j, "labels");
  if (!labels.is_array()) throw Error("field 'labels' must be an array");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!l.is_string()) throw Error("label tokens must be strings");
    auto token = l.get<std::string>();
    if (!seen.insert(token).second) throw Error("duplicate label token '" + token + "'");
    u.labels.push_back(std::move(token));
  }
  return u;
}

Dialogue parse_record(const json& j) {
  if (!j.is_object()) throw Error("record must be an object");
  Dialogue d;
  d.id = require_string(j, "id");
  if (d.id.empty()) throw Error("dialogue id is empty");
  d.source = require_dataset(j, "source");
  const auto& complete = require(j, "complete");
  if (!complete.is_boolean()) throw Error("field 'complete' must be a boolean");
  d.complete = complete.get<bool>();
  const auto& utts = require(j, "utterances");
  if (!utts.is_array()) throw Error("field 'utterances' must be an array");
  if (utts.empty()) throw Error("dialogue has no utterances");
  for (const auto& u : utts) d.utterances.push_back(parse_utterance(u));

  if (j.contains("seed_id")) {
    Provenance p;
    p.seed_id = require_string(j, "seed_id");
    p.seed_source = require_dataset(j, "seed_source");
    const auto& gi = require(j, "generation_index");
    if (!gi.is_number_unsigned() || gi.get<std::size_t>() == 0) {
      throw Error("field 'generation_index' must be a positive integer");
    }
    p.generation_index = gi.get<std::size_t>();
    p.domain_title = require_string(j, "domain_title");
    d.provenance = std::move(p);
  }
  return d;
}

json to_json(const Dialogue& d) {
  json utts = json::array();
  for (const auto& u : d.utterances) {
    utts.push_back({{"speaker", std::string(to_string(u.speaker))},
                    {"text", u.text},
                    {"labels", u.labels}});
  }
  json j = {{"id", d.id},
            {"source", std::string(to_string(d.source))},
            {"complete", d.complete},
            {"utterances", std::move(utts)}};
  if (d.provenance) {
    j["seed_id"] = d.provenance->seed_id;
    j["seed_source"] = std::string(to_string(d.provenance->seed_source));
    j["generation_index"] = d.provenance->generation_index;
    j["domain_title"] = d.provenance->domain_title;
  }
  return j;
}

bool is_header(const json& j) { return j.is_object() && j.contains("format"); }

struct Parser {
  std::optional<DatasetId> requested;
  bool collect = false;
  ParseReport report;
  std::unordered_set<std::string> ids;
  bool header_allowed = true;

  void fail(std::size_t line, const std::string& msg, bool duplicate, const std::string& id) {
    if (!collect) {
      if (duplicate) throw DuplicateIdError(line, id);
      throw ParseError(line, msg);
    }
    report.issues.push_back({line, msg});
  }

  void header(std::size_t line, const json& j) {
    if (j.value("format", "") != kFormatTag) throw ParseError(line, "unrecognized header format");
    if (j.value("version", 0) != kFormatVersion) throw ParseError(line, "unsupported format version");
    if (j.contains("stage")) {
      auto stage = parse_stage(j["stage"].is_string() ? j["stage"].get<std::string>() : "");
      if (!stage) throw ParseError(line, "unknown stage in header");
      report.corpus.stage = *stage;
    }
    if (j.contains("dataset") && !j["dataset"].is_null()) {
      if (!j["dataset"].is_string()) throw ParseError(line, "header dataset must be a string");
      auto id = parse_dataset(j["dataset"].get<std::string>());
      if (!id) throw ParseError(line, "unknown dataset tag in header");
      if (requested && *requested != *id) {
        throw ParseError(line, "header dataset " + std::string(to_string(*id)) +
                                   " does not match requested " +
                                   std::string(to_string(*requested)));
      }
      report.corpus.dataset = id;
    }
  }

  void line(std::size_t lineno, std::string_view text) {
    if (trim(text).empty()) return;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      if (header_allowed) header_allowed = false;
      ++report.records;
      fail(lineno, std::string("malformed record: ") + e.what(), false, {});
      return;
    }
    if (header_allowed) {
      header_allowed = false;
      if (is_header(j)) {
        header(lineno, j);
        return;
      }
    }
    ++report.records;
    Dialogue d;
    try {
      d = parse_record(j);
    } catch (const Error& e) {
      fail(lineno, e.what(), false, {});
      return;
    }
    auto expected = report.corpus.dataset ? report.corpus.dataset : requested;
    if (expected && d.source != *expected) {
      fail(lineno,
           "record source " + std::string(to_string(d.source)) + " does not match corpus dataset " +
               std::string(to_string(*expected)),
           false, {});
      return;
    }
    if (!ids.insert(d.id).second) {
      fail(lineno, "duplicate dialogue id '" + d.id + "'", true, d.id);
      return;
    }
    report.corpus.dialogues.push_back(std::move(d));
  }

  void run(std::istream& in) {
    report.corpus.dataset = requested;
    std::string buf;
    std::size_t lineno = 0;
    while (std::getline(in, buf)) line(++lineno, buf);
  }
};

}  // namespace

std::string_view to_string(Speaker s) { return s == Speaker::A ? "A" : "B"; }

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Raw: return "raw";
    case Stage::MappedLabels: return "mapped-labels";
    case Stage::Seed: return "seed";
    case Stage::Generated: return "generated";
    case Stage::Postprocessed: return "postprocessed";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : {Stage::Raw, Stage::MappedLabels, Stage::Seed, Stage::Generated,
                  Stage::Postprocessed}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

void advance_stage(Corpus& c, Stage to) {
  if (to < c.stage) {
    throw PreconditionError("cannot move corpus from stage " + std::string(to_string(c.stage)) +
                            " back to " + std::string(to_string(to)));
  }
  c.stage = to;
}

LabelSet canonical_labels(const Utterance& u) {
  LabelSet s;
  for (const auto& token : u.labels) {
    auto l = parse_canonical(token);
    if (!l) throw Error("label '" + token + "' is not canonical");
    s.insert(*l);
  }
  return s;
}

LabelCounts tally_labels(const Corpus& c) {
  LabelCounts counts{};
  for (const auto& d : c.dialogues) {
    for (const auto& u : d.utterances) {
      for (auto l : canonical_labels(u).labels()) ++counts[index_of(l)];
    }
  }
  return counts;
}

Corpus parse_corpus(std::istream& in, std::optional<DatasetId> dataset) {
  Parser p{dataset, false, {}, {}, true};
  p.run(in);
  return std::move(p.report.corpus);
}

Corpus parse_corpus(std::string_view text, std::optional<DatasetId> dataset) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in, dataset);
}

ParseReport parse_corpus_collect(std::istream& in, std::optional<DatasetId> dataset) {
  Parser p{dataset, true, {}, {}, true};
  p.run(in);
  return std::move(p.report);
}

Corpus read_corpus_file(const std::string& path, std::optional<DatasetId> dataset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return parse_corpus(in, dataset);
}

std::string dialogue_to_record(const Dialogue& d) { return to_json(d).dump(); }

Dialogue parse_dialogue_record(std::string_view record) {
  try {
    return parse_record(json::parse(record));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
}

void write_corpus(const Corpus& c, std::ostream& out) {
  json header = {{"format", kFormatTag},
                 {"version", kFormatVersion},
                 {"dataset", c.dataset ? json(std::string(to_string(*c.dataset))) : json(nullptr)},
                 {"stage", std::string(to_string(c.stage))}};
  out << header.dump() << '\n';
  for (const auto& d : c.dialogues) out << to_json(d).dump() << '\n';
  if (!out) throw Error("failed writing corpus");
}

std::string write_corpus(const Corpus& c) {
  std::ostringstream out;
  write_corpus(c, out);
  return out.str();
}

void write_corpus_file(const Corpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_corpus(c, out);
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

FilterResult filter_incomplete(const Corpus& c) {
  if (c.stage != Stage::Raw) {
    throw PreconditionError("filter_incomplete expects a raw corpus, got stage " +
                            std::string(to_string(c.stage)));
  }
  FilterResult r;
  r.corpus.dataset = c.dataset;
  r.corpus.stage = c.stage;
  for (const auto& d : c.dialogues) {
    bool keep = d.complete && d.utterances.size() >= 2;
    for (const auto& u : d.utterances) keep = keep && !u.labels.empty();
    if (keep) {
      r.corpus.dialogues.push_back(d);
    } else {
      ++r.removed;
    }
  }
  return r;
}

std::string normalized_text(const Dialogue& d) {
  std::string out;
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    if (i) out += '\n';
    out += collapse_whitespace(d.utterances[i].text);
  }
  return out;
}

}  // namespace gnome
