#include "gnome/labelmap.hpp"

#include <algorithm>
#include <ostream>

#include "gnome/error.hpp"

namespace gnome {

namespace {

struct Row {
  const char* raw;
  const char* target;  // as published; parsed through the canonical alias list
};

// Published mapping tables. Keys keep the source datasets' own spellings;
// targets keep the published spellings and are normalized by parse_label_list.
constexpr Row kCaSiNo[] = {
    {"Small-Talk", "Rapport"},
    {"Empathy", "Rapport"},
    {"Coordination", "Coordination"},
    {"No-Need", "Self-Interest"},
    {"Elicit-Pref", "Coordination"},
    {"Undervalue-Partner", "Assessment"},
    {"Vouch-Fairness", "Assessment"},
    {"Other-Need", "Self-Interest"},
    {"Non-strategic", "Non-strategic"},
};

constexpr Row kCraigslist[] = {
    {"intro", "Rapport"},
    {"propose", "Coordination"},
    {"vague-price", "Coordination"},
    {"counter", "Coordination"},
    {"inform", "Assessment"},
};

constexpr Row kPersuasion[] = {
    {"Negotiate-Price-NoChange", "Coordination"},
    {"Ask_Clarification-Y", "Self-Interest"},
    {"Provide_Clarification-Y", "Self-Interest"},
    {"tell_price", "Coordination"},
    {"Negotiate-Remove-delivery", "Coordination"},
    {"Ask_Price", "Coordination"},
    {"Negotiate-Price-Decrease", "Coordination"},
    {"Negotiate-Price-Increase", "Coordination"},
    {"Acknowledge acceptance", "Assessment"},
    {"Accept", "Assessment"},
    {"Negotiate-Remove-X", "Coordination"},
    {"Negotiate-Remove-X_Negotiate-Price-Decrease", "Coordination"},
    {"Negotiate-Price-Remove-X", "Coordination"},
    {"Negotiate-Add-X", "Coordination"},
    {"Reject", "Assessment"},
    {"Greet-Inform", "Rapport"},
    {"Greet-Ask", "Rapport"},
    {"Greet-Ask_Negotiate-Price-Decrease", "Rapport,Self-Interest"},
    {"Greet-Inform_Negotiate-Price-Increase", "Rapport,Self-Interest"},
    {"Greet-Inform_Negotiate-Price-NoChange", "Rapport,Self-Interest"},
    {"avoid_rejection", "Coordination"},
};

constexpr Row kJobInterview[] = {
    {"greet", "Rapport"},
    {"disagree", "Asessment"},
    {"agree", "Asessment"},
    {"inquire", "Coordination"},
    {"propose", "Coordination"},
    {"inform", "Asessment"},
};

template <std::size_t N>
LabelMapping build(DatasetId id, const Row (&rows)[N]) {
  LabelMapping m;
  m.dataset = id;
  for (const auto& r : rows) {
    auto set = parse_label_list(r.target);
    if (set.empty()) throw Error(std::string("empty mapping target for ") + r.raw);
    m.entries[r.raw] |= set;
  }
  return m;
}

}  // namespace

std::optional<LabelSet> LabelMapping::lookup(const std::string& raw) const {
  auto it = entries.find(raw);
  if (it != entries.end()) return it->second;
  auto alias = token_aliases.find(raw);
  if (alias != token_aliases.end()) {
    it = entries.find(alias->second);
    if (it != entries.end()) return it->second;
  }
  return std::nullopt;
}

const LabelMapping& mapping_for(DatasetId dataset) {
  static const LabelMapping casino = [] {
    auto m = build(DatasetId::CaSiNo, kCaSiNo);
    m.token_aliases["Undervalue- Partner"] = "Undervalue-Partner";
    return m;
  }();
  static const LabelMapping craigslist = build(DatasetId::CraigslistBargain, kCraigslist);
  static const LabelMapping persuasion = build(DatasetId::PersuasionForGood, kPersuasion);
  static const LabelMapping job = build(DatasetId::JobInterview, kJobInterview);

  switch (dataset) {
    case DatasetId::CaSiNo: return casino;
    case DatasetId::CraigslistBargain: return craigslist;
    case DatasetId::JobInterview: return job;
    case DatasetId::PersuasionForGood: return persuasion;
    case DatasetId::Gnome: break;
  }
  throw PreconditionError("no label mapping for Gnome: generated data is already canonical");
}

LabelMapResult map_corpus(const Corpus& c) {
  if (c.stage != Stage::Raw) {
    throw PreconditionError("map_corpus expects a raw corpus, got stage " +
                            std::string(to_string(c.stage)));
  }
  LabelMapResult r;
  r.corpus.dataset = c.dataset;
  r.corpus.stage = c.stage;
  advance_stage(r.corpus, Stage::MappedLabels);

  for (const auto& d : c.dialogues) {
    const auto& table = mapping_for(d.source);
    Dialogue out = d;
    out.utterances.clear();
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      const auto& u = d.utterances[i];
      LabelSet image;
      bool ok = true;
      for (const auto& token : u.labels) {
        if (auto set = table.lookup(token)) {
          image |= *set;
          continue;
        }
        ok = false;
        r.report.push_back({d.id, i, token});
        if (std::find(r.unmapped.begin(), r.unmapped.end(), token) == r.unmapped.end()) {
          r.unmapped.push_back(token);
        }
      }
      if (!ok || image.empty()) {
        ++r.utterances_excluded;
        continue;
      }
      Utterance mapped = u;
      mapped.labels.clear();
      for (auto l : image.labels()) mapped.labels.emplace_back(to_string(l));
      out.utterances.push_back(std::move(mapped));
    }
    if (out.utterances.empty()) {
      ++r.dialogues_emptied;
      continue;
    }
    r.corpus.dialogues.push_back(std::move(out));
  }
  return r;
}

void write_mapping_table(const LabelMapping& m, std::ostream& out) {
  for (const auto& [raw, set] : m.entries) out << raw << '\t' << set.to_string() << '\n';
}

}  // namespace gnome
