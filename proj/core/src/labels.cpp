#include "gnome/labels.hpp"

#include <bit>

#include "gnome/error.hpp"
#include "gnome/text.hpp"

namespace gnome {

std::string_view to_string(DatasetId id) {
  switch (id) {
    case DatasetId::CaSiNo: return "CaSiNo";
    case DatasetId::CraigslistBargain: return "CraigslistBargain";
    case DatasetId::JobInterview: return "JobInterview";
    case DatasetId::PersuasionForGood: return "PersuasionForGood";
    case DatasetId::Gnome: return "Gnome";
  }
  return "?";
}

std::optional<DatasetId> parse_dataset(std::string_view tag) {
  for (auto id : {DatasetId::CaSiNo, DatasetId::CraigslistBargain, DatasetId::JobInterview,
                  DatasetId::PersuasionForGood, DatasetId::Gnome}) {
    if (tag == to_string(id)) return id;
  }
  return std::nullopt;
}

std::string_view to_string(CanonicalLabel l) {
  switch (l) {
    case CanonicalLabel::Rapport: return "Rapport";
    case CanonicalLabel::Assessment: return "Assessment";
    case CanonicalLabel::SelfInterest: return "Self-Interest";
    case CanonicalLabel::Coordination: return "Coordination";
    case CanonicalLabel::NonStrategic: return "Non-Strategic";
  }
  return "?";
}

namespace {

struct Alias {
  std::string_view spelling;
  CanonicalLabel label;
};

// Variant spellings seen in the published mapping tables.
constexpr Alias kAliases[] = {
    {"Asessment", CanonicalLabel::Assessment},
    {"Non-strategic", CanonicalLabel::NonStrategic},
    {"NonStrategic", CanonicalLabel::NonStrategic},
    {"Non-Strategic", CanonicalLabel::NonStrategic},
    {"SelfInterest", CanonicalLabel::SelfInterest},
    {"Self-interest", CanonicalLabel::SelfInterest},
};

}  // namespace

std::optional<CanonicalLabel> parse_canonical(std::string_view name) {
  for (auto l : kAllLabels) {
    if (name == to_string(l)) return l;
  }
  for (const auto& a : kAliases) {
    if (name == a.spelling) return a.label;
  }
  return std::nullopt;
}

std::size_t LabelSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<CanonicalLabel> LabelSet::labels() const {
  std::vector<CanonicalLabel> out;
  for (auto l : kAllLabels) {
    if (contains(l)) out.push_back(l);
  }
  return out;
}

std::string LabelSet::to_string() const {
  std::string out;
  for (auto l : labels()) {
    if (!out.empty()) out += ',';
    out += gnome::to_string(l);
  }
  return out;
}

LabelSet parse_label_list(std::string_view comma_separated) {
  LabelSet set;
  for (auto part : split(comma_separated, ',')) {
    auto name = trim(part);
    if (name.empty()) continue;
    auto label = parse_canonical(name);
    if (!label) throw Error("unknown canonical label '" + std::string(name) + "'");
    set.insert(*label);
  }
  return set;
}

}  // namespace gnome
