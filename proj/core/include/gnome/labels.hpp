#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnome {

enum class DatasetId : std::uint8_t {
  CaSiNo,
  CraigslistBargain,
  JobInterview,
  PersuasionForGood,
  Gnome,  // reserved for generated data
};

inline constexpr std::array<DatasetId, 4> kSourceDatasets = {
    DatasetId::CaSiNo, DatasetId::CraigslistBargain, DatasetId::JobInterview,
    DatasetId::PersuasionForGood};

std::string_view to_string(DatasetId id);
std::optional<DatasetId> parse_dataset(std::string_view tag);

// The unified five-label strategy schema.
enum class CanonicalLabel : std::uint8_t {
  Rapport,
  Assessment,
  SelfInterest,
  Coordination,
  NonStrategic,
};

inline constexpr std::size_t kNumLabels = 5;

inline constexpr std::array<CanonicalLabel, kNumLabels> kAllLabels = {
    CanonicalLabel::Rapport, CanonicalLabel::Assessment, CanonicalLabel::SelfInterest,
    CanonicalLabel::Coordination, CanonicalLabel::NonStrategic};

constexpr std::size_t index_of(CanonicalLabel l) { return static_cast<std::size_t>(l); }

// Canonical spelling, e.g. "Self-Interest".
std::string_view to_string(CanonicalLabel l);

// Accepts canonical spellings plus the known variants ("Asessment",
// "Non-strategic", "SelfInterest", ...). Case-sensitive apart from the alias list.
std::optional<CanonicalLabel> parse_canonical(std::string_view name);

// Small value set over the five canonical labels.
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr LabelSet(std::initializer_list<CanonicalLabel> labels) {
    for (auto l : labels) insert(l);
  }

  static constexpr LabelSet from_bits(std::uint8_t bits) {
    LabelSet s;
    s.bits_ = static_cast<std::uint8_t>(bits & 0x1f);
    return s;
  }

  constexpr void insert(CanonicalLabel l) { bits_ |= bit(l); }
  constexpr void erase(CanonicalLabel l) { bits_ &= static_cast<std::uint8_t>(~bit(l)); }
  constexpr bool contains(CanonicalLabel l) const { return (bits_ & bit(l)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  std::size_t size() const;

  constexpr LabelSet operator|(LabelSet o) const { return from_bits(bits_ | o.bits_); }
  constexpr LabelSet& operator|=(LabelSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr bool operator==(const LabelSet&) const = default;

  std::vector<CanonicalLabel> labels() const;
  // Comma-joined canonical names in schema order.
  std::string to_string() const;

 private:
  static constexpr std::uint8_t bit(CanonicalLabel l) {
    return static_cast<std::uint8_t>(1u << index_of(l));
  }
  std::uint8_t bits_ = 0;
};

// Parses "Rapport,Self-Interest". Throws gnome::Error on unknown names.
LabelSet parse_label_list(std::string_view comma_separated);

// Per-label counters indexed by CanonicalLabel.
using LabelCounts = std::array<std::size_t, kNumLabels>;

}  // namespace gnome
