#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnome/corpus.hpp"
#include "gnome/model.hpp"

namespace gnome {

struct Split {
  Corpus train;
  Corpus validation;
};

// Dialogue-level split: |train| = round(ratio * |c|), shuffled with a
// seeded generator. Throws on an empty corpus or ratio outside (0,1).
Split split(const Corpus& c, double ratio, std::uint64_t seed);

// Support-weighted mean of per-label binary F1 over the five labels;
// labels without gold support are skipped.
double weighted_f1(std::span<const LabelSet> gold, std::span<const LabelSet> pred);

// Per label: fraction of instances whose presence indicator agrees.
std::array<double, kNumLabels> classwise_joint_accuracy(std::span<const LabelSet> gold,
                                                        std::span<const LabelSet> pred);

double macro_mean(const std::array<double, kNumLabels>& per_class);

enum class Regime : std::uint8_t {
  InDomain,
  SyntheticInDomain,
  OutOfDomain,
  SyntheticOutOfDomain,
  LeaveOneOut,
  SyntheticLeaveOneOut,
};
inline constexpr std::array<Regime, 6> kAllRegimes = {
    Regime::InDomain,    Regime::SyntheticInDomain,    Regime::OutOfDomain,
    Regime::SyntheticOutOfDomain, Regime::LeaveOneOut, Regime::SyntheticLeaveOneOut};

std::string_view to_string(Regime r);
bool is_synthetic(Regime r);

// In-domain regimes pool all four sources on both sides (one pair each);
// out-of-domain runs every ordered pair; leave-one-out every holdout.
struct ExperimentSpec {
  Regime regime = Regime::InDomain;
  std::set<DatasetId> train_sources;
  std::set<DatasetId> test_sources;

  // Throws PreconditionError when the sources do not fit the regime.
  void validate() const;
  std::string describe() const;  // e.g. "GNOME(CaSiNo) -> JobInterview"
};

// 1 + 1 + 12 + 12 + 4 + 4 pairs, in regime order.
std::vector<ExperimentSpec> experiment_matrix();

struct PairResult {
  ExperimentSpec spec;
  double weighted_f1 = 0.0;
  std::array<double, kNumLabels> class_accuracy{};
  std::size_t train_dialogues = 0;
  std::size_t test_utterances = 0;
};

struct RegimeSummary {
  Regime regime = Regime::InDomain;
  std::size_t pairs = 0;
  double mean_f1 = 0.0;
  std::array<double, kNumLabels> mean_class_accuracy{};
};

struct MatrixResult {
  std::vector<PairResult> pairs;
  std::vector<RegimeSummary> summaries;  // one per regime, in regime order
};

struct MatrixOptions {
  double ratio = 0.6;
  std::uint64_t split_seed = 0;
  // Drop seed dialogues (found through generated provenance) from every test split.
  bool exclude_seed_from_test = true;
};

// Runs the six-regime experiment. `sources` must hold the four source corpora
// at mapped-labels; `gnome` is the post-processed generated corpus.
MatrixResult run_matrix(const std::map<DatasetId, Corpus>& sources, const Corpus& gnome,
                        const ModelFactory& make_model, const MatrixOptions& options = {});

// Table laid out like the published results: experiment, fine-tune -> test, F1.
void write_results_table(const MatrixResult& r, std::ostream& out);
std::string results_json(const MatrixResult& r);

// External predictions: `dialogue_id<TAB>utterance_index<TAB>labels` rows.
struct Prediction {
  std::string dialogue_id;
  std::size_t utterance_index = 0;
  LabelSet labels;
};
std::vector<Prediction> parse_predictions(std::istream& in);
void write_predictions(std::span<const Prediction> predictions, std::ostream& out);

struct ScoreReport {
  std::size_t instances = 0;
  double weighted_f1 = 0.0;
  std::array<double, kNumLabels> class_accuracy{};
};

// Aligns predictions to every utterance of the gold corpus. Missing,
// duplicate, or unknown rows are errors.
ScoreReport score_predictions(const Corpus& gold, std::span<const Prediction> predictions);
void write_score_report(const ScoreReport& r, std::ostream& out);

}  // namespace gnome
