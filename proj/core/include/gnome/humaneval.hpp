#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnome/corpus.hpp"
#include "gnome/error.hpp"
#include "gnome/seedselect.hpp"

namespace gnome {

struct DialoguePair {
  std::string pair_id;  // "pair-0001", in sample order
  Dialogue original;
  Dialogue mapped;
};

// Uniform sample without replacement from the (seed, generated) pairs.
// Throws PreconditionError if m exceeds the population or a generated
// dialogue points at a seed that is not in `seed`.
std::vector<DialoguePair> sample_pairs(const SeedDataset& seed, const Corpus& generated,
                                       std::size_t m, std::uint64_t rng_seed);

void write_pairs(std::span<const DialoguePair> pairs, std::ostream& out);
std::vector<DialoguePair> read_pairs(std::istream& in);

struct RatingRecord {
  std::string pair_id;
  std::string annotator_id;
  int structural_similarity = 0;  // 1..5
  int coherence = 0;              // 1..5
  std::string timestamp;          // ISO-8601 UTC

  bool operator==(const RatingRecord&) const = default;
};

// Throws PreconditionError on empty ids or scores outside 1..5.
void validate(const RatingRecord& r);
std::string to_log_line(const RatingRecord& r);  // one JSON object, no newline
RatingRecord parse_log_line(std::string_view line);

// Keeps the last record per (pair, annotator); output sorted by (pair, annotator).
std::vector<RatingRecord> latest_ratings(std::span<const RatingRecord> log);

// Append-only JSONL rating log. Existing content is loaded on open.
class RatingLog {
 public:
  // Empty path keeps the log in memory only.
  explicit RatingLog(std::filesystem::path path = {});

  void append(const RatingRecord& r);
  std::vector<RatingRecord> records() const;
  std::string raw() const;  // exact log text

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<RatingRecord> records_;
  std::string raw_;
};

// annotator x item; nullopt marks a missing rating.
using RatingMatrix = std::vector<std::vector<std::optional<double>>>;

enum class AlphaMetric { Interval, Ordinal };

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Krippendorff's alpha over the coincidence matrix. Needs at least two items
// with two or more ratings (InsufficientData otherwise); returns 1.0 when the
// pooled values show no expected disagreement. Rows must have equal length.
double krippendorff_alpha(const RatingMatrix& ratings, AlphaMetric metric = AlphaMetric::Interval);

enum class RatingDimension { StructuralSimilarity, Coherence };

// Rows are annotators and columns pairs, both in ascending id order.
RatingMatrix rating_matrix(std::span<const RatingRecord> latest, RatingDimension dim);

enum class AgreementDefinition {
  AllExact,   // every rater of the item gave the same score
  Pairwise,   // mean fraction of agreeing rater pairs per item
  WithinOne,  // all scores of the item lie within one point
};

struct AgreementOptions {
  AlphaMetric metric = AlphaMetric::Interval;
  AgreementDefinition agreement = AgreementDefinition::AllExact;
};

struct AgreementReport {
  std::optional<double> alpha_similarity;  // nullopt without enough pairable data
  std::optional<double> alpha_coherence;
  double avg_similarity = 0.0;
  double avg_coherence = 0.0;
  double pct_agreement_similarity = 0.0;
  double pct_agreement_coherence = 0.0;
  std::size_t records = 0;  // after last-write-wins
  std::size_t items = 0;
  std::size_t annotators = 0;
};

// Collapses the log (last write wins) and summarizes it. Throws
// PreconditionError on an empty log.
AgreementReport agreement_stats(std::span<const RatingRecord> ratings,
                                const AgreementOptions& options = {});
std::string agreement_json(const AgreementReport& r);

// Transport-free request handling for the annotation service.
struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class RatingService {
 public:
  using Clock = std::function<std::string()>;

  RatingService(std::vector<DialoguePair> pairs, RatingLog& log, AgreementOptions options = {},
                Clock clock = {});

  ServiceResponse next_pair(std::string_view annotator) const;  // GET /api/pairs/next
  ServiceResponse post_rating(std::string_view body);           // POST /api/ratings
  ServiceResponse stats() const;                                // GET /api/stats
  ServiceResponse export_log() const;                           // GET /api/export

  const std::vector<DialoguePair>& pairs() const { return pairs_; }

 private:
  std::vector<DialoguePair> pairs_;
  RatingLog& log_;
  AgreementOptions options_;
  Clock clock_;
};

std::string utc_timestamp();

// HTTP front end over a RatingService. Port 0 binds an ephemeral port.
class RatingServer {
 public:
  RatingServer(RatingService& service, std::string static_dir = {});
  ~RatingServer();
  RatingServer(const RatingServer&) = delete;
  RatingServer& operator=(const RatingServer&) = delete;

  // Binds and returns the port; throws gnome::Error if binding fails.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gnome
