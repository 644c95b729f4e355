#include "gnome/humaneval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "gnome/error.hpp"
#include "gnome/random.hpp"
#include "gnome/text.hpp"

namespace gnome {

using nlohmann::json;

std::vector<DialoguePair> sample_pairs(const SeedDataset& seed, const Corpus& generated,
                                       std::size_t m, std::uint64_t rng_seed) {
  std::vector<std::size_t> population;
  for (std::size_t i = 0; i < generated.dialogues.size(); ++i) {
    const auto& d = generated.dialogues[i];
    if (!d.provenance) throw PreconditionError("generated dialogue '" + d.id + "' has no provenance");
    if (!seed.find(d.provenance->seed_source, d.provenance->seed_id)) {
      throw PreconditionError("generated dialogue '" + d.id + "' refers to unknown seed '" +
                              d.provenance->seed_id + "'");
    }
    population.push_back(i);
  }
  if (m > population.size()) {
    throw PreconditionError("cannot sample " + std::to_string(m) + " pairs from " +
                            std::to_string(population.size()));
  }
  std::mt19937_64 rng(rng_seed);
  partial_shuffle(std::span<std::size_t>(population), m, rng);

  std::vector<DialoguePair> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& mapped = generated.dialogues[population[i]];
    char id[32];
    std::snprintf(id, sizeof id, "pair-%04zu", i + 1);
    out.push_back({id, *seed.find(mapped.provenance->seed_source, mapped.provenance->seed_id), mapped});
  }
  return out;
}

void write_pairs(std::span<const DialoguePair> pairs, std::ostream& out) {
  for (const auto& p : pairs) {
    json j = {{"pair_id", p.pair_id},
              {"original", json::parse(dialogue_to_record(p.original))},
              {"mapped", json::parse(dialogue_to_record(p.mapped))}};
    out << j.dump() << '\n';
  }
}

std::vector<DialoguePair> read_pairs(std::istream& in) {
  std::vector<DialoguePair> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      DialoguePair p;
      p.pair_id = j.at("pair_id").get<std::string>();
      p.original = parse_dialogue_record(j.at("original").dump());
      p.mapped = parse_dialogue_record(j.at("mapped").dump());
      if (!ids.insert(p.pair_id).second) throw Error("duplicate pair id '" + p.pair_id + "'");
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

void validate(const RatingRecord& r) {
  if (r.pair_id.empty()) throw PreconditionError("pair_id is empty");
  if (r.annotator_id.empty()) throw PreconditionError("annotator_id is empty");
  if (r.structural_similarity < 1 || r.structural_similarity > 5) {
    throw PreconditionError("structural_similarity must be an integer in 1..5");
  }
  if (r.coherence < 1 || r.coherence > 5) throw PreconditionError("coherence must be an integer in 1..5");
}

std::string to_log_line(const RatingRecord& r) {
  json j = {{"pair_id", r.pair_id},
            {"annotator_id", r.annotator_id},
            {"structural_similarity", r.structural_similarity},
            {"coherence", r.coherence},
            {"timestamp", r.timestamp}};
  return j.dump();
}

namespace {

int likert_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw PreconditionError(std::string(key) + " must be an integer in 1..5");
  return v.get<int>();
}

std::string string_field(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw PreconditionError(std::string(key) + " must be a string");
  return v.get<std::string>();
}

}  // namespace

RatingRecord parse_log_line(std::string_view line) {
  try {
    auto j = json::parse(line);
    RatingRecord r;
    r.pair_id = string_field(j, "pair_id");
    r.annotator_id = string_field(j, "annotator_id");
    r.structural_similarity = likert_field(j, "structural_similarity");
    r.coherence = likert_field(j, "coherence");
    r.timestamp = j.contains("timestamp") ? string_field(j, "timestamp") : std::string();
    validate(r);
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed rating record: ") + e.what());
  }
}

std::vector<RatingRecord> latest_ratings(std::span<const RatingRecord> log) {
  std::map<std::pair<std::string, std::string>, RatingRecord> last;
  for (const auto& r : log) last[{r.pair_id, r.annotator_id}] = r;
  std::vector<RatingRecord> out;
  out.reserve(last.size());
  for (auto& [_, r] : last) out.push_back(std::move(r));
  return out;
}

RatingLog::RatingLog(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error("cannot open rating log " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      records_.push_back(parse_log_line(line));
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    raw_ += line;
    raw_ += '\n';
  }
}

void RatingLog::append(const RatingRecord& r) {
  validate(r);
  auto line = to_log_line(r) + '\n';
  std::lock_guard lock(mu_);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << line;
    out.flush();
    if (!out) throw Error("failed appending to rating log " + path_.string());
  }
  records_.push_back(r);
  raw_ += line;
}

std::vector<RatingRecord> RatingLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::string RatingLog::raw() const {
  std::lock_guard lock(mu_);
  return raw_;
}

double krippendorff_alpha(const RatingMatrix& ratings, AlphaMetric metric) {
  const std::size_t items = ratings.empty() ? 0 : ratings.front().size();
  for (const auto& row : ratings) {
    if (row.size() != items) throw PreconditionError("rating matrix rows differ in length");
  }

  // Distinct values and the per-item value lists of pairable items.
  std::vector<double> values;
  std::vector<std::vector<double>> units;
  for (std::size_t i = 0; i < items; ++i) {
    std::vector<double> unit;
    for (const auto& row : ratings) {
      if (row[i]) {
        if (!std::isfinite(*row[i])) throw PreconditionError("ratings must be finite");
        unit.push_back(*row[i]);
      }
    }
    if (unit.size() < 2) continue;
    values.insert(values.end(), unit.begin(), unit.end());
    units.push_back(std::move(unit));
  }
  if (units.size() < 2) throw InsufficientData("alpha needs at least two items with two or more ratings");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t v = values.size();
  auto index = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), x) - values.begin());
  };

  std::vector<double> o(v * v, 0.0);
  for (const auto& unit : units) {
    const double w = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t a = 0; a < unit.size(); ++a) {
      for (std::size_t b = 0; b < unit.size(); ++b) {
        if (a != b) o[index(unit[a]) * v + index(unit[b])] += w;
      }
    }
  }
  std::vector<double> nc(v, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) nc[c] += o[c * v + k];
    n += nc[c];
  }

  auto delta = [&](std::size_t c, std::size_t k) {
    if (metric == AlphaMetric::Interval) {
      const double d = values[c] - values[k];
      return d * d;
    }
    auto [lo, hi] = std::minmax(c, k);
    double s = 0.0;
    for (std::size_t g = lo; g <= hi; ++g) s += nc[g];
    s -= (nc[lo] + nc[hi]) / 2.0;
    return s * s;
  };

  double d_o = 0.0, d_e = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) {
      if (c == k) continue;
      const double dist = delta(c, k);
      d_o += o[c * v + k] * dist;
      d_e += nc[c] * nc[k] * dist;
    }
  }
  d_o /= n;
  d_e /= n * (n - 1.0);
  if (d_e == 0.0) return 1.0;
  return 1.0 - d_o / d_e;
}

RatingMatrix rating_matrix(std::span<const RatingRecord> latest, RatingDimension dim) {
  std::map<std::string, std::size_t> annotators, items;
  for (const auto& r : latest) {
    annotators.emplace(r.annotator_id, 0);
    items.emplace(r.pair_id, 0);
  }
  std::size_t i = 0;
  for (auto& [_, idx] : annotators) idx = i++;
  i = 0;
  for (auto& [_, idx] : items) idx = i++;
  RatingMatrix m(annotators.size(), std::vector<std::optional<double>>(items.size()));
  for (const auto& r : latest) {
    m[annotators[r.annotator_id]][items[r.pair_id]] =
        dim == RatingDimension::StructuralSimilarity ? r.structural_similarity : r.coherence;
  }
  return m;
}

namespace {

double item_agreement(const std::vector<int>& scores, AgreementDefinition def) {
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  switch (def) {
    case AgreementDefinition::AllExact: return *lo == *hi ? 1.0 : 0.0;
    case AgreementDefinition::WithinOne: return *hi - *lo <= 1 ? 1.0 : 0.0;
    case AgreementDefinition::Pairwise: {
      if (scores.size() < 2) return 1.0;
      std::size_t agree = 0, total = 0;
      for (std::size_t a = 0; a < scores.size(); ++a) {
        for (std::size_t b = a + 1; b < scores.size(); ++b) {
          ++total;
          agree += scores[a] == scores[b];
        }
      }
      return static_cast<double>(agree) / static_cast<double>(total);
    }
  }
  return 0.0;
}

std::optional<double> alpha_or_null(const RatingMatrix& m, AlphaMetric metric) {
  try {
    return krippendorff_alpha(m, metric);
  } catch (const InsufficientData&) {
    return std::nullopt;
  }
}

}  // namespace

AgreementReport agreement_stats(std::span<const RatingRecord> ratings, const AgreementOptions& options) {
  if (ratings.empty()) throw PreconditionError("agreement_stats needs at least one rating");
  const auto latest = latest_ratings(ratings);

  AgreementReport r;
  r.records = latest.size();
  std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> by_item;
  std::set<std::string> annotators;
  double sum_s = 0.0, sum_c = 0.0;
  for (const auto& rec : latest) {
    sum_s += rec.structural_similarity;
    sum_c += rec.coherence;
    by_item[rec.pair_id].first.push_back(rec.structural_similarity);
    by_item[rec.pair_id].second.push_back(rec.coherence);
    annotators.insert(rec.annotator_id);
  }
  r.items = by_item.size();
  r.annotators = annotators.size();
  r.avg_similarity = sum_s / static_cast<double>(latest.size());
  r.avg_coherence = sum_c / static_cast<double>(latest.size());

  double agree_s = 0.0, agree_c = 0.0;
  for (const auto& [_, scores] : by_item) {
    agree_s += item_agreement(scores.first, options.agreement);
    agree_c += item_agreement(scores.second, options.agreement);
  }
  r.pct_agreement_similarity = agree_s / static_cast<double>(r.items);
  r.pct_agreement_coherence = agree_c / static_cast<double>(r.items);

  r.alpha_similarity = alpha_or_null(rating_matrix(latest, RatingDimension::StructuralSimilarity), options.metric);
  r.alpha_coherence = alpha_or_null(rating_matrix(latest, RatingDimension::Coherence), options.metric);
  return r;
}

std::string agreement_json(const AgreementReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"alpha_similarity", opt(r.alpha_similarity)},
            {"alpha_coherence", opt(r.alpha_coherence)},
            {"avg_similarity", r.avg_similarity},
            {"avg_coherence", r.avg_coherence},
            {"pct_agreement_similarity", r.pct_agreement_similarity},
            {"pct_agreement_coherence", r.pct_agreement_coherence},
            {"records", r.records},
            {"items", r.items},
            {"annotators", r.annotators}};
  return j.dump();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

namespace {

ServiceResponse error_response(int status, const std::string& message) {
  return {status, "application/json", json{{"error", message}}.dump()};
}

// Speaker-tagged turns only; labels stay hidden from raters.
json turns(const Dialogue& d) {
  json out = json::array();
  for (const auto& u : d.utterances) {
    out.push_back({{"speaker", std::string(to_string(u.speaker))}, {"text", u.text}});
  }
  return out;
}

}  // namespace

RatingService::RatingService(std::vector<DialoguePair> pairs, RatingLog& log, AgreementOptions options,
                             Clock clock)
    : pairs_(std::move(pairs)), log_(log), options_(options), clock_(std::move(clock)) {
  if (!clock_) clock_ = utc_timestamp;
}

ServiceResponse RatingService::next_pair(std::string_view annotator) const {
  if (trim(annotator).empty()) return error_response(400, "missing annotator id");
  std::set<std::string> rated;
  for (const auto& r : log_.records()) {
    if (r.annotator_id == annotator) rated.insert(r.pair_id);
  }
  std::size_t done = 0;
  for (const auto& p : pairs_) {
    if (rated.contains(p.pair_id)) {
      ++done;
      continue;
    }
    json j = {{"done", false},
              {"pair_id", p.pair_id},
              {"progress", {{"rated", done}, {"total", pairs_.size()}}},
              {"original", {{"source", std::string(to_string(p.original.source))}, {"turns", turns(p.original)}}},
              {"mapped",
               {{"domain", p.mapped.provenance ? p.mapped.provenance->domain_title : std::string()},
                {"turns", turns(p.mapped)}}}};
    return {200, "application/json", j.dump()};
  }
  return {200, "application/json",
          json{{"done", true}, {"progress", {{"rated", done}, {"total", pairs_.size()}}}}.dump()};
}

ServiceResponse RatingService::post_rating(std::string_view body) {
  RatingRecord r;
  try {
    auto j = json::parse(body);
    if (!j.is_object()) return error_response(400, "body must be a JSON object");
    r.pair_id = string_field(j, "pair_id");
    r.annotator_id = string_field(j, "annotator_id");
    r.structural_similarity = likert_field(j, "structural_similarity");
    r.coherence = likert_field(j, "coherence");
    validate(r);
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed rating: ") + e.what());
  } catch (const PreconditionError& e) {
    return error_response(400, e.what());
  }
  const bool known = std::any_of(pairs_.begin(), pairs_.end(),
                                 [&](const DialoguePair& p) { return p.pair_id == r.pair_id; });
  if (!known) return error_response(404, "unknown pair_id '" + r.pair_id + "'");
  r.timestamp = clock_();
  log_.append(r);
  return {200, "application/json", to_log_line(r)};
}

ServiceResponse RatingService::stats() const {
  const auto records = log_.records();
  if (records.empty()) {
    return {200, "application/json", json{{"records", 0}, {"items", 0}, {"annotators", 0}}.dump()};
  }
  return {200, "application/json", agreement_json(agreement_stats(records, options_))};
}

ServiceResponse RatingService::export_log() const { return {200, "application/x-ndjson", log_.raw()}; }

}  // namespace gnome
