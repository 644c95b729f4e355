#include "gnome/postproc.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_set>

#include "gnome/error.hpp"

namespace gnome {

PostprocCounts& PostprocCounts::operator+=(const PostprocCounts& o) {
  input += o.input;
  dropped_short += o.dropped_short;
  duplicates_removed += o.duplicates_removed;
  leakage_removed += o.leakage_removed;
  kept += o.kept;
  return *this;
}

namespace {

Corpus empty_like(const Corpus& c) {
  Corpus out;
  out.dataset = c.dataset;
  out.stage = c.stage;
  return out;
}

const Provenance& provenance_of(const Dialogue& d) {
  if (!d.provenance) throw Error("generated dialogue '" + d.id + "' has no seed provenance");
  return *d.provenance;
}

bool generation_order(const Dialogue& a, const Dialogue& b) {
  const auto& pa = provenance_of(a);
  const auto& pb = provenance_of(b);
  return std::tie(pa.seed_id, pa.generation_index, pa.seed_source, a.id) <
         std::tie(pb.seed_id, pb.generation_index, pb.seed_source, b.id);
}

DatasetId seed_source_of(const Dialogue& d) { return provenance_of(d).seed_source; }

}  // namespace

StepResult drop_short(const Corpus& generated, const SeedDataset& seed) {
  StepResult r{empty_like(generated), 0};
  for (const auto& d : generated.dialogues) {
    const auto& p = provenance_of(d);
    const Dialogue* original = seed.find(p.seed_source, p.seed_id);
    if (!original) {
      throw Error("generated dialogue '" + d.id + "' refers to unknown seed '" + p.seed_id + "' (" +
                  std::string(to_string(p.seed_source)) + ")");
    }
    if (d.utterances.size() == original->utterances.size()) {
      r.corpus.dialogues.push_back(d);
    } else {
      ++r.removed;
    }
  }
  return r;
}

StepResult dedup(const Corpus& generated) {
  std::vector<const Dialogue*> order;
  order.reserve(generated.dialogues.size());
  for (const auto& d : generated.dialogues) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(),
                   [](const Dialogue* a, const Dialogue* b) { return generation_order(*a, *b); });

  StepResult r{empty_like(generated), 0};
  std::unordered_set<std::string> seen;
  for (const auto* d : order) {
    if (seen.insert(normalized_text(*d)).second) {
      r.corpus.dialogues.push_back(*d);
    } else {
      ++r.removed;
    }
  }
  return r;
}

StepResult remove_leakage(const Corpus& generated, const SeedDataset& seed) {
  std::unordered_set<std::string> seed_texts;
  for (const auto& [_, list] : seed.per_source) {
    for (const auto& sd : list) seed_texts.insert(normalized_text(sd.dialogue));
  }
  StepResult r{empty_like(generated), 0};
  for (const auto& d : generated.dialogues) {
    if (seed_texts.contains(normalized_text(d))) {
      ++r.removed;
    } else {
      r.corpus.dialogues.push_back(d);
    }
  }
  return r;
}

namespace {

std::map<DatasetId, std::size_t> count_by_source(const Corpus& c) {
  std::map<DatasetId, std::size_t> out;
  for (const auto& d : c.dialogues) ++out[seed_source_of(d)];
  return out;
}

}  // namespace

PostprocResult postprocess(const Corpus& generated, const SeedDataset& seed) {
  PostprocResult result;
  auto& report = result.report;

  auto in = count_by_source(generated);
  auto after_short = drop_short(generated, seed);
  auto n_short = count_by_source(after_short.corpus);
  auto after_dedup = dedup(after_short.corpus);
  auto n_dedup = count_by_source(after_dedup.corpus);
  auto after_leak = remove_leakage(after_dedup.corpus, seed);
  auto n_kept = count_by_source(after_leak.corpus);

  for (const auto& [source, _] : seed.per_source) report.per_source[source];
  for (const auto& [source, n] : in) {
    auto& row = report.per_source[source];
    row.input = n;
    row.dropped_short = n - n_short[source];
    row.duplicates_removed = n_short[source] - n_dedup[source];
    row.leakage_removed = n_dedup[source] - n_kept[source];
    row.kept = n_kept[source];
  }
  for (const auto& [_, row] : report.per_source) report.total += row;

  result.corpus = std::move(after_leak.corpus);
  advance_stage(result.corpus, Stage::Postprocessed);
  return result;
}

}  // namespace gnome
