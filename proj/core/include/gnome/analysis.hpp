#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gnome/corpus.hpp"

namespace gnome {

using Embedding = std::vector<double>;

// Source of title embeddings.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
  virtual std::size_t dimension() const = 0;
};

// Vectors loaded from `title<TAB>v1,v2,...,vD` lines.
class PrecomputedEmbeddings : public EmbeddingProvider {
 public:
  static PrecomputedEmbeddings parse(std::istream& in);
  static PrecomputedEmbeddings load(const std::string& path);

  void add(std::string title, Embedding v);
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dimension_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, Embedding> table_;
  std::size_t dimension_ = 0;
};

// Offline fallback: hashed character trigrams of the lowercased title.
class HashingEmbeddings : public EmbeddingProvider {
 public:
  explicit HashingEmbeddings(std::size_t dimension = 256) : dimension_(dimension) {}
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
};

// OpenAI-compatible /v1/embeddings endpoint.
class HttpEmbeddings : public EmbeddingProvider {
 public:
  HttpEmbeddings(std::string endpoint, std::string model, std::string api_key = {},
                 std::string path = "/v1/embeddings");
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::string endpoint_, model_, api_key_, path_;
  std::size_t dimension_ = 0;
};

void write_embeddings(std::span<const std::string> titles, std::span<const Embedding> vectors,
                      std::ostream& out);

// Requires stage >= mapped-labels; counts (utterance, label) incidences.
LabelCounts label_histogram(const Corpus& c);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct ClusterAssignment {
  std::vector<std::string> titles;       // may be empty when clustering raw vectors
  std::vector<std::size_t> cluster_of;   // per input, dense ids from 0
  std::vector<std::size_t> leaders;      // input index of each cluster's leader
  double threshold = 0.8;

  std::size_t cluster_count() const { return leaders.size(); }
};

// Greedy leader clustering in input order: each vector joins the first
// cluster whose leader has cosine >= threshold, else it leads a new one.
// Throws on zero vectors, mixed dimensions, or threshold outside (0,1).
ClusterAssignment cluster_titles(std::span<const Embedding> vectors, double threshold);

ClusterAssignment cluster_domain_titles(std::vector<std::string> titles,
                                        EmbeddingProvider& provider, double threshold);

// Domain titles of generated dialogues, in corpus order.
std::vector<std::string> domain_titles(const Corpus& generated);

}  // namespace gnome
