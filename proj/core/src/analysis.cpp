#include "gnome/analysis.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "gnome/error.hpp"
#include "gnome/text.hpp"

namespace gnome {

PrecomputedEmbeddings PrecomputedEmbeddings::parse(std::istream& in) {
  PrecomputedEmbeddings out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "expected title<TAB>vector");
    Embedding v;
    for (auto part : split(std::string_view(line).substr(tab + 1), ',')) {
      std::string token(trim(part));
      char* end = nullptr;
      double x = std::strtod(token.c_str(), &end);
      if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(x)) {
        throw ParseError(lineno, "bad vector component '" + token + "'");
      }
      v.push_back(x);
    }
    try {
      out.add(line.substr(0, tab), std::move(v));
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file '" + path + "'");
  return parse(in);
}

void PrecomputedEmbeddings::add(std::string title, Embedding v) {
  if (v.empty()) throw Error("empty embedding for '" + title + "'");
  if (dimension_ == 0) dimension_ = v.size();
  if (v.size() != dimension_) {
    throw Error("embedding for '" + title + "' has dimension " + std::to_string(v.size()) +
                ", expected " + std::to_string(dimension_));
  }
  table_[std::move(title)] = std::move(v);
}

std::vector<Embedding> PrecomputedEmbeddings::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) throw Error("no precomputed embedding for '" + t + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<Embedding> HashingEmbeddings::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::string s = " ";
    for (unsigned char c : t) s += static_cast<char>(std::tolower(c));
    s += ' ';
    Embedding v(dimension_, 0.0);
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
      v[fnv1a64(std::string_view(s).substr(i, 3)) % dimension_] += 1.0;
    }
    // Titles shorter than a trigram still need a nonzero vector.
    if (s.size() < 3) v[fnv1a64(s) % dimension_] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

void write_embeddings(std::span<const std::string> titles, std::span<const Embedding> vectors,
                      std::ostream& out) {
  char buf[32];
  for (std::size_t i = 0; i < titles.size(); ++i) {
    out << titles[i] << '\t';
    for (std::size_t k = 0; k < vectors[i].size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", vectors[i][k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
}

LabelCounts label_histogram(const Corpus& c) {
  if (c.stage < Stage::MappedLabels) {
    throw PreconditionError("label_histogram needs canonical labels; corpus is at stage " +
                            std::string(to_string(c.stage)));
  }
  return tally_labels(c);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine_similarity: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw Error("cosine_similarity: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

ClusterAssignment cluster_titles(std::span<const Embedding> vectors, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("cluster threshold must lie in (0, 1)");
  ClusterAssignment out;
  out.threshold = threshold;
  if (vectors.empty()) return out;

  const auto dim = vectors.front().size();
  std::vector<Embedding> unit;
  unit.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    if (v.size() != dim) throw Error("embedding " + std::to_string(i) + " has a different dimension");
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm == 0) throw Error("embedding " + std::to_string(i) + " is the zero vector");
    norm = std::sqrt(norm);
    Embedding u(v);
    for (double& x : u) x /= norm;
    unit.push_back(std::move(u));
  }

  out.cluster_of.resize(vectors.size());
  for (std::size_t i = 0; i < unit.size(); ++i) {
    std::size_t assigned = out.leaders.size();
    for (std::size_t c = 0; c < out.leaders.size(); ++c) {
      const auto& leader = unit[out.leaders[c]];
      double dot = 0;
      for (std::size_t k = 0; k < dim; ++k) dot += unit[i][k] * leader[k];
      if (dot >= threshold) {
        assigned = c;
        break;
      }
    }
    if (assigned == out.leaders.size()) out.leaders.push_back(i);
    out.cluster_of[i] = assigned;
  }
  return out;
}

ClusterAssignment cluster_domain_titles(std::vector<std::string> titles,
                                        EmbeddingProvider& provider, double threshold) {
  auto vectors = provider.embed(titles);
  auto out = cluster_titles(vectors, threshold);
  out.titles = std::move(titles);
  return out;
}

std::vector<std::string> domain_titles(const Corpus& generated) {
  std::vector<std::string> out;
  for (const auto& d : generated.dialogues) {
    if (d.provenance) out.push_back(d.provenance->domain_title);
  }
  return out;
}

}  // namespace gnome
