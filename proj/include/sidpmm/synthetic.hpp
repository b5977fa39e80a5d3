// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "sidpmm/corpus.hpp"
#include "sidpmm/eval.hpp"
#include "sidpmm/rng.hpp"
#include "sidpmm/vector_io.hpp"

namespace sidpmm {

// Labeled benchmark corpus: per-cluster vocabularies (disjoint unless a
// shared pool is configured) and Gaussian embedding clouds with unit
// within-cluster deviation, placed `separation` apart pairwise. Outlier
// documents carry their own one-off vocabulary but borrow the embedding
// cloud of a donor cluster, which is what makes them tell-tale for the
// regularization behaviour of the Gaussian channels.
struct SyntheticSpec {
  int clusters = 5;
  int docs_per_cluster = 200;
  int vocab_per_cluster = 30;
  int doc_len_min = 8;
  int doc_len_max = 16;
  double separation = 10.0;  // pairwise distance between cluster means, in sigmas
  double outlier_fraction = 0.0;
  int embed_dim = 8;
  int shared_vocab = 0;           // size of a pool shared by all clusters
  double shared_token_prob = 0.0; // chance a token comes from the pool
  uint64_t seed = 1;

  void validate() const {
    if (clusters < 1 || docs_per_cluster < 1 || vocab_per_cluster < 1)
      throw std::invalid_argument("SyntheticSpec: counts must be positive");
    if (doc_len_min < 1 || doc_len_max < doc_len_min)
      throw std::invalid_argument("SyntheticSpec: bad document length range");
    if (outlier_fraction < 0.0 || outlier_fraction >= 1.0)
      throw std::invalid_argument("SyntheticSpec: outlier fraction must be in [0, 1)");
    if (separation > 0.0 && embed_dim < clusters)
      throw std::invalid_argument("SyntheticSpec: embed_dim must be >= clusters for separated means");
    if (shared_token_prob < 0.0 || shared_token_prob > 1.0 ||
        (shared_token_prob > 0.0 && shared_vocab < 1))
      throw std::invalid_argument("SyntheticSpec: bad shared vocabulary settings");
  }
};

struct SyntheticCorpus {
  SyntheticSpec spec;
  std::vector<RawDocument> raw;            // labels carry the ground truth
  std::vector<Eigen::VectorXd> word_vecs;  // e_i per doc
  std::vector<Eigen::VectorXd> seq_vecs;   // s_i per doc
  std::vector<bool> outlier;
};

inline SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int total = spec.clusters * spec.docs_per_cluster;
  const int n_outliers = static_cast<int>(std::llround(spec.outlier_fraction * total));

  // Outlier slots: deterministic draw without replacement.
  std::vector<int> slots(total);
  std::iota(slots.begin(), slots.end(), 0);
  for (size_t i = slots.size(); i > 1; --i)
    std::swap(slots[i - 1], slots[rng.uniform_below(i)]);
  std::vector<bool> is_outlier(total, false);
  for (int i = 0; i < n_outliers; ++i) is_outlier[slots[i]] = true;

  // Cluster means: scaled axes give pairwise distance `separation`.
  std::vector<Eigen::VectorXd> means(spec.clusters, Eigen::VectorXd::Zero(spec.embed_dim));
  if (spec.separation > 0.0) {
    const double scale = spec.separation / std::sqrt(2.0);
    for (int k = 0; k < spec.clusters; ++k) means[k](k) = scale;
  }
  auto gaussian = [&](const Eigen::VectorXd& mean) {
    Eigen::VectorXd x(spec.embed_dim);
    for (int j = 0; j < spec.embed_dim; ++j) x(j) = mean(j) + rng.normal();
    return x;
  };

  SyntheticCorpus out;
  out.spec = spec;
  out.raw.reserve(total);
  out.word_vecs.reserve(total);
  out.seq_vecs.reserve(total);
  out.outlier.assign(total, false);
  for (int i = 0; i < total; ++i) {
    const int k = i / spec.docs_per_cluster;
    const int len = spec.doc_len_min +
                    static_cast<int>(rng.uniform_below(spec.doc_len_max - spec.doc_len_min + 1));
    RawDocument doc;
    doc.id = std::to_string(i + 1);
    std::string text;
    if (is_outlier[i]) {
      out.outlier[i] = true;
      doc.label = "outlier" + std::to_string(i);
      const int pool = std::min(len, 8);  // a few distinct one-off words
      for (int t = 0; t < len; ++t) {
        if (t) text += ' ';
        text += "o" + std::to_string(i) + "x" + std::to_string(rng.uniform_below(pool));
      }
      const int donor = static_cast<int>(rng.uniform_below(spec.clusters));
      out.word_vecs.push_back(gaussian(means[donor]));
      out.seq_vecs.push_back(gaussian(means[donor]));
    } else {
      doc.label = "c" + std::to_string(k);
      for (int t = 0; t < len; ++t) {
        if (t) text += ' ';
        const bool shared = spec.shared_token_prob > 0.0 && rng.uniform01() < spec.shared_token_prob;
        if (shared)
          text += "s" + std::to_string(rng.uniform_below(spec.shared_vocab));
        else
          text += "w" + std::to_string(k) + "x" + std::to_string(rng.uniform_below(spec.vocab_per_cluster));
      }
      out.word_vecs.push_back(gaussian(means[k]));
      out.seq_vecs.push_back(gaussian(means[k]));
    }
    doc.text = std::move(text);
    out.raw.push_back(std::move(doc));
  }
  return out;
}

// Writes corpus.tsv plus doc-keyed vector files and a generation manifest.
// Keys match the line-number ids that loading corpus.tsv will assign.
inline void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/corpus.tsv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/corpus.tsv");
    for (const auto& doc : corpus.raw) out << *doc.label << '\t' << doc.text << '\n';
  }
  std::vector<std::string> keys;
  keys.reserve(corpus.raw.size());
  for (const auto& doc : corpus.raw) keys.push_back(doc.id);
  write_vectors(dir + "/e_vectors.txt", keys, corpus.word_vecs);
  write_vectors(dir + "/s_vectors.txt", keys, corpus.seq_vecs);
  nlohmann::json manifest;
  manifest["clusters"] = corpus.spec.clusters;
  manifest["docs_per_cluster"] = corpus.spec.docs_per_cluster;
  manifest["vocab_per_cluster"] = corpus.spec.vocab_per_cluster;
  manifest["doc_len_min"] = corpus.spec.doc_len_min;
  manifest["doc_len_max"] = corpus.spec.doc_len_max;
  manifest["separation"] = corpus.spec.separation;
  manifest["outlier_fraction"] = corpus.spec.outlier_fraction;
  manifest["embed_dim"] = corpus.spec.embed_dim;
  manifest["shared_vocab"] = corpus.spec.shared_vocab;
  manifest["shared_token_prob"] = corpus.spec.shared_token_prob;
  manifest["seed"] = corpus.spec.seed;
  nlohmann::json outliers = nlohmann::json::array();
  for (size_t i = 0; i < corpus.outlier.size(); ++i)
    if (corpus.outlier[i]) outliers.push_back(corpus.raw[i].id);
  manifest["outlier_ids"] = outliers;
  manifest["documents"] = corpus.raw.size();
  std::ofstream mf(dir + "/generation_manifest.json");
  mf << manifest.dump(2) << '\n';
}

// In-memory conversion for tests and the sweep harness: tokenize, build the
// vocabulary, vectorize, attach (optionally standardized) embeddings.
struct SyntheticDataset {
  std::vector<Document> docs;
  std::vector<int> truth;
  Vocabulary vocab;
};

inline SyntheticDataset to_documents(const SyntheticCorpus& corpus,
                                     bool standardize_embeddings = true) {
  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(corpus.raw.size());
  for (const auto& doc : corpus.raw) token_lists.push_back(tokenize(doc.text));
  SyntheticDataset out{.docs = {}, .truth = {}, .vocab = Vocabulary::build(token_lists, 100000)};
  std::vector<Eigen::VectorXd> e = corpus.word_vecs, s = corpus.seq_vecs;
  if (standardize_embeddings) {
    standardize_vectors(e);
    standardize_vectors(s);
  }
  std::vector<std::string> labels;
  for (size_t i = 0; i < corpus.raw.size(); ++i) {
    Document doc;
    doc.counts = vectorize(token_lists[i], out.vocab);
    doc.word_embedding = e[i];
    doc.seq_embedding = s[i];
    out.docs.push_back(std::move(doc));
    labels.push_back(*corpus.raw[i].label);
  }
  out.truth = label_codes(labels);
  return out;
}

}  // namespace sidpmm
