// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sidpmm/corpus.hpp"
#include "sidpmm/dirichlet_multinomial.hpp"
#include "sidpmm/niw.hpp"

namespace sidpmm {

struct Channels {
  bool words = true;
  bool seq = true;
  bool embed = true;

  bool any() const { return words || seq || embed; }

  std::string to_string() const {
    std::string s;
    if (words) s += "words,";
    if (seq) s += "seq,";
    if (embed) s += "embed,";
    if (!s.empty()) s.pop_back();
    return s;
  }

  static Channels parse(const std::string& spec) {
    Channels c{false, false, false};
    for (const auto& part : split(spec, ',')) {
      std::string p = trim(part);
      if (p == "words") c.words = true;
      else if (p == "seq") c.seq = true;
      else if (p == "embed") c.embed = true;
      else if (!p.empty()) throw std::invalid_argument("unknown channel: " + p);
    }
    return c;
  }
};

struct ModelConfig {
  double alpha = 1.0;  // CRP concentration, resolved to an absolute value
  double beta = 0.1;   // per-term Dirichlet concentration, resolved
  int vocab_size = 0;  // V; 0 = infer from the corpus
  NiwHyper hyper_s;
  NiwHyper hyper_e;
  Channels channels;
  int sweeps = 30;
  uint64_t seed = 1;
  bool diagonal_cov = false;
  double early_stop_frac = 0.001;  // stop when fewer docs than this move
  bool shuffle_order = false;

  // alpha = 0.1 D, beta = 0.002 V, standard NiW priors per channel.
  static ModelConfig defaults(int64_t num_docs, int vocab_size, int dim_s, int dim_e) {
    ModelConfig c;
    c.alpha = 0.1 * static_cast<double>(num_docs);
    c.beta = 0.002 * static_cast<double>(vocab_size);
    c.vocab_size = vocab_size;
    if (dim_s > 0) c.hyper_s = NiwHyper::standard(dim_s);
    if (dim_e > 0) c.hyper_e = NiwHyper::standard(dim_e);
    return c;
  }

  void validate() const {
    if (alpha <= 0.0) throw std::invalid_argument("ModelConfig: alpha must be > 0");
    if (channels.words && beta <= 0.0)
      throw std::invalid_argument("ModelConfig: beta must be > 0");
    if (!channels.any()) throw std::invalid_argument("ModelConfig: no channel enabled");
    if (sweeps < 0) throw std::invalid_argument("ModelConfig: sweeps must be >= 0");
  }
};

// Read-only view of the channel statistics a predictive is evaluated
// against; either a live cluster or the prior (empty-cluster) state.
struct ChannelStatsView {
  const MultinomialStats* mult = nullptr;
  const NiwStats* niw_s = nullptr;
  const NiwStats* niw_e = nullptr;
};

// One live cluster: member bookkeeping plus the sufficient statistics of the
// multinomial channel and the two Gaussian channels.
struct ClusterState {
  int id = -1;
  std::vector<int> members;  // document indices, in insertion order
  MultinomialStats mult;
  NiwStats niw_s;
  NiwStats niw_e;

  int64_t size() const { return static_cast<int64_t>(members.size()); }

  ChannelStatsView view(const Channels& ch) const {
    ChannelStatsView v;
    if (ch.words) v.mult = &mult;
    if (ch.seq) v.niw_s = &niw_s;
    if (ch.embed) v.niw_e = &niw_e;
    return v;
  }
};

struct ModelState {
  std::map<int, ClusterState> clusters;  // ordered by id for determinism
  std::vector<int> assignment;           // doc index -> cluster id, -1 = detached
  int next_cluster_id = 0;

  int k() const { return static_cast<int>(clusters.size()); }

  int64_t assigned_count() const {
    int64_t n = 0;
    for (const auto& [id, c] : clusters) n += c.size();
    return n;
  }

  std::vector<int64_t> cluster_sizes() const {
    std::vector<int64_t> sizes;
    sizes.reserve(clusters.size());
    for (const auto& [id, c] : clusters) sizes.push_back(c.size());
    return sizes;
  }
};

struct SweepStats {
  int k = 0;
  int64_t reassigned = 0;
  double log_score = 0.0;  // sum of chosen-option conditionals, monitoring only
  double wall_ms = 0.0;
};

struct SweepTrace {
  std::vector<SweepStats> sweeps;
};

}  // namespace sidpmm
