// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include "sidpmm/model.hpp"
#include "sidpmm/numeric.hpp"
#include "sidpmm/rng.hpp"

namespace sidpmm {

// Chinese restaurant process prior for one document: weight of joining an
// existing cluster with r_excl members vs. opening a new one.
//   existing: r_excl / (D - 1 + alpha),   new: alpha / (D - 1 + alpha)
// D counts the document being seated.
inline std::pair<double, double> crp_log_prior(int64_t r_excl, int64_t num_docs, double alpha) {
  if (num_docs < 1) throw std::invalid_argument("crp_log_prior: D must be >= 1");
  if (alpha <= 0.0) throw std::invalid_argument("crp_log_prior: alpha must be > 0");
  if (r_excl > num_docs - 1)
    throw std::runtime_error("crp_log_prior: cluster count " + std::to_string(r_excl) +
                             " exceeds D-1 = " + std::to_string(num_docs - 1));
  const double denom = std::log(static_cast<double>(num_docs - 1) + alpha);
  const double existing =
      r_excl > 0 ? std::log(static_cast<double>(r_excl)) - denom
                 : -std::numeric_limits<double>::infinity();
  return {existing, std::log(alpha) - denom};
}

// Joint document log likelihood under the stats view: the product of the
// enabled channel predictives, conditionally independent given the cluster.
inline double doc_log_likelihood(const Document& doc, const ChannelStatsView& stats,
                                 const ModelConfig& config) {
  double lp = 0.0;
  if (config.channels.words) {
    if (stats.mult == nullptr) throw std::invalid_argument("doc_log_likelihood: missing word stats");
    lp += mult_log_predictive(doc.counts, *stats.mult);
  }
  if (config.channels.seq) {
    if (stats.niw_s == nullptr) throw std::invalid_argument("doc_log_likelihood: missing seq stats");
    if (doc.seq_embedding.size() == 0)
      throw std::invalid_argument("doc_log_likelihood: seq channel enabled but s_i missing");
    lp += stats.niw_s->log_predictive(doc.seq_embedding);
  }
  if (config.channels.embed) {
    if (stats.niw_e == nullptr) throw std::invalid_argument("doc_log_likelihood: missing embed stats");
    if (doc.word_embedding.size() == 0)
      throw std::invalid_argument("doc_log_likelihood: embed channel enabled but e_i missing");
    lp += stats.niw_e->log_predictive(doc.word_embedding);
  }
  return lp;
}

// Unnormalized log posterior of each seating option for one document.
// cluster_ids[i] matches logits[i]; the final logit is the new-cluster option.
struct CandidateLogits {
  std::vector<int> cluster_ids;
  std::vector<double> logits;
};

// Collapsed Gibbs sampler over cluster assignments. One instance owns the
// model state; the documents stay outside and immutable.
class GibbsSampler {
 public:
  GibbsSampler(const std::vector<Document>& docs, ModelConfig config)
      : docs_(docs), config_(std::move(config)) {
    config_.validate();
    if (docs_.empty()) throw std::invalid_argument("GibbsSampler: empty corpus");
    prior_mult_ = config_.channels.words
                      ? MultinomialStats::prior(vocab_size_from_config(), config_.beta)
                      : MultinomialStats{};
    if (config_.channels.seq) prior_s_ = NiwStats::prior(config_.hyper_s, config_.diagonal_cov);
    if (config_.channels.embed) prior_e_ = NiwStats::prior(config_.hyper_e, config_.diagonal_cov);
    state_.assignment.assign(docs_.size(), -1);
    check_documents();
  }

  // Adopt a previously saved assignment vector; stats are rebuilt from it.
  GibbsSampler(const std::vector<Document>& docs, ModelConfig config,
               const std::vector<int>& assignment)
      : GibbsSampler(docs, std::move(config)) {
    if (assignment.size() != docs_.size())
      throw std::invalid_argument("GibbsSampler: assignment length mismatch");
    for (int i = 0; i < static_cast<int>(assignment.size()); ++i) {
      if (assignment[i] < 0) continue;
      attach(i, has_cluster(assignment[i]) ? assignment[i] : -1, assignment[i]);
    }
    rebuild_gaussian_stats();
  }

  const ModelState& state() const { return state_; }
  const ModelConfig& config() const { return config_; }

  ChannelStatsView prior_view() const {
    ChannelStatsView v;
    if (config_.channels.words) v.mult = &prior_mult_;
    if (config_.channels.seq) v.niw_s = &*prior_s_;
    if (config_.channels.embed) v.niw_e = &*prior_e_;
    return v;
  }

  // Sequential seating pass: K starts at 0 and each document is sampled
  // against the clusters formed so far.
  void initialize(Rng& rng) {
    std::vector<int> order = visit_order(rng);
    for (int doc : order) {
      int chosen = sample_assignment(doc, rng);
      attach(doc, chosen);
    }
    rebuild_gaussian_stats();
    validate_or_die("initialize");
  }

  // N sweeps of remove / resample / reinsert over every document.
  SweepTrace run(Rng& rng) {
    SweepTrace trace;
    const auto num_docs = static_cast<int64_t>(docs_.size());
    for (int sweep = 0; sweep < config_.sweeps; ++sweep) {
      auto t0 = std::chrono::steady_clock::now();
      SweepStats stats;
      std::vector<int> order = visit_order(rng);
      for (int doc : order) {
        const int old_id = state_.assignment[doc];
        const bool old_singleton = cluster_size(old_id) == 1;
        detach(doc);
        CandidateLogits cand = conditional_logits(doc);
        const int pick = pick_option(cand, rng, doc);
        stats.log_score += cand.logits[pick] - log_sum_exp(cand.logits);
        const int chosen = pick < static_cast<int>(cand.cluster_ids.size())
                               ? cand.cluster_ids[pick]
                               : -1;
        const int new_id = attach(doc, chosen);
        const bool same = new_id == old_id || (chosen == -1 && old_singleton);
        if (!same) ++stats.reassigned;
      }
      rebuild_gaussian_stats();
      validate_or_die("sweep " + std::to_string(sweep + 1));
      stats.k = state_.k();
      stats.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      trace.sweeps.push_back(stats);
      if (config_.early_stop_frac > 0.0 &&
          static_cast<double>(stats.reassigned) <
              config_.early_stop_frac * static_cast<double>(num_docs)) {
        break;
      }
    }
    return trace;
  }

  // Seating logits for a detached document: CRP prior plus channel
  // predictives, per existing cluster and for the new-cluster option.
  CandidateLogits conditional_logits(int doc) const {
    if (state_.assignment[doc] != -1)
      throw std::runtime_error("conditional_logits: document still attached");
    const int64_t num_docs = state_.assigned_count() + 1;
    CandidateLogits cand;
    cand.cluster_ids.reserve(state_.clusters.size());
    cand.logits.reserve(state_.clusters.size() + 1);
    double new_cluster_prior = 0.0;
    for (const auto& [id, cluster] : state_.clusters) {
      auto [existing, fresh] = crp_log_prior(cluster.size(), num_docs, config_.alpha);
      new_cluster_prior = fresh;
      cand.cluster_ids.push_back(id);
      cand.logits.push_back(existing +
                            doc_log_likelihood(docs_[doc], cluster.view(config_.channels), config_));
    }
    if (state_.clusters.empty())
      new_cluster_prior = crp_log_prior(0, num_docs, config_.alpha).second;
    cand.logits.push_back(new_cluster_prior +
                          doc_log_likelihood(docs_[doc], prior_view(), config_));
    return cand;
  }

  // Draws a seat for a detached document; -1 means a new cluster.
  int sample_assignment(int doc, Rng& rng) {
    CandidateLogits cand = conditional_logits(doc);
    const int pick = pick_option(cand, rng, doc);
    return pick < static_cast<int>(cand.cluster_ids.size()) ? cand.cluster_ids[pick] : -1;
  }

  // Insert the document into the given cluster (-1 opens a new one) and
  // update every enabled channel. Returns the actual cluster id.
  int attach(int doc, int cluster_id, int forced_id = -1) {
    int id = cluster_id;
    if (id == -1) {
      id = forced_id >= 0 ? forced_id : state_.next_cluster_id;
      state_.next_cluster_id = std::max(state_.next_cluster_id, id + 1);
      ClusterState fresh;
      fresh.id = id;
      if (config_.channels.words) fresh.mult = prior_mult_;
      if (config_.channels.seq) fresh.niw_s = *prior_s_;
      if (config_.channels.embed) fresh.niw_e = *prior_e_;
      state_.clusters.emplace(id, std::move(fresh));
    }
    auto it = state_.clusters.find(id);
    if (it == state_.clusters.end())
      throw std::runtime_error("attach: unknown cluster " + std::to_string(id));
    ClusterState& cluster = it->second;
    cluster.members.push_back(doc);
    if (config_.channels.words) cluster.mult.add(docs_[doc].counts);
    if (config_.channels.seq) cluster.niw_s.add(docs_[doc].seq_embedding);
    if (config_.channels.embed) cluster.niw_e.add(docs_[doc].word_embedding);
    state_.assignment[doc] = id;
    return id;
  }

  // Remove the document from its cluster, deleting the cluster if emptied.
  // A failed Cholesky downdate falls back to a rebuild from the member list.
  void detach(int doc) {
    const int id = state_.assignment[doc];
    auto it = state_.clusters.find(id);
    if (id < 0 || it == state_.clusters.end())
      throw std::runtime_error("detach: document " + std::to_string(doc) + " not attached");
    ClusterState& cluster = it->second;
    auto pos = std::find(cluster.members.begin(), cluster.members.end(), doc);
    if (pos == cluster.members.end())
      throw std::runtime_error("detach: membership list corrupt for cluster " + std::to_string(id));
    cluster.members.erase(pos);
    state_.assignment[doc] = -1;
    if (cluster.members.empty()) {
      state_.clusters.erase(it);
      return;
    }
    if (config_.channels.words) cluster.mult.remove(docs_[doc].counts);
    if (config_.channels.seq && !cluster.niw_s.remove(docs_[doc].seq_embedding))
      rebuild_cluster_channel(cluster, /*seq=*/true);
    if (config_.channels.embed && !cluster.niw_e.remove(docs_[doc].word_embedding))
      rebuild_cluster_channel(cluster, /*seq=*/false);
  }

  // Recompute the Gaussian channel stats of every cluster from its member
  // list; caps the drift of incremental update/downdate.
  void rebuild_gaussian_stats() {
    if (!config_.channels.seq && !config_.channels.embed) return;
    for (auto& [id, cluster] : state_.clusters) {
      if (config_.channels.seq) rebuild_cluster_channel(cluster, /*seq=*/true);
      if (config_.channels.embed) rebuild_cluster_channel(cluster, /*seq=*/false);
    }
  }

  // Bookkeeping invariants; throws with a state dump on violation.
  void validate_or_die(const std::string& where) const {
    std::ostringstream problems;
    int64_t total = 0;
    for (const auto& [id, cluster] : state_.clusters) {
      if (cluster.members.empty()) problems << "cluster " << id << " is empty; ";
      total += cluster.size();
      if (config_.channels.seq && cluster.niw_s.count() != cluster.size())
        problems << "cluster " << id << " seq stats count " << cluster.niw_s.count()
                 << " != " << cluster.size() << "; ";
      if (config_.channels.embed && cluster.niw_e.count() != cluster.size())
        problems << "cluster " << id << " embed stats count " << cluster.niw_e.count()
                 << " != " << cluster.size() << "; ";
      for (int doc : cluster.members) {
        if (state_.assignment[doc] != id)
          problems << "doc " << doc << " assignment disagrees with cluster " << id << "; ";
      }
    }
    int64_t assigned = 0;
    for (int a : state_.assignment)
      if (a >= 0) ++assigned;
    if (total != assigned)
      problems << "sum of cluster sizes " << total << " != assigned docs " << assigned << "; ";
    std::string msg = problems.str();
    if (!msg.empty()) {
      std::ostringstream dump;
      dump << "sampler invariant violation at " << where << ": " << msg << "K=" << state_.k()
           << " D=" << docs_.size();
      throw std::runtime_error(dump.str());
    }
  }

 private:
  int pick_option(const CandidateLogits& cand, Rng& rng, int doc) const {
    for (size_t i = 0; i < cand.logits.size(); ++i) {
      const bool is_new = i + 1 == cand.logits.size();
      // A zero-weight seat (empty-cluster race) is legal; NaN/inf are not.
      if (std::isnan(cand.logits[i]) || cand.logits[i] == std::numeric_limits<double>::infinity())
        throw std::runtime_error(
            "sample_assignment: non-finite logit for doc " + std::to_string(doc) + " at " +
            (is_new ? std::string("new cluster") : "cluster " + std::to_string(cand.cluster_ids[i])));
    }
    return sample_from_logits(cand.logits, rng);
  }

  std::vector<int> visit_order(Rng& rng) {
    std::vector<int> order(docs_.size());
    std::iota(order.begin(), order.end(), 0);
    if (config_.shuffle_order) {
      for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_below(i)]);
    }
    return order;
  }

  void rebuild_cluster_channel(ClusterState& cluster, bool seq) {
    std::vector<Eigen::VectorXd> points;
    points.reserve(cluster.members.size());
    for (int doc : cluster.members)
      points.push_back(seq ? docs_[doc].seq_embedding : docs_[doc].word_embedding);
    const NiwHyper& hyper = seq ? config_.hyper_s : config_.hyper_e;
    NiwStats rebuilt = NiwStats::from_points(hyper, points, config_.diagonal_cov);
    (seq ? cluster.niw_s : cluster.niw_e) = std::move(rebuilt);
  }

  int64_t cluster_size(int id) const {
    auto it = state_.clusters.find(id);
    return it == state_.clusters.end() ? 0 : it->second.size();
  }

  bool has_cluster(int id) const { return state_.clusters.count(id) > 0; }

  int vocab_size_from_config() const {
    if (config_.vocab_size > 0) return config_.vocab_size;
    // Fallback: the largest term index present in the corpus.
    int v = 0;
    for (const auto& doc : docs_)
      for (const auto& [t, c] : doc.counts) v = std::max(v, t + 1);
    return std::max(v, 1);
  }

  void check_documents() const {
    for (size_t i = 0; i < docs_.size(); ++i) {
      if (config_.channels.seq && docs_[i].seq_embedding.size() != config_.hyper_s.dim())
        throw std::invalid_argument("document " + std::to_string(i) +
                                    ": seq embedding missing or of wrong dimension");
      if (config_.channels.embed && docs_[i].word_embedding.size() != config_.hyper_e.dim())
        throw std::invalid_argument("document " + std::to_string(i) +
                                    ": word embedding missing or of wrong dimension");
    }
  }

  const std::vector<Document>& docs_;
  ModelConfig config_;
  ModelState state_;
  MultinomialStats prior_mult_;
  std::optional<NiwStats> prior_s_;
  std::optional<NiwStats> prior_e_;
};

// Convenience wrappers with the corpus/state split made explicit.
inline ModelState initialize(const std::vector<Document>& docs, const ModelConfig& config,
                             Rng& rng) {
  GibbsSampler sampler(docs, config);
  sampler.initialize(rng);
  return sampler.state();
}

inline std::pair<ModelState, SweepTrace> run_gibbs(const ModelState& state,
                                                   const std::vector<Document>& docs,
                                                   const ModelConfig& config, Rng& rng) {
  GibbsSampler sampler(docs, config, state.assignment);
  SweepTrace trace = sampler.run(rng);
  return {sampler.state(), trace};
}

}  // namespace sidpmm
