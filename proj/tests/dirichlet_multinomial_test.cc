// Apache License, Version 2.0, refer to LICENSE.txt

#include "sidpmm/dirichlet_multinomial.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hh"
#include "sidpmm/rng.hpp"

using sidpmm::DocCounts;
using sidpmm::MultinomialStats;
using sidpmm::mult_log_predictive;

namespace {

DocCounts make_doc(std::vector<std::pair<int, int64_t>> counts) {
  DocCounts doc;
  doc.counts = std::move(counts);
  for (const auto& [t, c] : doc.counts) doc.total += c;
  return doc;
}

TEST(MultLogPredictive, EmptyDocumentScoresZero) {
  auto stats = MultinomialStats::prior(5, 0.5);
  stats.add(make_doc({{0, 3}, {2, 1}}));
  EXPECT_EQ(mult_log_predictive(make_doc({}), stats), 0.0);
}

TEST(MultLogPredictive, SingleWordAgainstEmptyClusterIsUniform) {
  for (int v : {2, 3, 17}) {
    for (double beta : {0.01, 1.0, 5.0}) {
      auto stats = MultinomialStats::prior(v, beta);
      double lp = mult_log_predictive(make_doc({{0, 1}}), stats);
      EXPECT_NEAR(lp, -std::log(static_cast<double>(v)), 1e-12);
    }
  }
}

// V=3, beta=1, cluster counts (2,1,0), doc counts (1,1,0): expected value
// frozen from the Gamma-ratio oracle; equals 1/7.
TEST(MultLogPredictive, WorkedThreeTermCase) {
  auto stats = MultinomialStats::prior(3, 1.0);
  stats.add(make_doc({{0, 2}, {1, 1}}));
  const DocCounts doc = make_doc({{0, 1}, {1, 1}});
  const double expected = oracle::dirichlet_multinomial_log_predictive({1, 1, 0}, {2, 1, 0}, 1.0);
  ASSERT_NEAR(expected, std::log(1.0 / 7.0), 1e-12);
  EXPECT_NEAR(mult_log_predictive(doc, stats), expected, 1e-12);
}

TEST(MultLogPredictive, MatchesGammaRatioOracleOnRandomInstances) {
  sidpmm::Rng rng(20240811);
  for (int trial = 0; trial < 1000; ++trial) {
    const int v = 2 + static_cast<int>(rng.uniform_below(7));  // V <= 8
    const double beta = 0.05 + 2.0 * rng.uniform01();
    auto stats = MultinomialStats::prior(v, beta);
    std::vector<int64_t> cluster(v, 0), doc_dense(v, 0);
    std::vector<std::pair<int, int64_t>> cluster_sparse, doc_sparse;
    for (int t = 0; t < v; ++t) {
      cluster[t] = static_cast<int64_t>(rng.uniform_below(6));  // counts <= 5
      doc_dense[t] = static_cast<int64_t>(rng.uniform_below(6));
      if (cluster[t]) cluster_sparse.emplace_back(t, cluster[t]);
      if (doc_dense[t]) doc_sparse.emplace_back(t, doc_dense[t]);
    }
    stats.add(make_doc(cluster_sparse));
    const double got = mult_log_predictive(make_doc(doc_sparse), stats);
    const double want = oracle::dirichlet_multinomial_log_predictive(doc_dense, cluster, beta);
    EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, std::abs(want)))
        << "V=" << v << " beta=" << beta;
  }
}

TEST(MultinomialStats, AddThenRemoveRestoresBitIdentical) {
  auto stats = MultinomialStats::prior(10, 0.3);
  stats.add(make_doc({{1, 4}, {7, 2}}));
  const auto before_counts = stats.term_counts;
  const auto before_total = stats.total;
  const DocCounts doc = make_doc({{0, 2}, {1, 1}});
  stats.add(doc);
  stats.remove(doc);
  EXPECT_EQ(stats.term_counts, before_counts);
  EXPECT_EQ(stats.total, before_total);
}

TEST(MultinomialStats, AddToEmptyCountsTotals) {
  auto stats = MultinomialStats::prior(4, 1.0);
  stats.add(make_doc({{0, 1}, {2, 1}}));
  EXPECT_EQ(stats.total, 2);
  EXPECT_EQ(stats.count_of(0), 1);
  EXPECT_EQ(stats.count_of(2), 1);
  EXPECT_EQ(stats.count_of(3), 0);
}

TEST(MultinomialStats, RandomWalkMatchesBatchRecount) {
  sidpmm::Rng rng(7);
  const int v = 12;
  auto stats = MultinomialStats::prior(v, 0.5);
  std::vector<DocCounts> pool;
  for (int i = 0; i < 50; ++i) {
    std::vector<std::pair<int, int64_t>> counts;
    for (int t = 0; t < v; ++t)
      if (rng.uniform01() < 0.4) counts.emplace_back(t, 1 + rng.uniform_below(4));
    pool.push_back(make_doc(counts));
  }
  std::vector<int> member_of;  // indices into pool currently absorbed
  for (int step = 0; step < 10000; ++step) {
    if (member_of.empty() || rng.uniform01() < 0.5) {
      int pick = static_cast<int>(rng.uniform_below(pool.size()));
      stats.add(pool[pick]);
      member_of.push_back(pick);
    } else {
      size_t at = rng.uniform_below(member_of.size());
      stats.remove(pool[member_of[at]]);
      member_of.erase(member_of.begin() + at);
    }
  }
  auto batch = MultinomialStats::prior(v, 0.5);
  for (int idx : member_of) batch.add(pool[idx]);
  EXPECT_EQ(stats.term_counts, batch.term_counts);
  EXPECT_EQ(stats.total, batch.total);
}

TEST(MultinomialStats, RemoveUnderflowThrows) {
  auto stats = MultinomialStats::prior(4, 1.0);
  stats.add(make_doc({{0, 1}}));
  EXPECT_THROW(stats.remove(make_doc({{0, 2}})), std::runtime_error);
  EXPECT_THROW(stats.remove(make_doc({{1, 1}})), std::runtime_error);
}

TEST(MultinomialStats, InvalidConfigurationThrows) {
  EXPECT_THROW(MultinomialStats::prior(0, 1.0), std::invalid_argument);
  EXPECT_THROW(MultinomialStats::prior(5, 0.0), std::invalid_argument);
  EXPECT_THROW(MultinomialStats::prior(5, -1.0), std::invalid_argument);
}

// Sequential predictives chain to the joint marginal of the set: the
// exchangeability identity of the Dirichlet-multinomial.
TEST(MultLogPredictive, ChainRuleMatchesJointMarginal) {
  const int v = 3;
  const double beta = 0.7;
  std::vector<DocCounts> docs = {
      make_doc({{0, 2}}), make_doc({{1, 1}, {2, 1}}), make_doc({{0, 1}, {1, 2}}),
      make_doc({{2, 3}})};

  auto joint_via_chain = [&](const std::vector<int>& order) {
    auto stats = MultinomialStats::prior(v, beta);
    double lp = 0.0;
    for (int i : order) {
      lp += mult_log_predictive(docs[i], stats);
      stats.add(docs[i]);
    }
    return lp;
  };

  // Joint marginal of the pooled counts via the Gamma-ratio oracle applied
  // to the merged document against an empty cluster.
  std::vector<int64_t> pooled(v, 0), empty(v, 0);
  for (const auto& d : docs)
    for (const auto& [t, c] : d.counts) pooled[t] += c;
  double pooled_lp = oracle::dirichlet_multinomial_log_predictive(pooled, empty, beta);
  // The pooled marginal differs from the per-document chain by the
  // multinomial partitioning of identical counts; both orders of the chain
  // must agree with each other exactly, and the chain is order-invariant.
  const double fwd = joint_via_chain({0, 1, 2, 3});
  const double rev = joint_via_chain({3, 2, 1, 0});
  const double mix = joint_via_chain({2, 0, 3, 1});
  EXPECT_NEAR(fwd, rev, 1e-12);
  EXPECT_NEAR(fwd, mix, 1e-12);
  // And the chain equals the pooled-document marginal, since the
  // rising-factorial numerators regroup per term.
  EXPECT_NEAR(fwd, pooled_lp, 1e-10);
}

}  // namespace
