#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sbg/theory.hpp"

using namespace sbg::theory;

namespace {

std::vector<std::vector<std::size_t>> contiguous_sets(const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<std::size_t>> sets;
  std::size_t next = 0;
  for (auto s : sizes) {
    sets.emplace_back();
    for (std::size_t i = 0; i < s; ++i) sets.back().push_back(next++);
  }
  return sets;
}

double percent(std::size_t n, std::size_t m, std::size_t l, std::size_t k) {
  return 100.0 * to_double(success_prob(nm_graph_prob(n, m, k).value, l));
}

}  // namespace

TEST(NmGraphProb, ReferenceConfiguration) {
  const auto lam = nm_graph_prob(128, 16, 2);
  EXPECT_TRUE(lam.equal_sets);
  EXPECT_EQ(lam.value, Rational(7680, 8128));
  EXPECT_EQ(lam.value, Rational(120, 127));
  EXPECT_NEAR(lam.as_double(), 0.944882, 5e-7);
}

TEST(NmGraphProb, SingleActiveNodeAlwaysSingleton) {
  for (std::size_t m : {1u, 2u, 4u, 8u, 16u}) EXPECT_EQ(nm_graph_prob(128, m, 1).value, 1);
}

TEST(NmGraphProb, SmallHandCount) { EXPECT_EQ(nm_graph_prob(6, 3, 2).value, Rational(4, 5)); }

TEST(NmGraphProb, Errors) {
  EXPECT_THROW(nm_graph_prob(16, 2, 3), sbg::MLessThanK);
  EXPECT_THROW(nm_graph_prob(4, 8, 2), sbg::InvalidArgument);
}

TEST(NmGraphProb, LargeSizesStayExact) {
  // N=256, M=32, K=8: r^K C(M,K)/C(N,K) against a log-domain evaluation
  const auto v = nm_graph_prob(256, 32, 8).as_double();
  double log_ref = 8 * std::log(8.0);
  for (int i = 0; i < 8; ++i) log_ref += std::log(32.0 - i) - std::log(256.0 - i);
  EXPECT_NEAR(v, std::exp(log_ref), 1e-12);
}

TEST(NmGraphProb, UnequalSetsUseEta) {
  const auto p = nm_graph_prob(10, 4, 2);
  EXPECT_FALSE(p.equal_sets);
  // sizes 3,3,2,2: e2 = 9 + 6 + 6 + 6 + 6 + 4 = 37 over C(10,2) = 45
  EXPECT_EQ(p.value, Rational(37, 45));
}

TEST(SuccessProb, ReferenceTable) {
  EXPECT_NEAR(percent(128, 16, 1, 2), 94.4882, 5e-5);
  EXPECT_NEAR(percent(128, 8, 2, 2), 98.6050, 5e-5);
  EXPECT_NEAR(percent(128, 4, 4, 2), 99.6450, 5e-5);
  EXPECT_NEAR(percent(128, 2, 8, 2), 99.6333, 5e-5);
}

TEST(SuccessProb, ExactRounding) {
  EXPECT_EQ(round_decimal(success_prob(nm_graph_prob(128, 16, 2).value, 1) * 100, 4), "94.4882");
  EXPECT_EQ(round_decimal(success_prob(nm_graph_prob(128, 8, 2).value, 2) * 100, 4), "98.6050");
  EXPECT_EQ(round_decimal(success_prob(nm_graph_prob(128, 4, 2).value, 4) * 100, 4), "99.6450");
  EXPECT_EQ(round_decimal(success_prob(nm_graph_prob(128, 2, 2).value, 8) * 100, 4), "99.6333");
  EXPECT_EQ(round_decimal(Rational(1, 8), 2), "0.13");
  EXPECT_EQ(round_decimal(Rational(1, 3), 0), "0");
  EXPECT_EQ(round_decimal(Rational(5, 1), 3), "5.000");
}

TEST(SuccessProb, CertainGraph) {
  for (std::size_t l = 1; l < 5; ++l) EXPECT_EQ(success_prob(Rational(1), l), 1);
  EXPECT_DOUBLE_EQ(success_prob(1.0, 3), 1.0);
}

TEST(SuccessProb, MonotoneInLambdaAndL) {
  double prev_l = 0.0;
  for (std::size_t l = 1; l < 10; ++l) {
    const double p = success_prob(0.3, l);
    EXPECT_GT(p, prev_l);
    prev_l = p;
  }
  double prev_lam = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double p = success_prob(i / 10.0, 3);
    EXPECT_GT(p, prev_lam);
    prev_lam = p;
  }
  EXPECT_THROW(success_prob(1.5, 2), sbg::InvalidArgument);
  EXPECT_THROW(success_prob(0.5, 0), sbg::InvalidArgument);
}

TEST(RequiredGraphs, Examples) {
  EXPECT_EQ(required_graphs(0.755906, 0.99), 4u);
  EXPECT_EQ(required_graphs(0.5, 0.5), 1u);
  EXPECT_EQ(required_graphs(0.944882, 0.9999), 4u);
  EXPECT_EQ(required_graphs(1.0, 0.9), 1u);
  EXPECT_THROW(required_graphs(0.0, 0.9), sbg::InvalidArgument);
}

TEST(RequiredGraphs, IsMinimal) {
  for (double lam : {0.01, 0.1, 0.37, 0.5, 0.75, 0.9, 0.999}) {
    for (double p0 : {0.5, 0.9, 0.99, 0.999999}) {
      const auto l = required_graphs(lam, p0);
      EXPECT_GE(success_prob(lam, l), p0);
      if (l > 1) {
        EXPECT_LT(success_prob(lam, l - 1), p0);
      }
    }
  }
}

TEST(SampleComplexity, LimitOfF) {
  const auto s = sample_complexity_bound(10000, 0.99);
  EXPECT_NEAR(s.f, std::exp(-1.0), 1e-3);
}

TEST(SampleComplexity, HLimitDependsOnBase) {
  EXPECT_NEAR(sample_complexity_bound(4, 0.99, LogBase::base2).h_limit, 1.5112, 1e-4);
  EXPECT_NEAR(sample_complexity_bound(4, 0.99, LogBase::natural).h_limit, 2.1802, 1e-4);
  EXPECT_NEAR(sample_complexity_bound(100000, 0.99, LogBase::base2).h, 1.5112, 1e-3);
}

TEST(SampleComplexity, FDecreasesInK) {
  const double f2 = sample_complexity_bound(2, 0.9).f;
  const double f5 = sample_complexity_bound(5, 0.9).f;
  const double f20 = sample_complexity_bound(20, 0.9).f;
  EXPECT_DOUBLE_EQ(f2, 0.5625);
  EXPECT_GT(f2, f5);
  EXPECT_GT(f5, f20);
}

TEST(SampleComplexity, BoundIsBaseInvariant) {
  const auto b2 = sample_complexity_bound(7, 0.95, LogBase::base2);
  const auto ln = sample_complexity_bound(7, 0.95, LogBase::natural);
  EXPECT_NEAR(b2.t_bound, ln.t_bound, 1e-9 * b2.t_bound);
  EXPECT_NEAR(b2.c, 2.0 * std::log2(20.0), 1e-12);
}

TEST(Oracle, SmallExamples) {
  EXPECT_EQ(oracle_nm_prob(6, contiguous_sets({2, 2, 2}), 2), Rational(12, 15));
  EXPECT_EQ(oracle_nm_prob(6, contiguous_sets({3, 2, 1}), 2), Rational(11, 15));
  const std::vector<std::size_t> sizes{3, 2, 1};
  EXPECT_EQ(nm_prob_for_sizes(sizes, 2), Rational(11, 15));
  for (const auto& s : {std::vector<std::size_t>{5, 1}, {2, 2, 2}, {6}}) {
    EXPECT_EQ(oracle_nm_prob(6, contiguous_sets(s), 1), 1);
  }
}

TEST(Oracle, SizeGuard) { EXPECT_THROW(oracle_nm_prob(15, contiguous_sets({15}), 2), sbg::InvalidArgument); }

TEST(Oracle, MatchesClosedFormForEqualSets) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      if (n % m) continue;
      const auto sets = contiguous_sets(std::vector<std::size_t>(m, n / m));
      for (std::size_t k = 1; k <= m; ++k) {
        EXPECT_EQ(nm_graph_prob(n, m, k).value, oracle_nm_prob(n, sets, k))
            << "n=" << n << " m=" << m << " k=" << k;
      }
    }
  }
}

TEST(Oracle, EqualSetsMaximizeProbability) {
  std::mt19937_64 rng(2718);
  int unequal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> nd(4, 12);
    const std::size_t n = nd(rng);
    std::uniform_int_distribution<std::size_t> md(2, n - 1);
    const std::size_t m = md(rng);
    // random composition of n into m positive parts
    std::vector<std::size_t> cuts(n - 1);
    std::iota(cuts.begin(), cuts.end(), std::size_t{1});
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(m - 1);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::size_t> sizes;
    std::size_t prev = 0;
    for (auto c : cuts) {
      sizes.push_back(c - prev);
      prev = c;
    }
    sizes.push_back(n - prev);
    const bool equal = std::all_of(sizes.begin(), sizes.end(), [&](auto s) { return s == sizes[0]; });
    unequal += !equal;

    std::uniform_int_distribution<std::size_t> kd(2, m);
    const std::size_t k = kd(rng);
    const auto oracle = oracle_nm_prob(n, contiguous_sets(sizes), k);
    const auto bound = equal_set_bound(n, m, k);
    EXPECT_EQ(oracle, nm_prob_for_sizes(sizes, k));
    if (equal) {
      EXPECT_EQ(oracle, bound);
    } else {
      EXPECT_LT(oracle, bound) << "n=" << n << " m=" << m << " k=" << k;
    }
  }
  EXPECT_GT(unequal, 150);
}

TEST(Oracle, EdgeDeletionNeverHurts) {
  // overlapping neighborhoods: removing an edge can only remove collisions
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 9, m = 3;
    std::vector<std::vector<std::size_t>> sets(m);
    std::bernoulli_distribution keep(0.6);
    for (std::size_t node = 0; node < n; ++node)
      for (std::size_t s = 0; s < m; ++s)
        if (keep(rng)) sets[s].push_back(node);
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto before = oracle_nm_prob(n, sets, k);
      for (std::size_t s = 0; s < m; ++s) {
        if (sets[s].empty()) continue;
        auto pruned = sets;
        pruned[s].pop_back();
        EXPECT_GE(oracle_nm_prob(n, pruned, k), before);
      }
    }
  }
}

TEST(Evaluate, CalculatorRow) {
  const auto row = evaluate({128, 16, 1, 2, 0.99, LogBase::base2});
  EXPECT_EQ(row.lambda, Rational(120, 127));
  EXPECT_EQ(row.p, row.lambda);
  EXPECT_EQ(row.l_required, 2u);
  EXPECT_NEAR(row.bound.t_bound, row.bound.c * 4 * row.bound.h, 1e-12);

  const auto none = evaluate({128, 2, 4, 3, 0.99, LogBase::base2});
  EXPECT_EQ(none.lambda, 0);
  EXPECT_EQ(none.p, 0);
  EXPECT_EQ(none.l_required, 0u);
}
