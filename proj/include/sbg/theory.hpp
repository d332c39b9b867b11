#pragma once

// Closed-form NM-graph probability, success probability and sample
// complexity, plus an exhaustive-enumeration oracle for small graphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sbg/errors.hpp"

namespace sbg::theory {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Nonnegative q rounded half-up to `digits` decimals, computed exactly.
inline std::string round_decimal(const Rational& q, unsigned digits) {
  if (q < 0) throw InvalidArgument("round_decimal expects a nonnegative value");
  BigInt scale = 1;
  for (unsigned i = 0; i < digits; ++i) scale *= 10;
  const Rational scaled = q * scale;
  BigInt v = (2 * numerator(scaled) + denominator(scaled)) / (2 * denominator(scaled));
  const BigInt whole = v / scale;
  std::string frac = BigInt(v % scale).str();
  if (digits == 0) return whole.str();
  return whole.str() + "." + std::string(digits - frac.size(), '0') + frac;
}

inline BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

/// eta(K): elementary symmetric polynomial of degree K in the set sizes,
/// i.e. the number of K-supports that put each active node in its own set.
inline BigInt eta(std::span<const std::size_t> sizes, std::size_t k) {
  std::vector<BigInt> e(k + 1, 0);
  e[0] = 1;
  for (auto r : sizes) {
    for (std::size_t j = k; j >= 1; --j) e[j] += e[j - 1] * r;
  }
  return e[k];
}

/// P(graph is an NM-graph) for a one-edge-per-left-node graph with the
/// given set sizes and a uniformly random K-support: eta(K) / C(N, K).
inline Rational nm_prob_for_sizes(std::span<const std::size_t> sizes, std::size_t k) {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (k > n) throw InvalidArgument("K exceeds N");
  if (k > sizes.size()) return 0;
  return Rational(eta(sizes, k), binomial(n, k));
}

/// r^K C(M, K) / C(N, K) with r = N/M (rational when M does not divide N).
/// Upper-bounds the NM-graph probability for any M-set graph.
inline Rational equal_set_bound(std::size_t n, std::size_t m, std::size_t k) {
  if (m < k) throw MLessThanK("M = " + std::to_string(m) + " < K = " + std::to_string(k));
  const Rational r{BigInt(n), BigInt(m)};
  Rational rk = 1;
  for (std::size_t i = 0; i < k; ++i) rk *= r;
  return rk * Rational(binomial(m, k), binomial(n, k));
}

struct NmGraphProbability {
  Rational value;
  bool equal_sets = true;  // false: balanced-unequal sizes, value is eta(K)/C(N,K)
  double as_double() const { return to_double(value); }
};

/// NM-graph probability of a balanced random partition of N nodes into M sets.
inline NmGraphProbability nm_graph_prob(std::size_t n, std::size_t m, std::size_t k) {
  if (m == 0 || m > n) throw InvalidArgument("need 1 <= M <= N");
  if (m < k) throw MLessThanK("M = " + std::to_string(m) + " < K = " + std::to_string(k));
  if (k > n) throw InvalidArgument("K exceeds N");
  if (n % m == 0) return {equal_set_bound(n, m, k), true};
  std::vector<std::size_t> sizes(m, n / m);
  for (std::size_t i = 0; i < n % m; ++i) ++sizes[i];
  return {nm_prob_for_sizes(sizes, k), false};
}

/// p = 1 - (1 - lambda)^L.
inline Rational success_prob(const Rational& lambda, std::size_t l) {
  if (lambda < 0 || lambda > 1) throw InvalidArgument("lambda must lie in [0, 1]");
  if (l == 0) throw InvalidArgument("L must be at least 1");
  Rational miss = 1 - lambda, acc = 1;
  for (std::size_t i = 0; i < l; ++i) acc *= miss;
  return 1 - acc;
}

inline double success_prob(double lambda, std::size_t l) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  if (l == 0) throw InvalidArgument("L must be at least 1");
  return 1.0 - std::pow(1.0 - lambda, static_cast<double>(l));
}

/// Smallest L with 1 - (1 - lambda)^L >= p0.
inline std::size_t required_graphs(double lambda, double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidArgument("p0 must lie in (0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  if (lambda == 1.0) return 1;
  if (lambda == 0.0) throw InvalidArgument("lambda = 0: no number of graphs reaches p0");
  const double est = std::ceil(std::log1p(-p0) / std::log1p(-lambda));
  auto l = static_cast<std::size_t>(std::max(1.0, est));
  // guard the ceil against rounding on either side
  while (l > 1 && success_prob(lambda, l - 1) >= p0) --l;
  while (success_prob(lambda, l) < p0) ++l;
  return l;
}

enum class LogBase { natural, base2 };

inline const char* to_string(LogBase b) { return b == LogBase::natural ? "natural" : "base2"; }

inline double log_in(double x, LogBase b) { return b == LogBase::natural ? std::log(x) : std::log2(x); }

struct SampleComplexity {
  double f = 0.0;        // f(K, delta) at delta = K
  double h = 0.0;        // 1 / log(1 / (1 - f))
  double c = 0.0;        // 2 log(1 / (1 - p0))
  double t_bound = 0.0;  // c K^2 h: measurements sufficient for probability p0 at M = K^2
  double h_limit = 0.0;  // K -> infinity value of h, 1 / log(1 / (1 - e^{-1}))
};

/// f(K, K) = (1 - (1 - 1/K)/K)^K, its h, and the c K^2 h measurement bound.
/// h and c individually depend on the log base; their product does not.
inline SampleComplexity sample_complexity_bound(std::size_t k, double p0,
                                                LogBase base = LogBase::base2) {
  if (k == 0) throw InvalidArgument("K must be at least 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidArgument("p0 must lie in (0, 1)");
  const auto kk = static_cast<double>(k);
  SampleComplexity s;
  s.f = std::exp(kk * std::log1p(-(1.0 - 1.0 / kk) / kk));
  // log(1/(1-f)) = -log1p(-f)
  const double inv = -std::log1p(-s.f);
  s.h = s.f >= 1.0 ? 0.0 : 1.0 / (base == LogBase::natural ? inv : inv / std::log(2.0));
  s.c = 2.0 * log_in(1.0 / (1.0 - p0), base);
  s.t_bound = s.c * kk * kk * s.h;
  s.h_limit = 1.0 / log_in(1.0 / (1.0 - std::exp(-1.0)), base);
  return s;
}

/// Exact fraction of the C(N, K) supports for which every right node sees
/// at most one active left node. `sets` are right-node neighborhoods and
/// may overlap (general bipartite graphs). Exhaustive, so N is capped.
inline Rational oracle_nm_prob(std::size_t n, const std::vector<std::vector<std::size_t>>& sets,
                               std::size_t k, std::size_t max_n = 14) {
  if (n > max_n) throw InvalidArgument("oracle enumeration is limited to N <= " + std::to_string(max_n));
  if (k > n) throw InvalidArgument("K exceeds N");
  std::vector<std::vector<std::size_t>> owners(n);
  for (std::size_t m = 0; m < sets.size(); ++m) {
    for (auto node : sets[m]) {
      if (node >= n) throw InvalidArgument("set member out of range");
      owners[node].push_back(m);
    }
  }
  std::size_t good = 0, total = 0;
  std::vector<std::size_t> hits(sets.size());
  // iterate K-subsets as bitmasks in increasing order (Gosper's hack)
  if (k == 0) return 1;
  std::uint32_t mask = (1u << k) - 1;
  const std::uint32_t limit = 1u << n;
  while (mask < limit) {
    ++total;
    std::fill(hits.begin(), hits.end(), 0);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (auto m : owners[i]) {
        if (++hits[m] > 1) {
          ok = false;
          break;
        }
      }
    }
    good += ok;
    const std::uint32_t c = mask & (~mask + 1);
    const std::uint32_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  return Rational(BigInt(good), BigInt(total));
}

/// Calculator inputs for one (N, M, L, K) point.
struct CodeParams {
  std::size_t n = 128;
  std::size_t m = 16;
  std::size_t l = 1;
  std::size_t k = 2;
  double p0 = 0.99;
  LogBase log_base = LogBase::base2;

  std::size_t r() const { return (n + m - 1) / m; }
  double delta() const { return static_cast<double>(m) / static_cast<double>(k); }
  double c() const { return 2.0 * log_in(1.0 / (1.0 - p0), log_base); }
};

struct TheoryRow {
  CodeParams params;
  Rational lambda;
  bool equal_sets = true;
  Rational p;
  std::size_t l_required = 0;  // 0 when unreachable (lambda = 0)
  SampleComplexity bound;
};

inline TheoryRow evaluate(const CodeParams& cp) {
  TheoryRow row;
  row.params = cp;
  if (cp.m < cp.k) {
    row.lambda = 0;  // no NM-graph can exist
  } else {
    const auto nm = nm_graph_prob(cp.n, cp.m, cp.k);
    row.lambda = nm.value;
    row.equal_sets = nm.equal_sets;
  }
  row.p = success_prob(row.lambda, cp.l);
  const double lam = to_double(row.lambda);
  row.l_required = lam > 0.0 ? required_graphs(lam, cp.p0) : 0;
  row.bound = sample_complexity_bound(cp.k, cp.p0, cp.log_base);
  return row;
}

}  // namespace sbg::theory
