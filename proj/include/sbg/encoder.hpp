#pragma once

// Sparse encoding: random balanced bipartite graphs, per-graph modulation
// permutations and the stacked 2ML x N measurement matrix.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sbg/errors.hpp"
#include "sbg/measurement.hpp"
#include "sbg/modulation.hpp"
#include "sbg/random.hpp"

namespace sbg {

using IndexSet = std::vector<std::size_t>;

/// L bipartite graphs, each a partition of the N left nodes into M sets
/// (set m is wired to right node m), plus a per-graph assignment of
/// modulation values to left nodes.
struct GraphEnsemble {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t n_graphs = 0;
  std::size_t rf_limit = 0;  // R the ensemble was built for; 0 = unchecked
  std::uint64_t seed = 0;
  std::vector<std::vector<IndexSet>> partitions;          // [l][m] -> sorted left nodes
  std::vector<std::vector<std::size_t>> owner;            // [l][n] -> m
  std::vector<std::vector<std::size_t>> permutations;     // [l][n] -> value index

  const IndexSet& set(std::size_t l, std::size_t m) const { return partitions.at(l).at(m); }
  std::size_t set_of(std::size_t l, std::size_t n) const { return owner.at(l).at(n); }
  std::size_t value_index(std::size_t l, std::size_t n) const { return permutations.at(l).at(n); }

  std::size_t max_set_size() const {
    std::size_t r = 0;
    for (const auto& g : partitions)
      for (const auto& s : g) r = std::max(r, s.size());
    return r;
  }

  bool has_identity_permutations() const {
    for (const auto& p : permutations)
      for (std::size_t n = 0; n < p.size(); ++n)
        if (p[n] != n) return false;
    return true;
  }

  /// Rebuilds `owner` from `partitions` and checks every structural invariant.
  void finalize() {
    if (n_right == 0 || n_graphs == 0 || n_left == 0) throw InvalidArgument("empty ensemble");
    if (partitions.size() != n_graphs) throw DimensionMismatch("partition count differs from L");
    if (permutations.empty()) {
      permutations.assign(n_graphs, std::vector<std::size_t>(n_left));
      for (auto& p : permutations) std::iota(p.begin(), p.end(), std::size_t{0});
    }
    if (permutations.size() != n_graphs) throw DimensionMismatch("permutation count differs from L");
    owner.assign(n_graphs, std::vector<std::size_t>(n_left, n_right));
    for (std::size_t l = 0; l < n_graphs; ++l) {
      if (partitions[l].size() != n_right) throw DimensionMismatch("graph does not have M sets");
      for (std::size_t m = 0; m < n_right; ++m) {
        auto& s = partitions[l][m];
        std::sort(s.begin(), s.end());
        if (s.empty()) throw InvalidArgument("empty left-node set");
        for (auto n : s) {
          if (n >= n_left) throw InvalidArgument("left node index out of range");
          if (owner[l][n] != n_right) throw InvalidArgument("left-node sets overlap");
          owner[l][n] = m;
        }
      }
      for (std::size_t n = 0; n < n_left; ++n) {
        if (owner[l][n] == n_right) throw InvalidArgument("left-node sets do not cover all nodes");
      }
      std::vector<bool> seen(n_left, false);
      if (permutations[l].size() != n_left) throw DimensionMismatch("permutation length differs from N");
      for (auto v : permutations[l]) {
        if (v >= n_left || seen[v]) throw InvalidArgument("permutation is not a bijection");
        seen[v] = true;
      }
    }
  }
};

/// Ensemble from explicit partitions (identity permutations unless given).
inline GraphEnsemble make_ensemble(std::size_t n, std::vector<std::vector<IndexSet>> partitions,
                                   std::vector<std::vector<std::size_t>> permutations = {},
                                   std::size_t rf_limit = 0) {
  GraphEnsemble e;
  e.n_left = n;
  e.n_graphs = partitions.size();
  e.n_right = partitions.empty() ? 0 : partitions.front().size();
  e.rf_limit = rf_limit;
  e.partitions = std::move(partitions);
  e.permutations = std::move(permutations);
  e.finalize();
  return e;
}

/// Set sizes of a balanced partition: the N mod M remainder goes one extra
/// node to each of the first sets.
inline std::vector<std::size_t> balanced_sizes(std::size_t n, std::size_t m) {
  std::vector<std::size_t> sizes(m, n / m);
  for (std::size_t i = 0; i < n % m; ++i) ++sizes[i];
  return sizes;
}

/// L independent, uniformly random balanced partitions of N left nodes
/// into M sets.
inline GraphEnsemble build_ensemble(std::size_t n, std::size_t m, std::size_t l, std::size_t r,
                                    std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("N must be positive");
  if (m == 0 || l == 0) throw InvalidArgument("M and L must be at least 1");
  if (m > n) throw InvalidArgument("M must not exceed N");
  const std::size_t r_needed = (n + m - 1) / m;
  if (r_needed > r) {
    throw C1Infeasible("ceil(N/M) = " + std::to_string(r_needed) + " exceeds R = " +
                       std::to_string(r));
  }

  const auto sizes = balanced_sizes(n, m);
  std::vector<std::vector<IndexSet>> parts(l);
  std::vector<std::size_t> nodes(n);
  for (std::size_t g = 0; g < l; ++g) {
    Engine rng(derive_seed(seed, 0x9a11, g));
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    std::shuffle(nodes.begin(), nodes.end(), rng);
    auto it = nodes.begin();
    parts[g].resize(m);
    for (std::size_t s = 0; s < m; ++s) {
      parts[g][s].assign(it, it + static_cast<std::ptrdiff_t>(sizes[s]));
      it += static_cast<std::ptrdiff_t>(sizes[s]);
    }
  }
  auto e = make_ensemble(n, std::move(parts), {}, r);
  e.seed = seed;
  return e;
}

// --- permutation design -----------------------------------------------------

enum class PermutationStrategy { automatic, exhaustive, heuristic };

struct PermutationSearch {
  PermutationStrategy strategy = PermutationStrategy::automatic;
  std::size_t swap_budget = 512;  // swap attempts per local search
  std::size_t restarts = 1;       // extra random starting points
  std::uint64_t seed = 0;
  std::size_t exhaustive_max_n = 8;
};

namespace detail {

inline double set_spread(const IndexSet& set, const std::vector<std::size_t>& perm,
                         const ModulationSpec& mod, std::vector<double>& scratch) {
  if (set.size() < 2) return std::numeric_limits<double>::infinity();
  scratch.clear();
  for (auto n : set) scratch.push_back(mod.value(perm[n]));
  std::sort(scratch.begin(), scratch.end());
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < scratch.size(); ++i) d = std::min(d, scratch[i] - scratch[i - 1]);
  return d;
}

// Max-min objective: larger minimum first, then fewer sets attaining it.
struct SpreadScore {
  double min_d = std::numeric_limits<double>::infinity();
  std::size_t at_min = 0;

  bool better_than(const SpreadScore& o) const {
    if (min_d != o.min_d) return min_d > o.min_d;
    return at_min < o.at_min;
  }
};

inline SpreadScore score_of(const std::vector<double>& spreads) {
  SpreadScore s;
  for (double d : spreads) {
    if (d < s.min_d) {
      s.min_d = d;
      s.at_min = 1;
    } else if (d == s.min_d) {
      ++s.at_min;
    }
  }
  return s;
}

inline std::vector<double> all_spreads(const std::vector<IndexSet>& sets,
                                       const std::vector<std::size_t>& perm,
                                       const ModulationSpec& mod) {
  std::vector<double> out(sets.size()), scratch;
  for (std::size_t m = 0; m < sets.size(); ++m) out[m] = set_spread(sets[m], perm, mod, scratch);
  return out;
}

/// Sorted modulation values dealt round-robin over the sets; within a set
/// the ascending nodes receive ascending values.
inline std::vector<std::size_t> stride_interleave(const std::vector<IndexSet>& sets,
                                                  const ModulationSpec& mod, std::size_t n) {
  std::vector<std::size_t> by_value(n);
  std::iota(by_value.begin(), by_value.end(), std::size_t{0});
  std::stable_sort(by_value.begin(), by_value.end(),
                   [&](std::size_t a, std::size_t b) { return mod.value(a) < mod.value(b); });

  std::vector<std::vector<std::size_t>> dealt(sets.size());
  std::size_t next = 0;
  while (next < n) {
    for (std::size_t m = 0; m < sets.size() && next < n; ++m) {
      if (dealt[m].size() < sets[m].size()) dealt[m].push_back(by_value[next++]);
    }
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t m = 0; m < sets.size(); ++m) {
    auto vals = dealt[m];
    std::sort(vals.begin(), vals.end(),
              [&](std::size_t a, std::size_t b) { return mod.value(a) < mod.value(b); });
    for (std::size_t i = 0; i < sets[m].size(); ++i) perm[sets[m][i]] = vals[i];
  }
  return perm;
}

inline void local_search(const std::vector<IndexSet>& sets, const std::vector<std::size_t>& owner,
                         const ModulationSpec& mod, std::vector<std::size_t>& perm,
                         std::size_t budget, Engine& rng) {
  const std::size_t n = perm.size();
  if (sets.size() < 2 || n < 2) return;
  auto spreads = all_spreads(sets, perm, mod);
  auto score = score_of(spreads);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> scratch;
  for (std::size_t it = 0; it < budget; ++it) {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    const std::size_t ma = owner[a], mb = owner[b];
    if (ma == mb) continue;
    std::swap(perm[a], perm[b]);
    const double old_a = spreads[ma], old_b = spreads[mb];
    spreads[ma] = set_spread(sets[ma], perm, mod, scratch);
    spreads[mb] = set_spread(sets[mb], perm, mod, scratch);
    const auto trial = score_of(spreads);
    if (trial.better_than(score)) {
      score = trial;
    } else {
      std::swap(perm[a], perm[b]);
      spreads[ma] = old_a;
      spreads[mb] = old_b;
    }
  }
}

inline std::vector<std::size_t> exhaustive_best(const std::vector<IndexSet>& sets,
                                                const ModulationSpec& mod, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto best = perm;
  auto best_score = score_of(all_spreads(sets, perm, mod));
  while (std::next_permutation(perm.begin(), perm.end())) {
    const auto s = score_of(all_spreads(sets, perm, mod));
    if (s.better_than(best_score)) {
      best_score = s;
      best = perm;
    }
  }
  return best;
}

}  // namespace detail

/// min over right nodes of the smallest gap between modulation values
/// assigned to that node's set; +inf when every set is a singleton.
inline double min_pairwise_distance(const GraphEnsemble& ens, std::size_t l,
                                    const ModulationSpec& mod) {
  return detail::score_of(detail::all_spreads(ens.partitions.at(l), ens.permutations.at(l), mod))
      .min_d;
}

/// Chooses, independently for each graph, a modulation-value permutation
/// that maximizes the minimum in-set spread. Exhaustive for small N,
/// otherwise stride interleaving refined by random pairwise swaps. The
/// result is never worse than the permutation it started from.
inline GraphEnsemble design_permutations(GraphEnsemble ens, const ModulationSpec& mod,
                                         const PermutationSearch& search = {}) {
  if (mod.size() != ens.n_left) throw DimensionMismatch("modulation length differs from N");
  const std::size_t n = ens.n_left;
  bool exhaustive = search.strategy == PermutationStrategy::exhaustive;
  if (search.strategy == PermutationStrategy::automatic) exhaustive = n <= search.exhaustive_max_n;
  if (exhaustive && n > 10) throw InvalidArgument("exhaustive permutation search is limited to N <= 10");

  for (std::size_t l = 0; l < ens.n_graphs; ++l) {
    const auto& sets = ens.partitions[l];
    if (ens.max_set_size() < 2) break;  // singleton sets: nothing to separate
    auto& current = ens.permutations[l];
    auto best = current;
    auto best_score = detail::score_of(detail::all_spreads(sets, best, mod));
    auto consider = [&](const std::vector<std::size_t>& cand) {
      const auto s = detail::score_of(detail::all_spreads(sets, cand, mod));
      if (s.better_than(best_score)) {
        best_score = s;
        best = cand;
      }
    };

    if (exhaustive) {
      consider(detail::exhaustive_best(sets, mod, n));
    } else {
      Engine rng(derive_seed(search.seed, 0x7e4b, l));
      auto perm = detail::stride_interleave(sets, mod, n);
      detail::local_search(sets, ens.owner[l], mod, perm, search.swap_budget, rng);
      consider(perm);
      for (std::size_t k = 0; k < search.restarts; ++k) {
        std::vector<std::size_t> start(n);
        std::iota(start.begin(), start.end(), std::size_t{0});
        std::shuffle(start.begin(), start.end(), rng);
        detail::local_search(sets, ens.owner[l], mod, start, search.swap_budget, rng);
        consider(start);
      }
    }
    current = best;
  }
  return ens;
}

// --- measurement matrix -----------------------------------------------------

struct C1Report {
  bool ok = true;
  std::size_t max_support = 0;
  std::size_t worst_row = 0;
};

/// True iff every row has at most R nonzeros; reports the densest row.
inline C1Report c1_check(const MeasurementMatrix& a, std::size_t r) {
  C1Report rep;
  for (std::size_t t = 0; t < a.rows(); ++t) {
    const auto s = a.row_support(t);
    if (s > rep.max_support) {
      rep.max_support = s;
      rep.worst_row = t;
    }
  }
  rep.ok = rep.max_support <= r;
  return rep;
}

/// Stacks H_l (.) T_l for every graph: per (l, m) the indicator row of set
/// (l, m) followed by the same row weighted by the permuted values.
inline MeasurementMatrix assemble_matrix(const GraphEnsemble& ens, const ModulationSpec& mod) {
  if (mod.size() != ens.n_left) throw DimensionMismatch("modulation length differs from N");
  MeasurementMatrix a(ens.n_left, ens.n_graphs, ens.n_right);
  for (std::size_t l = 0; l < ens.n_graphs; ++l) {
    for (std::size_t m = 0; m < ens.n_right; ++m) {
      std::vector<MatrixEntry> ones, weighted;
      for (auto n : ens.set(l, m)) {
        ones.push_back({n, 1.0});
        weighted.push_back({n, mod.value(ens.value_index(l, n))});
      }
      a.set_row(a.row_index(l, m, 0), std::move(ones));
      a.set_row(a.row_index(l, m, 1), std::move(weighted));
    }
  }
  if (ens.rf_limit > 0) {
    const auto rep = c1_check(a, ens.rf_limit);
    if (!rep.ok) {
      throw C1Violation("row " + std::to_string(rep.worst_row) + " has " +
                        std::to_string(rep.max_support) + " nonzeros, R = " +
                        std::to_string(ens.rf_limit));
    }
  }
  return a;
}

}  // namespace sbg
