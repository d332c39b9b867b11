#pragma once

// Noisy-regime decoding: energy-detector nullton test, K estimation from
// the least-nullton graphs, argmin location estimation against the
// permuted modulation values, and set-intersection fusion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "sbg/decoder.hpp"
#include "sbg/encoder.hpp"
#include "sbg/errors.hpp"
#include "sbg/format.hpp"
#include "sbg/measurement.hpp"
#include "sbg/modulation.hpp"
#include "sbg/random.hpp"

namespace sbg {

enum class Calibration {
  standard,        // |w| Rayleigh with E|w|^2 = sigma^2
  per_quadrature  // |w| Rayleigh with per-quadrature variance sigma^2
};

inline const char* to_string(Calibration c) {
  return c == Calibration::standard ? "standard" : "per-quadrature";
}

/// The false-alarm target is stored as -ln(P_FA) so the default
/// P_FA = e^{-9/2} gives epsilon = 3 sigma exactly in per-quadrature mode.
struct DetectorConfig {
  double neg_log_false_alarm = 4.5;
  Calibration calibration = Calibration::standard;

  static DetectorConfig with_false_alarm(double pfa, Calibration c = Calibration::standard) {
    if (!(pfa > 0.0 && pfa < 1.0)) throw InvalidArgument("false alarm must lie in (0, 1)");
    return {-std::log(pfa), c};
  }

  double false_alarm() const { return std::exp(-neg_log_false_alarm); }

  /// epsilon with P(|w| > epsilon | H0) = P_FA.
  /// standard:      P = exp(-eps^2 / sigma^2)
  /// per-quadrature:  P = exp(-eps^2 / (2 sigma^2))
  double threshold(double variance) const {
    if (variance < 0.0) throw InvalidArgument("noise variance must be nonnegative");
    const double k = calibration == Calibration::standard ? 1.0 : 2.0;
    return std::sqrt(k * neg_log_false_alarm) * std::sqrt(variance);
  }
};

/// Per right node of graph l: true when the node is declared a nullton.
inline std::vector<bool> detect_nulltons(const PhaselessBatch& y, std::size_t l,
                                         const DetectorConfig& cfg, double variance) {
  const double eps = cfg.threshold(variance);
  std::vector<bool> nullton(y.n_right);
  for (std::size_t m = 0; m < y.n_right; ++m) nullton[m] = !(y.raw1(l, m) > eps);
  return nullton;
}

struct SingletonRecord {
  std::size_t right_node = 0;
  IndexSet set;
  std::size_t chosen = 0;
  double ratio = 0.0;
  double y1 = 0.0;
  double y2 = 0.0;
};

struct GraphDecodeReport {
  std::size_t graph = 0;
  std::size_t nullton_count = 0;
  bool is_nm_candidate = false;
  MagnitudeEstimate estimate;
  std::vector<SingletonRecord> singletons;
};

/// K_hat = M - min_l J_l; flags every graph attaining the minimum.
inline std::size_t estimate_k(std::span<GraphDecodeReport> reports, std::size_t m) {
  if (reports.empty()) throw InvalidArgument("estimate_k needs at least one graph report");
  std::size_t j_min = reports.front().nullton_count;
  for (const auto& r : reports) j_min = std::min(j_min, r.nullton_count);
  for (auto& r : reports) r.is_nm_candidate = (r.nullton_count == j_min);
  return m - j_min;
}

/// Location argmin over the right node's set of |t^(l) - y2/y1|
/// (ties: smaller node), magnitude y1. Nodes whose raw y1 does not exceed
/// `threshold` are skipped and flagged.
inline MagnitudeEstimate robust_decode_graph(const PhaselessBatch& y, const GraphEnsemble& ens,
                                             std::size_t l, const ModulationSpec& mod,
                                             double threshold,
                                             std::vector<SingletonRecord>* records = nullptr) {
  check_layout(y, ens);
  if (mod.size() != ens.n_left) throw DimensionMismatch("modulation length differs from N");
  MagnitudeEstimate est(ens.n_left, static_cast<int>(l));
  for (std::size_t m = 0; m < ens.n_right; ++m) {
    if (!(y.raw1(l, m) > threshold)) continue;
    const double y1 = y.y1(l, m);
    const double y2 = y.y2(l, m);
    if (!(y1 > 0.0)) {
      ++est.flagged;
      continue;
    }
    const double ratio = y2 / y1;
    const auto& set = ens.set(l, m);
    std::size_t best = set.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (auto node : set) {
      const double d = std::abs(mod.value(ens.value_index(l, node)) - ratio);
      if (d < best_d) {
        best_d = d;
        best = node;
      }
    }
    est.values[best] = y1;
    if (records) records->push_back({m, set, best, ratio, y1, y2});
  }
  return est;
}

struct FusionOutcome {
  MagnitudeEstimate estimate;
  bool fallback = false;     // an intersection was empty; a whole estimate was returned
  std::size_t random_picks = 0;
};

namespace detail {

// Mean that is exact whenever all inputs are equal.
inline double stable_mean(std::span<const double> v) {
  const double first = v.front();
  double acc = 0.0;
  for (double x : v) acc += x - first;
  return first + acc / static_cast<double>(v.size());
}

template <class T>
const T& pick_uniform(const std::vector<T>& items, Engine& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

}  // namespace detail

/// Set-intersection fusion of estimates from several NM-graph candidates.
/// The rank-k nonzero of each estimate (by decreasing magnitude) names a
/// left-node set in its graph; the sets are intersected. A single survivor
/// is the location. Several survivors are narrowed to the locations the
/// graphs themselves decoded (most votes wins) and otherwise drawn
/// uniformly. An empty intersection returns one whole estimate drawn
/// uniformly. Magnitudes are averaged rank by rank.
inline FusionOutcome fuse_estimates(std::span<const MagnitudeEstimate> estimates,
                                    const GraphEnsemble& ens, Engine& rng) {
  FusionOutcome out;
  if (estimates.empty()) {
    out.estimate = MagnitudeEstimate(ens.n_left, MagnitudeEstimate::kFused);
    return out;
  }
  if (estimates.size() == 1) {
    out.estimate = estimates.front();
    return out;
  }

  std::vector<std::vector<std::size_t>> ranked;
  for (const auto& e : estimates) {
    if (e.source_graph < 0 || static_cast<std::size_t>(e.source_graph) >= ens.n_graphs) {
      throw InvalidArgument("fusion needs estimates tagged with their graph");
    }
    auto s = e.support();
    std::stable_sort(s.begin(), s.end(),
                     [&](std::size_t a, std::size_t b) { return e.values[a] > e.values[b]; });
    ranked.push_back(std::move(s));
  }
  const std::size_t k_hat = ranked.front().size();
  for (const auto& r : ranked) {
    if (r.size() != k_hat) throw InvalidArgument("fused estimates must share the same nonzero count");
  }

  auto fallback = [&] {
    std::vector<std::size_t> idx(estimates.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    FusionOutcome f;
    f.fallback = true;
    f.random_picks = out.random_picks + 1;
    f.estimate = estimates[detail::pick_uniform(idx, rng)];
    return f;
  };

  MagnitudeEstimate fused(ens.n_left, MagnitudeEstimate::kFused);
  std::vector<double> mags(estimates.size());
  for (std::size_t k = 0; k < k_hat; ++k) {
    IndexSet common;
    std::map<std::size_t, std::size_t> votes;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const auto g = static_cast<std::size_t>(estimates[i].source_graph);
      const auto node = ranked[i][k];
      mags[i] = estimates[i].values[node];
      ++votes[node];
      const auto& set = ens.set(g, ens.set_of(g, node));
      if (i == 0) {
        common = set;
      } else {
        IndexSet next;
        std::set_intersection(common.begin(), common.end(), set.begin(), set.end(),
                              std::back_inserter(next));
        common = std::move(next);
      }
    }
    // locations already used by a higher rank are not available
    std::erase_if(common, [&](std::size_t n) { return fused.values[n] > 0.0; });
    if (common.empty()) return fallback();

    std::size_t chosen = common.front();
    if (common.size() > 1) {
      std::size_t top = 0;
      IndexSet leaders;
      for (auto n : common) {
        const auto it = votes.find(n);
        const std::size_t v = it == votes.end() ? 0 : it->second;
        if (v > top) {
          top = v;
          leaders = {n};
        } else if (v == top && v > 0) {
          leaders.push_back(n);
        }
      }
      if (leaders.size() == 1) {
        chosen = leaders.front();
      } else {
        chosen = detail::pick_uniform(leaders.empty() ? common : leaders, rng);
        ++out.random_picks;
      }
    }
    fused.values[chosen] = detail::stable_mean(mags);
  }
  out.estimate = std::move(fused);
  return out;
}

struct RobustDecodeResult {
  MagnitudeEstimate estimate;
  std::size_t k_hat = 0;
  std::vector<GraphDecodeReport> reports;
  std::vector<std::size_t> candidates;
  std::size_t dropped = 0;  // candidates whose nonzero count differed from K_hat
  bool fallback = false;
  std::size_t random_picks = 0;
};

/// Full noisy-regime pipeline for one batch. All random choices come from
/// `seed`, so the result is a pure function of the inputs.
inline RobustDecodeResult robust_decode(const PhaselessBatch& y, const GraphEnsemble& ens,
                                        const ModulationSpec& mod, const DetectorConfig& det,
                                        double variance, std::uint64_t seed) {
  check_layout(y, ens);
  RobustDecodeResult res;
  const double eps = det.threshold(variance);

  res.reports.resize(ens.n_graphs);
  for (std::size_t l = 0; l < ens.n_graphs; ++l) {
    auto& rep = res.reports[l];
    rep.graph = l;
    const auto nullton = detect_nulltons(y, l, det, variance);
    rep.nullton_count = static_cast<std::size_t>(std::count(nullton.begin(), nullton.end(), true));
  }
  res.k_hat = estimate_k(res.reports, ens.n_right);

  std::vector<MagnitudeEstimate> pool;
  for (auto& rep : res.reports) {
    if (!rep.is_nm_candidate) continue;
    rep.estimate = robust_decode_graph(y, ens, rep.graph, mod, eps, &rep.singletons);
    if (rep.estimate.nonzero_count() != res.k_hat) {
      ++res.dropped;
      continue;
    }
    res.candidates.push_back(rep.graph);
    pool.push_back(rep.estimate);
  }

  if (res.k_hat == 0 || pool.empty()) {
    res.estimate = MagnitudeEstimate(ens.n_left, MagnitudeEstimate::kNone);
    return res;
  }
  Engine rng(derive_seed(seed, 0xf05e));
  auto fused = fuse_estimates(pool, ens, rng);
  res.estimate = std::move(fused.estimate);
  res.fallback = fused.fallback;
  res.random_picks = fused.random_picks;
  return res;
}

/// One CSV row per right node of every graph report.
inline void write_report_csv(std::ostream& os, std::span<const GraphDecodeReport> reports) {
  os << "graph,right_node,nullton_count,nm_candidate,set,chosen,ratio,y1,y2\n";
  for (const auto& r : reports) {
    for (const auto& s : r.singletons) {
      os << r.graph << ',' << s.right_node << ',' << r.nullton_count << ','
         << (r.is_nm_candidate ? 1 : 0) << ',';
      for (std::size_t i = 0; i < s.set.size(); ++i) os << (i ? " " : "") << s.set[i];
      os << ',' << s.chosen << ',' << format_double(s.ratio) << ',' << format_double(s.y1) << ','
         << format_double(s.y2) << '\n';
    }
  }
}

}  // namespace sbg
