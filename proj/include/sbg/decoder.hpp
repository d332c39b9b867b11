#pragma once

// Noiseless phaseless decoding: every non-zero right node is read as a
// singleton, and the graph whose estimate has the most nonzeros wins.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sbg/encoder.hpp"
#include "sbg/errors.hpp"
#include "sbg/measurement.hpp"
#include "sbg/modulation.hpp"

namespace sbg {

/// Nonnegative estimate of |x| and where it came from.
struct MagnitudeEstimate {
  static constexpr int kFused = -1;
  static constexpr int kNone = -2;

  std::vector<double> values;
  int source_graph = kNone;
  std::size_t flagged = 0;  // clamped ratios or skipped nodes

  MagnitudeEstimate() = default;
  explicit MagnitudeEstimate(std::size_t n, int source = kNone) : values(n, 0.0), source_graph(source) {}

  std::size_t nonzero_count() const {
    std::size_t c = 0;
    for (double v : values) c += (v > 0.0);
    return c;
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] > 0.0) s.push_back(i);
    return s;
  }
};

/// Node of `set` whose modulation value index is nearest to `value_index`;
/// ties go to the smaller node.
inline std::size_t snap_to_set(const GraphEnsemble& ens, std::size_t l, const IndexSet& set,
                               double value_index) {
  std::size_t best = set.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (auto node : set) {
    const double d = std::abs(static_cast<double>(ens.value_index(l, node)) - value_index);
    if (d < best_d) {
      best_d = d;
      best = node;
    }
  }
  return best;
}

inline void check_layout(const PhaselessBatch& y, const GraphEnsemble& ens) {
  if (y.n_graphs != ens.n_graphs || y.n_right != ens.n_right ||
      y.raw.size() != 2 * ens.n_graphs * ens.n_right || y.scale.size() != y.raw.size()) {
    throw DimensionMismatch("measurement batch layout does not match the ensemble");
  }
}

/// Singleton decoding of graph l. Nodes with y1 exactly zero are nulltons.
inline MagnitudeEstimate decode_graph(const PhaselessBatch& y, const GraphEnsemble& ens,
                                      std::size_t l, const ModulationSpec& mod) {
  check_layout(y, ens);
  if (mod.size() != ens.n_left) throw DimensionMismatch("modulation length differs from N");
  MagnitudeEstimate est(ens.n_left, static_cast<int>(l));
  for (std::size_t m = 0; m < ens.n_right; ++m) {
    const double y1 = y.y1(l, m);
    if (y1 == 0.0) continue;
    bool clamped = false;
    const double j = mod.index_from_pair(y1, y.y2(l, m), clamped);
    est.flagged += clamped;
    est.values[snap_to_set(ens, l, ens.set(l, m), j)] = y1;
  }
  return est;
}

/// Runs decode_graph on every graph and keeps the estimate with the most
/// nonzeros (ties: lowest graph index).
inline MagnitudeEstimate decode(const PhaselessBatch& y, const GraphEnsemble& ens,
                                const ModulationSpec& mod) {
  check_layout(y, ens);
  MagnitudeEstimate best;
  std::size_t best_count = 0;
  for (std::size_t l = 0; l < ens.n_graphs; ++l) {
    auto est = decode_graph(y, ens, l, mod);
    const auto c = est.nonzero_count();
    if (l == 0 || c > best_count) {
      best_count = c;
      best = std::move(est);
    }
  }
  return best;
}

}  // namespace sbg
