#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sbg/errors.hpp"

namespace sbg {

struct MatrixEntry {
  std::size_t col;
  double value;
};

/// Sparse 2ML x N measurement matrix. Rows come in pairs, one pair per
/// (graph l, right node m): row 2(lM+m) is the set indicator, row 2(lM+m)+1
/// the indicator weighted by the graph's modulation values.
class MeasurementMatrix {
 public:
  MeasurementMatrix() = default;
  MeasurementMatrix(std::size_t n_cols, std::size_t n_graphs, std::size_t n_right)
      : n_cols_(n_cols), n_graphs_(n_graphs), n_right_(n_right),
        rows_(2 * n_graphs * n_right) {}

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return n_cols_; }
  std::size_t n_graphs() const { return n_graphs_; }
  std::size_t n_right() const { return n_right_; }

  /// Row index of entry `which` (0 = indicator, 1 = modulated) of pair (l, m).
  std::size_t row_index(std::size_t l, std::size_t m, std::size_t which) const {
    return 2 * (l * n_right_ + m) + which;
  }

  std::span<const MatrixEntry> row(std::size_t t) const { return rows_.at(t); }

  void set_row(std::size_t t, std::vector<MatrixEntry> entries) {
    for (const auto& e : entries) {
      if (e.col >= n_cols_) throw DimensionMismatch("matrix entry column out of range");
    }
    rows_.at(t) = std::move(entries);
  }

  std::vector<double> dense_row(std::size_t t) const {
    std::vector<double> out(n_cols_, 0.0);
    for (const auto& e : rows_.at(t)) out[e.col] += e.value;
    return out;
  }

  /// Number of nonzero entries in row t.
  std::size_t row_support(std::size_t t) const {
    std::size_t count = 0;
    for (const auto& e : rows_.at(t)) count += (e.value != 0.0);
    return count;
  }

  double row_norm(std::size_t t) const {
    double s = 0.0;
    for (const auto& e : rows_.at(t)) s += e.value * e.value;
    return std::sqrt(s);
  }

 private:
  std::size_t n_cols_ = 0;
  std::size_t n_graphs_ = 0;
  std::size_t n_right_ = 0;
  std::vector<std::vector<MatrixEntry>> rows_;
};

/// Phaseless observations y_t in the row layout of the matrix that produced
/// them. When rows were normalized to unit norm before transmission, `scale`
/// holds each row's original norm; `y1`/`y2` undo it for the decoders while
/// `raw1` stays in the noise domain the detector threshold refers to.
struct PhaselessBatch {
  std::size_t n_graphs = 0;
  std::size_t n_right = 0;
  std::vector<double> raw;
  std::vector<double> scale;

  std::size_t index(std::size_t l, std::size_t m, std::size_t which) const {
    return 2 * (l * n_right + m) + which;
  }
  double raw1(std::size_t l, std::size_t m) const { return raw[index(l, m, 0)]; }
  double raw2(std::size_t l, std::size_t m) const { return raw[index(l, m, 1)]; }
  double y1(std::size_t l, std::size_t m) const {
    const auto i = index(l, m, 0);
    return raw[i] * scale[i];
  }
  double y2(std::size_t l, std::size_t m) const {
    const auto i = index(l, m, 1);
    return raw[i] * scale[i];
  }
};

}  // namespace sbg
