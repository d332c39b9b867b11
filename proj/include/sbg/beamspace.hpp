#pragma once

// Beam-space channel model: ULA steering vectors, the unitary DFT basis,
// hybrid precoder factorization and the phaseless measurement process.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbg/errors.hpp"
#include "sbg/measurement.hpp"
#include "sbg/random.hpp"

namespace sbg {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

struct ChannelConfig {
  std::size_t n_antennas = 128;
  std::size_t n_rf_chains = 8;
  double wavelength = 1.0;
  double element_spacing = 0.5;

  void validate() const {
    if (n_antennas == 0) throw InvalidArgument("n_antennas must be positive");
    if (n_rf_chains == 0) throw InvalidArgument("n_rf_chains must be positive");
    if (n_rf_chains > n_antennas) throw InvalidArgument("n_rf_chains must not exceed n_antennas");
    if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
    if (!(element_spacing > 0.0)) throw InvalidArgument("element_spacing must be positive");
  }

  /// Phase progression per element, 2*pi*d*sin(theta)/lambda.
  double spatial_frequency(double theta) const {
    return 2.0 * std::numbers::pi * element_spacing * std::sin(theta) / wavelength;
  }
};

/// Unitary DFT column k: entry n is exp(j 2 pi n k / N) / sqrt(N).
inline CVector dft_column(std::size_t k, std::size_t n) {
  CVector col(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    // reduce n*k mod N before scaling to keep the argument exact
    const double arg = 2.0 * std::numbers::pi * static_cast<double>((i * k) % n) /
                       static_cast<double>(n);
    col[i] = std::polar(norm, arg);
  }
  return col;
}

inline CVector steering_vector(double theta, const ChannelConfig& cfg) {
  const std::size_t n = cfg.n_antennas;
  const double psi = cfg.spatial_frequency(theta);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  CVector a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::polar(norm, static_cast<double>(i) * psi);
  return a;
}

/// AoD in [0, 2pi) whose steering vector is DFT column k. Grid index k maps
/// to spatial frequency 2*pi*k/N, wrapped into (-pi, pi].
inline double grid_angle(std::size_t k, const ChannelConfig& cfg) {
  const auto n = static_cast<double>(cfg.n_antennas);
  double kk = static_cast<double>(k % cfg.n_antennas);
  if (kk > n / 2.0) kk -= n;
  const double s = kk * cfg.wavelength / (n * cfg.element_spacing);
  if (std::abs(s) > 1.0 + 1e-12) {
    throw InvalidArgument("grid index " + std::to_string(k) +
                          " is not reachable with this element spacing");
  }
  double theta = std::asin(std::clamp(s, -1.0, 1.0));
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  return theta;
}

/// Grid index of an angle, if it lies on the DFT grid.
inline std::optional<std::size_t> grid_index_of(double theta, const ChannelConfig& cfg,
                                                double tol = 1e-9) {
  const auto n = static_cast<double>(cfg.n_antennas);
  double k = cfg.spatial_frequency(theta) * n / (2.0 * std::numbers::pi);
  const double rounded = std::round(k);
  if (std::abs(k - rounded) > tol) return std::nullopt;
  auto idx = static_cast<long long>(rounded) % static_cast<long long>(cfg.n_antennas);
  if (idx < 0) idx += static_cast<long long>(cfg.n_antennas);
  return static_cast<std::size_t>(idx);
}

struct PathSet {
  CVector gains;
  std::vector<double> aods;
  bool on_grid = false;

  static PathSet on_grid_paths(std::span<const std::size_t> grid_indices,
                               std::span<const cplx> gains, const ChannelConfig& cfg) {
    if (grid_indices.size() != gains.size()) {
      throw DimensionMismatch("grid indices and gains differ in length");
    }
    PathSet p;
    p.on_grid = true;
    p.gains.assign(gains.begin(), gains.end());
    for (auto k : grid_indices) p.aods.push_back(grid_angle(k, cfg));
    return p;
  }
};

/// Complex length-N beam-space vector together with its support.
class SparseSignal {
 public:
  SparseSignal() = default;

  explicit SparseSignal(CVector coeffs) : coeffs_(std::move(coeffs)) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] != cplx{}) support_.push_back(i);
    }
  }

  static SparseSignal from_support(std::size_t n, std::span<const std::size_t> support,
                                   std::span<const cplx> gains) {
    if (support.size() != gains.size()) throw DimensionMismatch("support and gains differ in length");
    CVector c(n);
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i] >= n) throw InvalidArgument("support index out of range");
      c[support[i]] += gains[i];
    }
    return SparseSignal(std::move(c));
  }

  const CVector& coeffs() const { return coeffs_; }
  const std::vector<std::size_t>& support() const { return support_; }
  std::size_t size() const { return coeffs_.size(); }
  std::size_t sparsity() const { return support_.size(); }

  std::vector<double> magnitudes() const {
    std::vector<double> z(coeffs_.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::abs(coeffs_[i]);
    return z;
  }

 private:
  CVector coeffs_;
  std::vector<std::size_t> support_;
};

enum class NoiseConvention {
  total_power,    // E|w|^2 = sigma^2, each quadrature sigma^2/2
  per_quadrature  // each quadrature sigma^2, E|w|^2 = 2 sigma^2
};

inline const char* to_string(NoiseConvention c) {
  return c == NoiseConvention::total_power ? "total-power" : "per-quadrature";
}

struct NoiseModel {
  double variance = 0.0;
  bool cfo_enabled = true;
  NoiseConvention convention = NoiseConvention::total_power;

  /// Total complex noise power actually injected per measurement.
  double injected_power() const {
    return convention == NoiseConvention::total_power ? variance : 2.0 * variance;
  }
};

struct PrecoderFactorization {
  std::vector<std::size_t> selection_columns;
  CVector baseband_weights;
  std::size_t time_index = 0;
};

struct SynthesizedChannel {
  CVector h;
  SparseSignal x;
};

/// h = D x for the unitary DFT basis.
inline CVector beamspace_to_antenna(const CVector& x) {
  const std::size_t n = x.size();
  CVector h(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (x[k] == cplx{}) continue;
    const auto col = dft_column(k, n);
    for (std::size_t i = 0; i < n; ++i) h[i] += col[i] * x[k];
  }
  return h;
}

/// x = D^H h.
inline CVector antenna_to_beamspace(const CVector& h) {
  const std::size_t n = h.size();
  CVector x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = dft_column(k, n);
    cplx acc{};
    for (std::size_t i = 0; i < n; ++i) acc += std::conj(col[i]) * h[i];
    x[k] = acc;
  }
  return x;
}

inline SynthesizedChannel synthesize_channel(const PathSet& paths, const ChannelConfig& cfg) {
  cfg.validate();
  if (paths.gains.empty()) throw InvalidArgument("a channel needs at least one path");
  if (paths.gains.size() != paths.aods.size()) throw DimensionMismatch("gains and aods differ in length");

  const std::size_t n = cfg.n_antennas;
  CVector h(n);
  for (std::size_t p = 0; p < paths.gains.size(); ++p) {
    const auto a = steering_vector(paths.aods[p], cfg);
    for (std::size_t i = 0; i < n; ++i) h[i] += paths.gains[p] * a[i];
  }

  if (!paths.on_grid) return {h, SparseSignal(antenna_to_beamspace(h))};

  CVector x(n);
  for (std::size_t p = 0; p < paths.gains.size(); ++p) {
    const auto k = grid_index_of(paths.aods[p], cfg);
    if (!k) throw InvalidArgument("path marked on-grid has an off-grid AoD");
    x[*k] += paths.gains[p];
  }
  return {h, SparseSignal(std::move(x))};
}

/// Split a C1-feasible row a(t) into the column selection S(t) and the
/// baseband weights f_BB(t) with a(t) = S(t) f_BB(t).
inline PrecoderFactorization factorize_row(std::span<const cplx> a_row, const ChannelConfig& cfg,
                                           std::size_t time_index = 0) {
  if (a_row.size() != cfg.n_antennas) throw DimensionMismatch("row length differs from N");
  PrecoderFactorization f;
  f.time_index = time_index;
  for (std::size_t i = 0; i < a_row.size(); ++i) {
    if (a_row[i] == cplx{}) continue;
    f.selection_columns.push_back(i);
    f.baseband_weights.push_back(a_row[i]);
  }
  if (f.selection_columns.size() > cfg.n_rf_chains) {
    throw C1Violation("row " + std::to_string(time_index) + " has " +
                      std::to_string(f.selection_columns.size()) + " nonzeros but only " +
                      std::to_string(cfg.n_rf_chains) + " RF chains");
  }
  return f;
}

/// Physical precoder b(t) = D^* S(t) f_BB(t).
inline CVector precoder_vector(const PrecoderFactorization& f, std::size_t n) {
  CVector b(n);
  for (std::size_t j = 0; j < f.selection_columns.size(); ++j) {
    const auto col = dft_column(f.selection_columns[j], n);
    for (std::size_t i = 0; i < n; ++i) b[i] += std::conj(col[i]) * f.baseband_weights[j];
  }
  return b;
}

/// Effective measurement row D^T b(t) seen by the beam-space signal.
inline CVector effective_row(const CVector& b) {
  const std::size_t n = b.size();
  CVector a(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = dft_column(k, n);
    cplx acc{};
    for (std::size_t i = 0; i < n; ++i) acc += col[i] * b[i];
    a[k] = acc;
  }
  return a;
}

enum class RowScaling {
  none,      // transmit rows as designed
  unit_norm  // normalize each beamforming vector to unit norm
};

/// y_t = |e^{j phi_t} (A[t,:] x) / s_t + w_t|, where s_t is the row norm under
/// unit_norm scaling and 1 otherwise.
inline PhaselessBatch measure(const SparseSignal& x, const MeasurementMatrix& a,
                              const NoiseModel& noise, std::uint64_t seed,
                              RowScaling scaling = RowScaling::none) {
  if (a.cols() != x.size()) throw DimensionMismatch("matrix columns differ from signal length");
  if (noise.variance < 0.0) throw InvalidArgument("noise variance must be nonnegative");

  PhaselessBatch batch;
  batch.n_graphs = a.n_graphs();
  batch.n_right = a.n_right();
  batch.raw.resize(a.rows());
  batch.scale.assign(a.rows(), 1.0);

  Engine rng(seed);
  const double power = noise.injected_power();
  const auto& c = x.coeffs();
  for (std::size_t t = 0; t < a.rows(); ++t) {
    cplx u{};
    for (const auto& e : a.row(t)) u += e.value * c[e.col];
    if (scaling == RowScaling::unit_norm) {
      const double norm = a.row_norm(t);
      if (norm > 0.0) {
        batch.scale[t] = norm;
        u /= norm;
      }
    }
    if (noise.cfo_enabled) {
      // the phase only matters once noise is added; |e^{j phi} u| = |u|
      const double phi = uniform_phase(rng);
      if (power > 0.0) u *= std::polar(1.0, phi);
    }
    if (power > 0.0) u += complex_gaussian(rng, power);
    batch.raw[t] = std::abs(u);
  }
  return batch;
}

inline double norm_squared(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

/// sigma^2 such that 10 log10(||h||^2 / (N sigma^2)) = snr_db.
inline double sigma_for_snr(std::span<const cplx> h, double snr_db, const ChannelConfig& cfg) {
  const double e = norm_squared(h);
  if (!(e > 0.0)) throw InvalidArgument("SNR is undefined for a zero channel");
  return e / (static_cast<double>(cfg.n_antennas) * std::pow(10.0, snr_db / 10.0));
}

inline double snr_for_sigma(std::span<const cplx> h, double variance, const ChannelConfig& cfg) {
  const double e = norm_squared(h);
  if (!(e > 0.0)) throw InvalidArgument("SNR is undefined for a zero channel");
  return 10.0 * std::log10(e / (static_cast<double>(cfg.n_antennas) * variance));
}

}  // namespace sbg
