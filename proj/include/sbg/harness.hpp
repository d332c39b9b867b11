#pragma once

// Monte Carlo experiment orchestration: single trials, metrics, parallel
// experiment runs, parameter sweeps, CSV output and the two-sided
// (array receiver) beam scan.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sbg/beamspace.hpp"
#include "sbg/decoder.hpp"
#include "sbg/encoder.hpp"
#include "sbg/errors.hpp"
#include "sbg/format.hpp"
#include "sbg/modulation.hpp"
#include "sbg/random.hpp"
#include "sbg/robust.hpp"
#include "sbg/theory.hpp"

namespace sbg {

enum class Mode { noiseless, robust };
enum class PermutationMode { automatic, identity, designed };
enum class SweepAxis { t, n, m, snr };

inline const char* to_string(Mode m) { return m == Mode::noiseless ? "noiseless" : "robust"; }

inline const char* to_string(PermutationMode p) {
  switch (p) {
    case PermutationMode::identity: return "identity";
    case PermutationMode::designed: return "designed";
    default: return "auto";
  }
}

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::t: return "t";
    case SweepAxis::n: return "n";
    case SweepAxis::m: return "m";
    default: return "snr";
  }
}

/// Squared relative error below which a trial counts as exact recovery.
inline constexpr double kSuccessThreshold = 1e-8;

struct ExperimentConfig {
  std::size_t n = 128;
  std::size_t rf_chains = 0;  // 0: ceil(N/M)
  std::size_t m = 16;
  std::size_t l = 2;
  std::size_t k = 2;
  ModulationKind modulation = ModulationKind::linear;
  double omega = 0.0;  // cosine only; 0 selects pi/(2N)
  PermutationMode permutation = PermutationMode::automatic;
  std::size_t swap_budget = 512;
  bool on_grid = true;
  Mode mode = Mode::noiseless;
  double snr_db = 20.0;
  NoiseConvention noise_convention = NoiseConvention::total_power;
  std::optional<Calibration> calibration;  // defaults to the one matching the noise convention
  double neg_log_false_alarm = 4.5;
  bool cfo = true;
  bool normalize_rows = true;
  bool fixed_ensemble = false;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;

  std::size_t t() const { return 2 * m * l; }
  std::size_t rf() const { return rf_chains ? rf_chains : (n + m - 1) / m; }

  Calibration detector_calibration() const {
    if (calibration) return *calibration;
    return noise_convention == NoiseConvention::total_power ? Calibration::standard
                                                            : Calibration::per_quadrature;
  }

  DetectorConfig detector() const { return {neg_log_false_alarm, detector_calibration()}; }

  bool designed_permutations() const {
    if (permutation == PermutationMode::automatic) return mode == Mode::robust;
    return permutation == PermutationMode::designed;
  }

  ChannelConfig channel() const { return {n, rf(), 1.0, 0.5}; }

  ModulationSpec modulation_spec() const {
    if (modulation == ModulationKind::linear) return ModulationSpec::linear(n);
    return ModulationSpec::cosine(n, omega > 0.0 ? std::optional<double>(omega) : std::nullopt);
  }

  void validate() const {
    if (n == 0) throw ConfigError("n must be positive");
    if (m == 0 || m > n) throw ConfigError("m must satisfy 1 <= m <= n");
    if (l == 0) throw ConfigError("l must be at least 1");
    if (k == 0 || k > n) throw ConfigError("k must satisfy 1 <= k <= n");
    if (trials == 0) throw ConfigError("trials must be at least 1");
    if (rf() > n) throw ConfigError("rf_chains must not exceed n");
    if ((n + m - 1) / m > rf()) {
      throw ConfigError("C1 infeasible: ceil(n/m) = " + std::to_string((n + m - 1) / m) +
                        " exceeds rf_chains = " + std::to_string(rf()));
    }
    if (!(neg_log_false_alarm > 0.0)) throw ConfigError("false alarm must lie in (0, 1)");
    if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
    try {
      (void)modulation_spec();
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
};

// --- metrics ------------------------------------------------------------------

/// ||z_hat - z||^2 / ||z||^2.
inline double nmse(const MagnitudeEstimate& est, std::span<const double> truth) {
  if (est.values.size() != truth.size()) throw DimensionMismatch("estimate and truth differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = est.values[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (!(den > 0.0)) throw InvalidArgument("NMSE is undefined for a zero truth vector");
  return num / den;
}

struct GainResult {
  double gain = 0.0;
  std::size_t direction = 0;
  bool flagged = false;  // estimate was all zero; a random direction was used
};

/// N |a_t^H(theta_hat) h|^2 / ||h||^2 with theta_hat the grid direction of
/// the estimate's largest entry. The steering vector at grid index k is the
/// DFT column k.
inline GainResult beamforming_gain(const MagnitudeEstimate& est, std::span<const cplx> h,
                                   const ChannelConfig& cfg, Engine& rng) {
  if (h.size() != cfg.n_antennas || est.values.size() != cfg.n_antennas) {
    throw DimensionMismatch("channel, estimate and array size disagree");
  }
  GainResult g;
  double best = 0.0;
  for (std::size_t i = 0; i < est.values.size(); ++i) {
    if (est.values[i] > best) {
      best = est.values[i];
      g.direction = i;
    }
  }
  if (!(best > 0.0)) {
    std::uniform_int_distribution<std::size_t> d(0, cfg.n_antennas - 1);
    g.direction = d(rng);
    g.flagged = true;
  }
  const auto a = dft_column(g.direction, cfg.n_antennas);
  cplx ip{};
  for (std::size_t i = 0; i < h.size(); ++i) ip += std::conj(a[i]) * h[i];
  const double e = norm_squared(h);
  if (!(e > 0.0)) throw InvalidArgument("beamforming gain is undefined for a zero channel");
  g.gain = static_cast<double>(cfg.n_antennas) * std::norm(ip) / e;
  return g;
}

/// True when some graph puts every support element in its own set.
inline bool has_nm_graph(const GraphEnsemble& ens, std::span<const std::size_t> support) {
  std::vector<std::size_t> hits(ens.n_right);
  for (std::size_t l = 0; l < ens.n_graphs; ++l) {
    std::fill(hits.begin(), hits.end(), 0);
    bool ok = true;
    for (auto s : support) {
      if (++hits[ens.set_of(l, s)] > 1) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

// --- trials -------------------------------------------------------------------

struct TrialRecord {
  bool success = false;
  double nmse = 0.0;
  double bf_gain = 0.0;
  bool gain_flagged = false;
  bool nm_graph_exists = false;
  bool fallback = false;
  std::size_t k_hat = 0;
  double noise_variance = 0.0;
  std::vector<double> truth;
  MagnitudeEstimate estimate;
  std::vector<GraphDecodeReport> reports;  // robust mode only
};

/// Uniformly random K-subset of {0..N-1}, sorted.
inline std::vector<std::size_t> random_support(std::size_t n, std::size_t k, Engine& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, n - 1);
    std::swap(idx[i], idx[d(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline GraphEnsemble make_trial_ensemble(const ExperimentConfig& cfg, const ModulationSpec& mod,
                                         std::uint64_t seed) {
  auto ens = build_ensemble(cfg.n, cfg.m, cfg.l, cfg.rf(), seed);
  if (cfg.designed_permutations()) {
    PermutationSearch search;
    search.swap_budget = cfg.swap_budget;
    search.seed = derive_seed(seed, 0x5ea7c4);
    ens = design_permutations(std::move(ens), mod, search);
  }
  return ens;
}

/// The ensemble shared by all trials of a fixed-ensemble experiment.
inline GraphEnsemble frozen_ensemble(const ExperimentConfig& cfg) {
  return make_trial_ensemble(cfg, cfg.modulation_spec(), derive_seed(cfg.seed, 0xf12e));
}

/// One end-to-end run: random K-sparse on-grid channel with CN(0,1) gains,
/// fresh ensemble (unless `fixed` is given), measurement, decoding, metrics.
inline TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t seed,
                             const GraphEnsemble* fixed = nullptr) {
  const auto ch = cfg.channel();
  const auto mod = cfg.modulation_spec();
  Engine rng(derive_seed(seed, 0x51a1));

  PathSet paths;
  const auto support = random_support(cfg.n, cfg.k, rng);
  CVector gains(cfg.k);
  for (auto& g : gains) {
    do {
      g = complex_gaussian(rng, 1.0);
    } while (g == cplx{});
  }
  if (cfg.on_grid) {
    paths = PathSet::on_grid_paths(support, gains, ch);
  } else {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    paths.gains = gains;
    for (std::size_t p = 0; p < cfg.k; ++p) paths.aods.push_back(angle(rng));
  }
  const auto chan = synthesize_channel(paths, ch);

  const auto ens = fixed ? *fixed : make_trial_ensemble(cfg, mod, derive_seed(seed, 0xe75e));
  const auto a = assemble_matrix(ens, mod);

  TrialRecord rec;
  rec.truth = chan.x.magnitudes();
  rec.nm_graph_exists = has_nm_graph(ens, chan.x.support());
  rec.noise_variance = cfg.mode == Mode::robust ? sigma_for_snr(chan.h, cfg.snr_db, ch) : 0.0;

  const NoiseModel noise{rec.noise_variance, cfg.cfo, cfg.noise_convention};
  const auto batch = measure(chan.x, a, noise, derive_seed(seed, 0x7015e),
                             cfg.normalize_rows ? RowScaling::unit_norm : RowScaling::none);

  if (cfg.mode == Mode::noiseless) {
    rec.estimate = decode(batch, ens, mod);
    rec.k_hat = rec.estimate.nonzero_count();
  } else {
    auto res = robust_decode(batch, ens, mod, cfg.detector(), rec.noise_variance,
                             derive_seed(seed, 0xf0f0));
    rec.estimate = std::move(res.estimate);
    rec.k_hat = res.k_hat;
    rec.fallback = res.fallback;
    rec.reports = std::move(res.reports);
  }

  rec.nmse = nmse(rec.estimate, rec.truth);
  rec.success = rec.nmse < kSuccessThreshold;
  const auto g = beamforming_gain(rec.estimate, chan.h, ch, rng);
  rec.bf_gain = g.gain;
  rec.gain_flagged = g.flagged;
  return rec;
}

/// Calls f(i) for i in [0, count) on `threads` workers. Each index is
/// processed exactly once; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& f) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct MetricRow {
  ExperimentConfig config;
  double success_rate = 0.0;
  double nmse = 0.0;         // mean over trials
  double nmse_median = 0.0;
  double bf_gain = 0.0;      // mean over trials
  std::optional<double> theory_p;
  double wall_ms = 0.0;
  std::size_t trials = 0;
  std::size_t nm_graph_trials = 0;
  std::size_t fallbacks = 0;
  std::size_t gain_flagged = 0;
};

inline std::optional<double> theory_success(const ExperimentConfig& cfg) {
  if (cfg.mode != Mode::noiseless || !cfg.on_grid) return std::nullopt;
  theory::CodeParams cp;
  cp.n = cfg.n;
  cp.m = cfg.m;
  cp.l = cfg.l;
  cp.k = cfg.k;
  if (cfg.m < cfg.k) return 0.0;
  return theory::to_double(theory::success_prob(theory::nm_graph_prob(cp.n, cp.m, cp.k).value, cp.l));
}

/// Runs cfg.trials trials. Trial i uses derive_seed(cfg.seed, i), and the
/// reduction runs in trial order, so the row does not depend on `threads`.
inline MetricRow run_experiment(const ExperimentConfig& cfg, std::size_t threads = 1,
                                const GraphEnsemble* fixed = nullptr) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  std::optional<GraphEnsemble> frozen;
  if (!fixed && cfg.fixed_ensemble) {
    frozen = frozen_ensemble(cfg);
    fixed = &*frozen;
  }

  struct Summary {
    bool success, nm, fallback, flagged;
    double nmse, gain;
  };
  std::vector<Summary> out(cfg.trials);
  parallel_for(cfg.trials, threads, [&](std::size_t i) {
    const auto r = run_trial(cfg, derive_seed(cfg.seed, 0x7a1, i), fixed);
    out[i] = {r.success, r.nm_graph_exists, r.fallback, r.gain_flagged, r.nmse, r.bf_gain};
  });

  MetricRow row;
  row.config = cfg;
  row.trials = cfg.trials;
  std::vector<double> errors;
  errors.reserve(out.size());
  double succ = 0.0, err = 0.0, gain = 0.0;
  for (const auto& s : out) {
    succ += s.success;
    err += s.nmse;
    gain += s.gain;
    row.nm_graph_trials += s.nm;
    row.fallbacks += s.fallback;
    row.gain_flagged += s.flagged;
    errors.push_back(s.nmse);
  }
  const auto count = static_cast<double>(out.size());
  row.success_rate = succ / count;
  row.nmse = err / count;
  row.bf_gain = gain / count;
  std::sort(errors.begin(), errors.end());
  const std::size_t mid = errors.size() / 2;
  row.nmse_median = errors.size() % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  row.theory_p = theory_success(cfg);
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Noiseless end-to-end success rate.
inline double empirical_success_rate(ExperimentConfig cfg, std::size_t trials, std::uint64_t seed,
                                     std::size_t threads = 1) {
  cfg.mode = Mode::noiseless;
  cfg.trials = trials;
  cfg.seed = seed;
  return run_experiment(cfg, threads).success_rate;
}

/// Applies one sweep-axis value to a base configuration. T and M sweeps
/// keep 2ML = T by adjusting L.
inline ExperimentConfig apply_axis(ExperimentConfig cfg, SweepAxis axis, double value) {
  auto as_count = [&](const char* what) {
    if (!(value >= 1.0) || value != std::floor(value)) {
      throw ConfigError(std::string(what) + " sweep values must be positive integers");
    }
    return static_cast<std::size_t>(value);
  };
  switch (axis) {
    case SweepAxis::t: {
      const auto t = as_count("t");
      if (t % (2 * cfg.m) != 0) {
        throw ConfigError("t = " + std::to_string(t) + " is not a multiple of 2m = " +
                          std::to_string(2 * cfg.m));
      }
      cfg.l = t / (2 * cfg.m);
      break;
    }
    case SweepAxis::n: cfg.n = as_count("n"); break;
    case SweepAxis::m: {
      const auto t = cfg.t();
      cfg.m = as_count("m");
      if (t % (2 * cfg.m) != 0) {
        throw ConfigError("t = " + std::to_string(t) + " is not a multiple of 2m = " +
                          std::to_string(2 * cfg.m));
      }
      cfg.l = t / (2 * cfg.m);
      break;
    }
    case SweepAxis::snr: cfg.snr_db = value; break;
  }
  cfg.validate();
  return cfg;
}

inline std::vector<MetricRow> sweep(const ExperimentConfig& base, SweepAxis axis,
                                    std::span<const double> values, std::size_t threads = 1) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value");
  std::vector<ExperimentConfig> points;
  for (double v : values) points.push_back(apply_axis(base, axis, v));
  std::vector<MetricRow> rows;
  for (const auto& p : points) rows.push_back(run_experiment(p, threads));
  return rows;
}

inline constexpr const char* kCsvHeader =
    "n,m,l,k,t,snr_db,mode,trials,seed,success_rate,nmse,bf_gain,theory_p,wall_ms";

/// Metric rows as CSV. A leading comment records the noise convention and
/// detector calibration; wall_ms is written as 0 when `timing` is false.
inline void write_csv(std::ostream& os, std::span<const MetricRow> rows, bool timing = true) {
  if (!rows.empty()) {
    const auto& c = rows.front().config;
    os << "# noise_convention=" << to_string(c.noise_convention)
       << " calibration=" << to_string(c.detector_calibration())
       << " modulation=" << to_string(c.modulation)
       << " permutation=" << (c.designed_permutations() ? "designed" : "identity") << '\n';
  }
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& c = r.config;
    os << c.n << ',' << c.m << ',' << c.l << ',' << c.k << ',' << c.t() << ','
       << (c.mode == Mode::robust ? format_double(c.snr_db) : std::string{}) << ','
       << to_string(c.mode) << ',' << r.trials << ',' << c.seed << ','
       << format_double(r.success_rate) << ',' << format_double(r.nmse) << ','
       << format_double(r.bf_gain) << ',' << format_optional(r.theory_p) << ','
       << (timing ? format_fixed(r.wall_ms, 3) : std::string("0")) << '\n';
  }
}

// --- array receiver ---------------------------------------------------------------

struct ReceivePath {
  std::size_t aoa = 0;  // receive beam (DFT index, 0-based)
  std::size_t aod = 0;  // transmit beam
  cplx gain{1.0, 0.0};
};

struct ArrayScanConfig {
  std::size_t n_rx = 8;
  std::size_t rx_rf_chains = 1;
  ExperimentConfig tx;  // transmit side: n, rf_chains, m, l, modulation, mode, snr, ...
  std::vector<ReceivePath> paths;
};

struct BeamspaceMatrixEstimate {
  std::size_t n_rx = 0;
  std::size_t n_tx = 0;
  std::vector<double> magnitudes;  // row-major n_rx x n_tx estimate of |G_bar|
  std::size_t best_aoa = 0;
  std::size_t best_aod = 0;
  bool no_path = true;
  std::size_t total_samples = 0;  // N_r * 2ML measurements
  std::size_t time_slots = 0;     // ceil(N_r / R_r) * 2ML
  std::vector<bool> row_success;

  double at(std::size_t i, std::size_t j) const { return magnitudes.at(i * n_tx + j); }
};

/// Receiver steers DFT beam i and the transmitter sends the sparse code;
/// the phaseless samples then see row i of the beam-space channel, which is
/// recovered with the one-sided pipeline. Robust-mode noise is referenced to
/// the total channel energy: sigma^2 = ||G_bar||_F^2 / (N_t 10^{snr/10}).
inline BeamspaceMatrixEstimate scan_array_receiver(const ArrayScanConfig& cfg) {
  const auto& tx = cfg.tx;
  tx.validate();
  if (cfg.n_rx == 0) throw ConfigError("n_rx must be positive");
  if (cfg.rx_rf_chains == 0) throw ConfigError("rx_rf_chains must be positive");

  std::vector<CVector> g_bar(cfg.n_rx, CVector(tx.n));
  for (const auto& p : cfg.paths) {
    if (p.aoa >= cfg.n_rx || p.aod >= tx.n) throw InvalidArgument("path beam index out of range");
    g_bar[p.aoa][p.aod] += p.gain;
  }
  double energy = 0.0;
  for (const auto& row : g_bar) energy += norm_squared(row);
  for (const auto& row : g_bar) {
    std::size_t k = 0;
    for (const auto& v : row) k += (v != cplx{});
    if (k > tx.m) throw InvalidArgument("per-column sparsity exceeds M");
  }

  BeamspaceMatrixEstimate est;
  est.n_rx = cfg.n_rx;
  est.n_tx = tx.n;
  est.magnitudes.assign(cfg.n_rx * tx.n, 0.0);
  est.total_samples = cfg.n_rx * tx.t();
  est.time_slots = (cfg.n_rx + cfg.rx_rf_chains - 1) / cfg.rx_rf_chains * tx.t();
  est.row_success.assign(cfg.n_rx, false);
  if (!(energy > 0.0)) {
    std::fill(est.row_success.begin(), est.row_success.end(), true);
    return est;
  }

  const auto mod = tx.modulation_spec();
  const double variance =
      tx.mode == Mode::robust
          ? energy / (static_cast<double>(tx.n) * std::pow(10.0, tx.snr_db / 10.0))
          : 0.0;
  const NoiseModel noise{variance, tx.cfo, tx.noise_convention};

  for (std::size_t i = 0; i < cfg.n_rx; ++i) {
    CVector col(tx.n);
    for (std::size_t j = 0; j < tx.n; ++j) col[j] = std::conj(g_bar[i][j]);
    const SparseSignal x(std::move(col));

    const auto seed = derive_seed(tx.seed, 0x5ca9, i);
    const auto ens = make_trial_ensemble(tx, mod, derive_seed(seed, 0xe75e));
    const auto a = assemble_matrix(ens, mod);
    const auto batch = measure(x, a, noise, derive_seed(seed, 0x7015e),
                               tx.normalize_rows ? RowScaling::unit_norm : RowScaling::none);
    const auto z = tx.mode == Mode::noiseless
                       ? decode(batch, ens, mod)
                       : robust_decode(batch, ens, mod, tx.detector(), variance,
                                       derive_seed(seed, 0xf0f0)).estimate;
    std::copy(z.values.begin(), z.values.end(), est.magnitudes.begin() + static_cast<std::ptrdiff_t>(i * tx.n));

    const auto truth = x.magnitudes();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < tx.n; ++j) {
      num += (z.values[j] - truth[j]) * (z.values[j] - truth[j]);
      den += truth[j] * truth[j];
    }
    est.row_success[i] = den > 0.0 ? num / den < kSuccessThreshold : num == 0.0;
  }

  double best = 0.0;
  for (std::size_t i = 0; i < cfg.n_rx; ++i) {
    for (std::size_t j = 0; j < tx.n; ++j) {
      if (est.at(i, j) > best) {
        best = est.at(i, j);
        est.best_aoa = i;
        est.best_aod = j;
      }
    }
  }
  est.no_path = !(best > 0.0);
  return est;
}

}  // namespace sbg
