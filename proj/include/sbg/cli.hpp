#pragma once

// Command-line front end: theory, simulate, sweep, scan, selftest.
// Exit codes: 0 success, 1 runtime error, 2 invalid configuration.

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbg/config.hpp"
#include "sbg/errors.hpp"
#include "sbg/format.hpp"
#include "sbg/harness.hpp"
#include "sbg/serialize.hpp"
#include "sbg/theory.hpp"

namespace sbg {

namespace cli {

using Overrides = std::map<std::string, std::string>;

inline void add_setting(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                        const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&ov, key](const std::string& v) { ov[key] = v; }, help);
}

inline void add_switch(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& key,
                       const std::string& value, const std::string& help) {
  app->add_flag_callback(flag, [&ov, key, value] { ov[key] = value; }, help);
}

inline void add_experiment_options(CLI::App* app, Overrides& ov) {
  add_setting(app, ov, "--n", "n", "array size N");
  add_setting(app, ov, "--r,--rf-chains", "rf_chains", "RF chains R (default ceil(N/M))");
  add_setting(app, ov, "--m", "m", "right nodes per graph M");
  add_setting(app, ov, "--l", "l", "number of graphs L");
  add_setting(app, ov, "--t", "t", "measurements T = 2ML (sets L)");
  add_setting(app, ov, "--k", "k", "number of paths K");
  add_setting(app, ov, "--trials", "trials", "Monte Carlo trials");
  add_setting(app, ov, "--snr", "snr_db", "SNR in dB (robust mode)");
  add_setting(app, ov, "--modulation", "modulation", "linear | cosine");
  add_setting(app, ov, "--omega", "omega", "cosine modulation frequency");
  add_setting(app, ov, "--permutation", "permutation", "auto | identity | designed");
  add_setting(app, ov, "--swap-budget", "swap_budget", "permutation search swaps");
  add_setting(app, ov, "--noise-convention", "noise_convention", "total-power | per-quadrature");
  add_setting(app, ov, "--calibration", "calibration", "standard | per-quadrature | auto");
  add_setting(app, ov, "--false-alarm", "false_alarm", "detector false-alarm probability");
  add_switch(app, ov, "--no-cfo", "cfo", "false", "disable the random carrier phase");
  add_switch(app, ov, "--off-grid", "on_grid", "false", "draw path angles off the DFT grid");
  add_switch(app, ov, "--raw-rows", "normalize_rows", "false", "skip unit-norm row scaling");
  add_switch(app, ov, "--fixed-ensemble", "fixed_ensemble", "true", "reuse one ensemble for all trials");
}

inline RunSettings resolve(const std::string& config_path, const Overrides& ov) {
  RunSettings s;
  if (!config_path.empty()) {
    for (const auto& [k, v] : read_config_file(config_path)) apply_setting(s, k, v);
  }
  for (const auto& [k, v] : ov) apply_setting(s, k, v);
  finish_settings(s);
  return s;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path + "'");
  return os;
}

inline void print_row(std::ostream& out, const MetricRow& r) {
  const auto& c = r.config;
  out << "n=" << c.n << " m=" << c.m << " l=" << c.l << " k=" << c.k << " t=" << c.t()
      << " mode=" << to_string(c.mode);
  if (c.mode == Mode::robust) out << " snr_db=" << format_double(c.snr_db);
  out << " trials=" << r.trials << '\n'
      << "  success_rate = " << format_fixed(r.success_rate, 4) << '\n'
      << "  nmse = " << format_double(r.nmse) << " (median " << format_double(r.nmse_median) << ")\n"
      << "  bf_gain = " << format_fixed(r.bf_gain, 4) << '\n';
  if (r.theory_p) out << "  theory_p = " << format_fixed(*r.theory_p, 6) << '\n';
  if (c.mode == Mode::robust) out << "  fusion fallbacks = " << r.fallbacks << '\n';
}

template <class T>
std::vector<T> broadcast(const std::vector<T>& v, std::size_t n, const char* name) {
  if (v.size() == n) return v;
  if (v.size() == 1) return std::vector<T>(n, v.front());
  throw ConfigError(std::string("--") + name + " has " + std::to_string(v.size()) +
                    " values; expected 1 or " + std::to_string(n));
}

struct TheoryArgs {
  std::vector<std::size_t> n{128}, m{16}, l{1}, k{2};
  double p0 = 0.99;
  std::string log_base = "base2";
};

inline int run_theory(const TheoryArgs& a, const std::string& out_path, std::ostream& out) {
  const std::size_t count = std::max({a.n.size(), a.m.size(), a.l.size(), a.k.size()});
  const auto ns = broadcast(a.n, count, "n");
  const auto ms = broadcast(a.m, count, "m");
  const auto ls = broadcast(a.l, count, "l");
  const auto ks = broadcast(a.k, count, "k");
  if (!(a.p0 > 0.0 && a.p0 < 1.0)) throw ConfigError("--p0 must lie in (0, 1)");
  theory::LogBase base;
  if (a.log_base == "base2") base = theory::LogBase::base2;
  else if (a.log_base == "natural") base = theory::LogBase::natural;
  else throw ConfigError("--log-base must be base2 or natural");

  std::vector<theory::TheoryRow> rows;
  for (std::size_t i = 0; i < count; ++i) {
    theory::CodeParams cp{ns[i], ms[i], ls[i], ks[i], a.p0, base};
    if (cp.n == 0 || cp.m == 0 || cp.m > cp.n) throw ConfigError("need 1 <= m <= n");
    if (cp.l == 0) throw ConfigError("l must be at least 1");
    if (cp.k == 0 || cp.k > cp.n) throw ConfigError("need 1 <= k <= n");
    rows.push_back(theory::evaluate(cp));
  }

  for (const auto& r : rows) {
    const auto& cp = r.params;
    out << "n=" << cp.n << " m=" << cp.m << " l=" << cp.l << " k=" << cp.k << " t=" << 2 * cp.m * cp.l
        << '\n';
    out << "  lambda = " << numerator(r.lambda) << '/' << denominator(r.lambda) << " = "
        << theory::round_decimal(r.lambda, 6) << (r.equal_sets ? "" : " (balanced unequal sets)")
        << '\n';
    out << "  p = " << theory::round_decimal(r.p, 6) << " (" << theory::round_decimal(r.p * 100, 4)
        << "%)\n";
    if (r.l_required) {
      out << "  L_required = " << r.l_required << " for p0 = " << format_double(cp.p0) << '\n';
    } else {
      out << "  L_required = unreachable (m < k)\n";
    }
    out << "  T_bound = " << format_fixed(r.bound.t_bound, 4) << " (f = " << format_fixed(r.bound.f, 6)
        << ", h = " << format_fixed(r.bound.h, 6) << ", c = " << format_fixed(r.bound.c, 6)
        << ", log " << theory::to_string(base) << ")\n";
  }

  if (!out_path.empty()) {
    auto os = open_out(out_path);
    os << "n,m,l,k,lambda,p,l_required,t_bound\n";
    for (const auto& r : rows) {
      const auto& cp = r.params;
      os << cp.n << ',' << cp.m << ',' << cp.l << ',' << cp.k << ','
         << format_double(theory::to_double(r.lambda)) << ',' << format_double(theory::to_double(r.p))
         << ',' << r.l_required << ',' << format_double(r.bound.t_bound) << '\n';
    }
  }
  return 0;
}

inline int run_selftest(std::ostream& out) {
  std::size_t cases = 0, failures = 0;
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      const auto sizes = balanced_sizes(n, m);
      std::vector<std::vector<std::size_t>> sets;
      std::size_t next = 0;
      for (auto s : sizes) {
        sets.emplace_back();
        for (std::size_t i = 0; i < s; ++i) sets.back().push_back(next++);
      }
      for (std::size_t k = 1; k <= m; ++k) {
        ++cases;
        const auto formula = theory::nm_graph_prob(n, m, k).value;
        const auto oracle = theory::oracle_nm_prob(n, sets, k);
        if (formula != oracle) {
          ++failures;
          out << "MISMATCH n=" << n << " m=" << m << " k=" << k << ": formula " << formula
              << " oracle " << oracle << '\n';
        }
      }
    }
  }
  out << "selftest: " << cases - failures << "/" << cases
      << " closed-form NM-graph probabilities match exhaustive enumeration\n";
  return failures ? 1 : 0;
}

inline std::vector<ReceivePath> parse_paths(const std::vector<std::string>& specs) {
  std::vector<ReceivePath> out;
  for (const auto& s : specs) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 4) {
      throw ConfigError("path '" + s + "' must be aoa:aod[:re[:im]]");
    }
    ReceivePath p;
    p.aoa = detail::parse_count("path aoa", parts[0]);
    p.aod = detail::parse_count("path aod", parts[1]);
    const double re = parts.size() > 2 ? detail::parse_number<double>("path gain", parts[2]) : 1.0;
    const double im = parts.size() > 3 ? detail::parse_number<double>("path gain", parts[3]) : 0.0;
    p.gain = {re, im};
    out.push_back(p);
  }
  return out;
}

}  // namespace cli

/// Entry point shared by the sbg_sim tool and the tests.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-graph phaseless beam alignment simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, mode;
  std::string seed, threads;
  bool no_timing = false;
  app.add_option("--config", config_path, "key=value or JSON settings file");
  app.add_option("--seed", seed, "64-bit base seed");
  app.add_option("--out", out_path, "output CSV path");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--mode", mode, "noiseless | robust");
  app.add_flag("--no-timing", no_timing, "write wall_ms as 0 for reproducible CSVs");

  cli::Overrides ov;

  auto* theory_cmd = app.add_subcommand("theory", "closed-form success probability and bounds");
  cli::TheoryArgs targs;
  theory_cmd->add_option("--n", targs.n, "array size(s)")->delimiter(',');
  theory_cmd->add_option("--m", targs.m, "right nodes per graph")->delimiter(',');
  theory_cmd->add_option("--l", targs.l, "number of graphs")->delimiter(',');
  theory_cmd->add_option("--k", targs.k, "sparsity")->delimiter(',');
  theory_cmd->add_option("--p0", targs.p0, "target success probability");
  theory_cmd->add_option("--log-base", targs.log_base, "base2 | natural");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run of one configuration");
  cli::add_experiment_options(sim_cmd, ov);
  std::string report_path, save_ens, load_ens;
  sim_cmd->add_option("--report", report_path, "per-node decode report of the first trial (CSV)");
  sim_cmd->add_option("--save-ensemble", save_ens, "write the frozen ensemble as JSON");
  sim_cmd->add_option("--load-ensemble", load_ens, "replay a saved ensemble for every trial");

  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep to CSV");
  cli::add_experiment_options(sweep_cmd, ov);
  cli::add_setting(sweep_cmd, ov, "--axis", "axis", "t | n | m | snr");
  cli::add_setting(sweep_cmd, ov, "--values", "values", "comma-separated axis values");

  auto* scan_cmd = app.add_subcommand("scan", "two-sided scan with an array receiver");
  cli::add_experiment_options(scan_cmd, ov);
  std::size_t n_rx = 8, rx_rf = 1;
  std::vector<std::string> path_specs;
  scan_cmd->add_option("--nr", n_rx, "receive array size N_r");
  scan_cmd->add_option("--rx-rf", rx_rf, "receive RF chains R_r");
  scan_cmd->add_option("--path", path_specs, "path aoa:aod[:re[:im]] (repeatable)");

  auto* self_cmd = app.add_subcommand("selftest", "closed form versus exhaustive enumeration");

  for (auto* sub : {theory_cmd, sim_cmd, sweep_cmd, scan_cmd, self_cmd}) sub->fallthrough();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }

    if (!seed.empty()) ov["seed"] = seed;
    if (!threads.empty()) ov["threads"] = threads;
    if (!mode.empty()) ov["mode"] = mode;
    if (no_timing) ov["timing"] = "false";

    if (*theory_cmd) return cli::run_theory(targs, out_path, out);
    if (*self_cmd) return cli::run_selftest(out);

    auto s = cli::resolve(config_path, ov);
    if (!out_path.empty()) s.out = out_path;

    if (*sim_cmd) {
      std::optional<GraphEnsemble> replay;
      if (!load_ens.empty()) {
        auto file = load_ensemble(load_ens);
        auto& e = s.experiment;
        if (file.ensemble.n_left != e.n || file.ensemble.n_right != e.m ||
            file.ensemble.n_graphs != e.l) {
          throw ConfigError("ensemble file does not match n, m, l");
        }
        e.modulation = file.modulation.kind();
        e.omega = file.modulation.omega();
        replay = std::move(file.ensemble);
      }
      if (!save_ens.empty()) {
        const auto ens = replay ? *replay : frozen_ensemble(s.experiment);
        save_ensemble(save_ens, ens, s.experiment.modulation_spec());
      }
      const auto row = run_experiment(s.experiment, s.threads, replay ? &*replay : nullptr);
      cli::print_row(out, row);
      if (!report_path.empty()) {
        const GraphEnsemble* fixed = replay ? &*replay : nullptr;
        const auto rec = run_trial(s.experiment, derive_seed(s.experiment.seed, 0x7a1, 0), fixed);
        auto os = cli::open_out(report_path);
        write_report_csv(os, rec.reports);
      }
      if (!s.out.empty()) {
        auto os = cli::open_out(s.out);
        write_csv(os, std::span<const MetricRow>(&row, 1), s.timing);
      }
      return 0;
    }

    if (*sweep_cmd) {
      if (!s.axis) throw ConfigError("sweep needs --axis");
      if (s.axis_values.empty()) throw ConfigError("sweep needs --values");
      const auto rows = sweep(s.experiment, *s.axis, s.axis_values, s.threads);
      if (s.out.empty()) {
        write_csv(out, rows, s.timing);
      } else {
        auto os = cli::open_out(s.out);
        write_csv(os, rows, s.timing);
        for (const auto& r : rows) cli::print_row(out, r);
      }
      return 0;
    }

    if (*scan_cmd) {
      ArrayScanConfig sc;
      sc.n_rx = n_rx;
      sc.rx_rf_chains = rx_rf;
      sc.tx = s.experiment;
      sc.paths = cli::parse_paths(path_specs);
      const auto est = scan_array_receiver(sc);
      std::size_t ok = 0;
      for (bool b : est.row_success) ok += b;
      if (est.no_path) {
        out << "no path detected\n";
      } else {
        out << "best pair: aoa=" << est.best_aoa << " aod=" << est.best_aod << " |g|="
            << format_double(est.at(est.best_aoa, est.best_aod)) << '\n';
      }
      out << "rows recovered: " << ok << "/" << est.n_rx << '\n'
          << "samples: " << est.total_samples << " (" << est.time_slots << " time slots)\n";
      if (!s.out.empty()) {
        auto os = cli::open_out(s.out);
        for (std::size_t i = 0; i < est.n_rx; ++i) {
          for (std::size_t j = 0; j < est.n_tx; ++j) os << (j ? "," : "") << format_double(est.at(i, j));
          os << '\n';
        }
      }
      return 0;
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const C1Infeasible& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sbg
