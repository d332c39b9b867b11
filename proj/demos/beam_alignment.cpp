// End-to-end walkthrough: a two-path channel, one sparse-graph code,
// phaseless measurements, noiseless and noisy decoding.

#include <cstdio>
#include <vector>

#include "sbg/sbg.hpp"

int main() {
  using namespace sbg;

  const ChannelConfig ch{128, 8, 1.0, 0.5};
  const std::size_t m = 16, l = 2;
  const auto mod = ModulationSpec::linear(ch.n_antennas);

  auto ens = build_ensemble(ch.n_antennas, m, l, ch.n_rf_chains, 2024);
  ens = design_permutations(ens, mod, {PermutationStrategy::heuristic, 512, 0, 7});
  const auto a = assemble_matrix(ens, mod);
  const auto c1 = c1_check(a, ch.n_rf_chains);
  std::printf("code: N=%zu M=%zu L=%zu T=%zu, max RF chains used per slot %zu (limit %zu)\n",
              ch.n_antennas, m, l, a.rows(), c1.max_support, ch.n_rf_chains);

  const std::vector<std::size_t> beams{19, 87};
  const CVector gains{{0.9, 0.4}, {-0.2, 0.45}};
  const auto channel = synthesize_channel(PathSet::on_grid_paths(beams, gains, ch), ch);
  std::printf("paths on beams %zu and %zu, |g| = %.4f and %.4f\n", beams[0], beams[1],
              std::abs(gains[0]), std::abs(gains[1]));

  const SparseSignal x(channel.x);
  const auto clean = measure(x, a, {}, 11, RowScaling::unit_norm);
  const auto est = decode(clean, ens, mod);
  std::printf("\nnoiseless decode (graph %d):\n", est.source_graph);
  for (auto k : est.support()) std::printf("  beam %3zu  |x| = %.6f\n", k, est.values[k]);

  Engine rng(3);
  const auto g = beamforming_gain(est, channel.h, ch, rng);
  std::printf("  steer to beam %zu, gain %.3f of %zu\n", g.direction, g.gain, ch.n_antennas);

  std::printf("\nrobust decode:\n");
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    const double var = sigma_for_snr(channel.h, snr, ch);
    const auto y = measure(x, a, {var, true}, 100 + static_cast<int>(snr), RowScaling::unit_norm);
    const auto r = robust_decode(y, ens, mod, {}, var, 5);
    std::printf("  %4.0f dB  K_hat=%zu  support:", snr, r.k_hat);
    for (auto k : r.estimate.support()) std::printf(" %zu(%.3f)", k, r.estimate.values[k]);
    std::printf("\n");
  }
  return 0;
}
