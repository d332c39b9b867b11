// Closed-form design aid: success probability and the number of graphs
// needed for a target, over a grid of M and K at fixed N.

#include <cstdio>

#include "sbg/theory.hpp"

int main() {
  using namespace sbg::theory;
  const std::size_t n = 128;
  const double p0 = 0.99;

  std::printf("N = %zu, target p0 = %.2f\n\n", n, p0);
  std::printf("%4s %4s %12s %10s %8s\n", "M", "K", "lambda", "L_req", "T=2ML");
  for (std::size_t m : {2u, 4u, 8u, 16u, 32u}) {
    for (std::size_t k : {1u, 2u, 3u, 4u}) {
      if (k > m) continue;
      const double lam = nm_graph_prob(n, m, k).as_double();
      const auto l = required_graphs(lam, p0);
      std::printf("%4zu %4zu %12.6f %10zu %8zu\n", m, k, lam, l, 2 * m * l);
    }
  }

  std::printf("\nsample-complexity bound T ~ c K h(K):\n");
  for (std::size_t k : {2u, 4u, 8u, 16u, 64u}) {
    const auto b = sample_complexity_bound(k, p0, LogBase::base2);
    std::printf("  K=%3zu  f=%.6f  h=%.6f  T_bound=%.2f\n", k, b.f, b.h, b.t_bound);
  }
  return 0;
}
