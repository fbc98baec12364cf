// Correlation decay, variance and a CLT sample for the doubling map with
// g(x) = x - 1/2.

#include <cmath>
#include <cstdio>

#include "simdyn/simdyn.hpp"

int main() {
  using namespace simdyn;
  const auto fam = MapFamily::from_degrees({2});
  const auto g = Potential::centered();
  const Word w({1}, 1);

  const auto series = correlation_series(fam, w, g, g, 1, 10);
  for (const auto& [n, v] : series.entries) std::printf("C(%2zu) = %.6e   2^-n/12 = %.6e\n", n, v, std::ldexp(1.0, -static_cast<int>(n)) / 12.0);
  std::printf("fitted decay rate: %.4f\n\n", decay_rate_fit(series).theta_hat);

  const auto var = variance_along_word(fam, g, w.as_periodic(), 20);
  std::printf("(1/20) Var(S_20 g) = %.6f (limit 1/4)\n\n", var.value());

  MonteCarloSetup setup;
  setup.word = w;
  setup.seed = 42;
  const auto clt = clt_experiment(fam, g, 1000, 5000, setup, WorkerPool(2));
  std::printf("KS distance to N(0, %.4f) at n = 1000: %.4f\n", clt.variance_estimate, clt.ks_statistic);
}
