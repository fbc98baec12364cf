// Pressure of a few potentials for the doubling/tripling pair, then periodic
// orbit counts against the 5^n - 2^n closed form.

#include <cmath>
#include <cstdio>

#include "simdyn/simdyn.hpp"

int main() {
  using namespace simdyn;
  const auto fam = MapFamily::from_degrees({2, 3});

  for (const char* spec : {"const:0", "centered", "cos:1", "neglogd:1"}) {
    const auto f = Potential::parse(spec, &fam);
    std::printf("P(%s) = %.12f\n", f.label().c_str(), pressure(fam, f, 512));
  }
  std::printf("log 5     = %.12f\n\n", std::log(5.0));

  std::uint64_t p5 = 1, p2 = 1;
  for (std::size_t n = 1; n <= 6; ++n) {
    p5 *= 5;
    p2 *= 2;
    CountQuery q;
    q.n = n;
    q.a = -1.0;
    q.b = 1.0;
    const auto r = count_periodic(fam, Potential::constant(0.0), q);
    std::printf("n = %zu  count = %llu  5^n - 2^n = %llu\n", n, static_cast<unsigned long long>(r.count),
                static_cast<unsigned long long>(p5 - p2));
  }
}
