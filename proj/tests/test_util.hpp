#pragma once

#include <random>

#include "orthorec/iep.hpp"

namespace orthorec::testutil {

// Random well-separated complex nodes and nonzero weights, deterministic in
// the seed. Separation keeps every downdating method comfortably away from
// its breakdown regime.
inline InnerProductSpec random_spec(int m, unsigned seed, double sep = 1e-2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  InnerProductSpec spec;
  spec.nodes = Vec(m);
  spec.weights = Vec(m);
  for (int i = 0; i < m; ++i) {
    bool ok = false;
    while (!ok) {
      Complex z(u(rng), u(rng));
      ok = true;
      for (int j = 0; j < i; ++j)
        if (std::abs(z - spec.nodes(j)) < sep) ok = false;
      if (ok) spec.nodes(i) = z;
    }
    spec.weights(i) = Complex(u(rng) + 1.5, u(rng));
  }
  return spec;
}

}  // namespace orthorec::testutil
