#ifndef MCHAG_QUADRATURE_HPP
#define MCHAG_QUADRATURE_HPP

#include <cmath>
#include <vector>

#include "mchag/params.hpp"

namespace mchag {

/// Panel rule: node count plus the endpoint-singularity treatment baked into
/// the sampled legs (inverse-square-root endpoints use the Chebyshev map).
struct QuadratureRule {
  int nodes = 128;
  int smooth_nodes = 64;
  int max_depth = 8;
  double tolerance = 1e-11;
};

/// Gauss-Legendre nodes/weights on [-1,1], Newton on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * t * p1 - j * p2) / (j + 1);
      }
      pp = n * (t * p0 - p1) / (t * t - 1);
      double dt = p0 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - t * t) * pp * pp);
  }
}

/// Gauss-Chebyshev (first kind) abscissae u_k and the uniform weight pi/n for
/// integrals of G(u)/sqrt(1-u^2).
inline void gauss_chebyshev(int n, std::vector<double>& u, double& w) {
  const double pi = 3.14159265358979323846;
  u.resize(n);
  for (int k = 0; k < n; ++k) u[k] = std::cos(pi * (2 * k + 1) / (2.0 * n));
  w = pi / n;
}

}  // namespace mchag

#endif
