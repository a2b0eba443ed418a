#ifndef MCHAG_SERIES_HPP
#define MCHAG_SERIES_HPP

#include <cassert>
#include <vector>

#include "mchag/params.hpp"

namespace mchag {

// Dense truncated power series / polynomials, coefficient c[k] for z^k.
using Poly = std::vector<cplx>;

inline Poly poly_mul(const Poly& f, const Poly& g) {
  Poly h(f.size() + g.size() - 1, cplx(0));
  for (size_t i = 0; i < f.size(); ++i)
    for (size_t j = 0; j < g.size(); ++j) h[i + j] += f[i] * g[j];
  return h;
}

inline cplx poly_eval(const Poly& f, cplx z) {
  cplx v(0);
  for (size_t i = f.size(); i-- > 0;) v = v * z + f[i];
  return v;
}

inline Poly poly_deriv(const Poly& f) {
  if (f.size() <= 1) return Poly{cplx(0)};
  Poly d(f.size() - 1);
  for (size_t i = 1; i < f.size(); ++i) d[i - 1] = double(i) * f[i];
  return d;
}

/// Taylor shift: coefficients of f(z0 + w) as a polynomial in w.
inline Poly poly_shift(const Poly& f, cplx z0) {
  Poly g(f.size(), cplx(0));
  // Horner on the shifted variable.
  for (size_t i = f.size(); i-- > 0;) {
    for (size_t k = g.size() - 1; k > 0; --k) g[k] = g[k] * z0 + g[k - 1];
    g[0] = g[0] * z0 + f[i];
  }
  return g;
}

inline Poly series_mul(const Poly& f, const Poly& g, size_t n) {
  Poly h(n, cplx(0));
  for (size_t i = 0; i < f.size() && i < n; ++i)
    for (size_t j = 0; j < g.size() && i + j < n; ++j) h[i + j] += f[i] * g[j];
  return h;
}

/// 1/f as a series, f[0] != 0.
inline Poly series_inv(const Poly& f, size_t n) {
  assert(f[0] != cplx(0));
  Poly g(n, cplx(0));
  g[0] = 1.0 / f[0];
  for (size_t k = 1; k < n; ++k) {
    cplx s(0);
    for (size_t j = 1; j <= k && j < f.size(); ++j) s += f[j] * g[k - j];
    g[k] = -s / f[0];
  }
  return g;
}

/// Square root series of f with prescribed branch s0 for the constant term,
/// s0 * s0 == f[0].
inline Poly series_sqrt(const Poly& f, cplx s0, size_t n) {
  Poly s(n, cplx(0));
  s[0] = s0;
  for (size_t k = 1; k < n; ++k) {
    cplx acc = (k < f.size()) ? f[k] : cplx(0);
    for (size_t j = 1; j < k; ++j) acc -= s[j] * s[k - j];
    s[k] = acc / (2.0 * s0);
  }
  return s;
}

inline cplx series_eval(const Poly& f, cplx w) { return poly_eval(f, w); }

}  // namespace mchag

#endif
