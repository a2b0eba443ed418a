#ifndef MCHAG_PARAMS_HPP
#define MCHAG_PARAMS_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mchag {

using cplx = std::complex<double>;

enum class errc {
  ordering_violation,
  range_violation,
  zero_weight,
  empty_spectrum,
  length_mismatch,
  on_cut,
  continuation_failed,
  path_through_cut,
  ill_conditioned,
  not_riemann_matrix,
  non_convergent,
  truncation_overflow,
  monodromy_failed,
  root_count_mismatch,
  ambiguous_sheet,
  divisor_validation_failed,
  inconsistent_principal_part,
  denominator_underflow,
  reality_violation,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::ordering_violation: return "OrderingViolation";
    case errc::range_violation: return "RangeViolation";
    case errc::zero_weight: return "ZeroWeight";
    case errc::empty_spectrum: return "EmptySpectrum";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::on_cut: return "OnCutError";
    case errc::continuation_failed: return "ContinuationError";
    case errc::path_through_cut: return "PathThroughCut";
    case errc::ill_conditioned: return "IllConditioned";
    case errc::not_riemann_matrix: return "NotRiemannMatrix";
    case errc::non_convergent: return "NonConvergent";
    case errc::truncation_overflow: return "TruncationOverflow";
    case errc::monodromy_failed: return "MonodromyError";
    case errc::root_count_mismatch: return "RootCountMismatch";
    case errc::ambiguous_sheet: return "AmbiguousSheet";
    case errc::divisor_validation_failed: return "DivisorValidationFailed";
    case errc::inconsistent_principal_part: return "InconsistentPrincipalPart";
    case errc::denominator_underflow: return "DenominatorUnderflow";
    case errc::reality_violation: return "RealityViolation";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

/// Central tolerance/knob record.  Defaults are the ones the test suite pins.
struct Tolerances {
  double snap_tol = 1e-12;          // "on the cut" detection, relative to arc scale
  double lin_residual = 1e-10;      // re-substitution residual for solved linear systems
  double b_symmetry = 1e-8;         // hard gate on ||B - B^T||_inf
  double cond_limit = 1e12;         // condition number gate for linear solves
  double theta_tol = 1e-10;         // theta truncation tolerance tau
  double monodromy_tol = 1e-9;      // kappa single-valuedness around cuts
  double reality_tol = 1e-6;        // |Im u|, |Im x| bound
  double jump_tol = 1e-7;           // RH jump residual bound
  double fd_step = 1e-3;            // finite-difference step for PDE residuals
  double deriv_step = 1e-5;         // step for F'(i)
  double denom_floor = 1e-12;       // theta denominator underflow, relative
  int nodes_per_panel = 128;
  int max_depth = 8;                // panel subdivision depth for adaptive checks
  int ring_nodes = 48;              // trapezoid nodes on the Cauchy circle at i
  double lambda_ref = 1e6;          // branch anchoring point on the positive real axis
};

/// Spectral data defining the solution family: p angle pairs (c_l, d_l) on
/// (0, pi/2), q modulus pairs (a_j, b_j) in (0, 1), and nonzero weights.
struct SpectralParams {
  int p = 0;
  int q = 0;
  std::vector<double> c, d;       // size p
  std::vector<double> a, b;       // size q
  std::vector<double> alpha;      // size p
  std::vector<double> beta;       // size q

  int genus() const { return 4 * (p + q) - 1; }
  int n_cuts() const { return 4 * (p + q); }
};

inline SpectralParams validate(const SpectralParams& raw) {
  const double pi = 3.14159265358979323846;
  if (raw.p < 0 || raw.q < 0)
    throw error(errc::range_violation, "p and q must be non-negative");
  if (raw.p == 0 && raw.q == 0)
    throw error(errc::empty_spectrum, "p = q = 0");
  if ((int)raw.c.size() != raw.p || (int)raw.d.size() != raw.p ||
      (int)raw.alpha.size() != raw.p)
    throw error(errc::length_mismatch, "c, d, alpha must have length p");
  if ((int)raw.a.size() != raw.q || (int)raw.b.size() != raw.q ||
      (int)raw.beta.size() != raw.q)
    throw error(errc::length_mismatch, "a, b, beta must have length q");

  // 0 < c1 < d1 < ... < cp < dp < pi/2
  double prev = 0.0;
  for (int l = 0; l < raw.p; ++l) {
    if (!(raw.c[l] > prev))
      throw error(errc::ordering_violation, "c[" + std::to_string(l + 1) + "]");
    if (!(raw.d[l] > raw.c[l]))
      throw error(errc::ordering_violation, "d[" + std::to_string(l + 1) + "]");
    prev = raw.d[l];
  }
  if (raw.p > 0 && !(raw.d[raw.p - 1] < pi / 2))
    throw error(errc::range_violation, "d[p] must be < pi/2");

  // 0 < a1 < b1 < ... < aq < bq < 1
  prev = 0.0;
  for (int j = 0; j < raw.q; ++j) {
    if (!(raw.a[j] > prev))
      throw error(errc::ordering_violation, "a[" + std::to_string(j + 1) + "]");
    if (!(raw.b[j] > raw.a[j]))
      throw error(errc::ordering_violation, "b[" + std::to_string(j + 1) + "]");
    prev = raw.b[j];
  }
  if (raw.q > 0 && !(raw.b[raw.q - 1] < 1.0))
    throw error(errc::range_violation, "b[q] must be < 1");

  for (int l = 0; l < raw.p; ++l)
    if (raw.alpha[l] == 0.0)
      throw error(errc::zero_weight, "alpha[" + std::to_string(l + 1) + "]");
  for (int j = 0; j < raw.q; ++j)
    if (raw.beta[j] == 0.0)
      throw error(errc::zero_weight, "beta[" + std::to_string(j + 1) + "]");
  return raw;
}

}  // namespace mchag

#endif
