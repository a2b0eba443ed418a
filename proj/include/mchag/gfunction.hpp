#ifndef MCHAG_GFUNCTION_HPP
#define MCHAG_GFUNCTION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mchag/differentials.hpp"

namespace mchag {

/// Rational section of the canonical class: (sum of num[i] lambda^{k_min+i})
/// divided by (lambda^2+1)^denom_pow and by R(lambda), times dlambda.
struct DiffRep {
  Poly num;
  int k_min = 0;
  int denom_pow = 0;

  cplx density(cplx z, cplx R) const {
    cplx zp(1);
    for (int k = 0; k < -k_min; ++k) zp /= z;
    for (int k = 0; k < k_min; ++k) zp *= z;
    cplx s(0);
    for (cplx c : num) {
      s += c * zp;
      zp *= z;
    }
    cplx d = z * z + 1.0;
    for (int k = 0; k < denom_pow; ++k) s /= d;
    return s / R;
  }
};

/// The g-function layer: the meromorphic differentials dg^{(y)}, dg^{(t)}
/// normalized over b-cycles, the tilde variants normalized over a-cycles,
/// the frequency vectors Omega, and the regularized scalar functions
///   h_y = g^{(y)} - (lambda - 1/lambda),
///   h_t = g^{(t)} + S,   S = (lambda - 1/lambda)/(lambda + 1/lambda)^2,
/// which are single-valued off the cuts and bounded at infinity, 0 and +-i.
/// In these terms g - theta = (y/4) h_y + 2t h_t, the shift constants are
/// X = prefactor * (h(inf) - h(i)) and X-tilde = prefactor * h-tilde(i).
class GFunction {
 public:
  GFunction(const Differentials& df, const Cycles& cy)
      : df_(&df), cycles_(&cy), model_(&df.model()) {
    build_series_data();
    dg_y_ = solve_y(false);
    dgt_y_ = solve_y(true);
    dg_t_ = solve_t(false);
    dgt_t_ = solve_t(true);
    build_local_series();
    build_base_path();
    build_anchors();
    build_omegas();
    hy_inf_ = integrate_path(dg_y_, base_path_) +
              tail_y(base_path_.psi, base_path_.outer_R) -
              f_rat(std::polar(base_path_.r_hi, base_path_.psi));
    ht_inf_ = integrate_path(dg_t_, base_path_) +
              tail_t(dg_t_, base_path_.psi, base_path_.outer_R);
    X_y_ = 0.25 * axis_shift_y(Side::minus);
    X_t_ = 2.0 * axis_shift_t(Side::minus);
    Xt_y_ = 0.25 * h_y_tilde(cplx(0, 1));
    Xt_t_ = 2.0 * h_t_tilde(cplx(0, 1));
  }

  const DiffRep& dg_y() const { return dg_y_; }
  const DiffRep& dg_t() const { return dg_t_; }
  const DiffRep& dg_y_tilde() const { return dgt_y_; }
  const DiffRep& dg_t_tilde() const { return dgt_t_; }
  const Eigen::VectorXcd& omega_y() const { return om_y_; }
  const Eigen::VectorXcd& omega_t() const { return om_t_; }
  const Eigen::VectorXcd& omega_y_tilde() const { return omt_y_; }
  const Eigen::VectorXcd& omega_t_tilde() const { return omt_t_; }
  cplx X_y() const { return X_y_; }
  cplx X_t() const { return X_t_; }
  cplx X_y_tilde() const { return Xt_y_; }
  cplx X_t_tilde() const { return Xt_t_; }
  cplx h_y_infinity() const { return hy_inf_; }
  cplx h_t_infinity() const { return ht_inf_; }

  /// h_y on sheet 1; with an arc/side hint z may lie on that cut.
  cplx h_y(cplx z, const Arc* arc = nullptr, Side side = Side::plus) const {
    if (!arc && std::abs(z) < r0_zero_)
      return hy_anchor0_ + series_int(reg_y0_, z, hy_center0_);
    return g_integral(dg_y_, z, arc, side) - f_rat(z);
  }

  /// h_t on sheet 1; the exact local series takes over near the poles at +-i.
  cplx h_t(cplx z, const Arc* arc = nullptr, Side side = Side::plus) const {
    cplx i1(0, 1);
    if (!arc && std::abs(z - i1) < r0_i_)
      return ht_anchor_i_ + series_int(reg_ti_, z - i1, ht_center_i_ - i1);
    if (!arc && std::abs(z + i1) < r0_i_)
      return ht_anchor_mi_ + series_int(reg_tmi_, z + i1, ht_center_mi_ + i1);
    return g_integral(dg_t_, z, arc, side) + s_rat(z);
  }

  /// Tilde counterparts (single-valued only off the cuts *and* gap chains;
  /// the canonical evaluation path reaches i without touching either).
  cplx h_y_tilde(cplx z) const {
    return g_integral(dgt_y_, z, nullptr, Side::plus) - f_rat(z);
  }
  cplx h_t_tilde(cplx z) const {
    cplx i1(0, 1);
    if (std::abs(z - i1) < r0_i_)
      return htt_anchor_i_ + series_int(reg_tti_, z - i1, ht_center_i_ - i1);
    return g_integral(dgt_t_, z, nullptr, Side::plus) + s_rat(z);
  }

  /// g(lambda;y,t) - theta(lambda;y,t) on sheet 1.
  cplx g_minus_theta(cplx z, double y, double t, const Arc* arc = nullptr,
                     Side side = Side::plus) const {
    return 0.25 * y * h_y(z, arc, side) + 2.0 * t * h_t(z, arc, side);
  }

  /// The axis-path shift integrals int_i^{i inf}(dg - singular counterterm),
  /// deformable to either side of the imaginary cuts above i (the two sides
  /// agree because the b-periods of dg vanish).
  cplx axis_shift_y(Side side) const {
    // the counterterm integrates in closed form: int (1+1/z^2) dz = f_rat
    cplx hi(0, model_->outer_radius());
    return axis_numeric(dg_y_, side, cplx(0, 1)) -
           (f_rat(hi) - f_rat(cplx(0, 1))) + tail_y(kPi / 2, axis_outer_R_);
  }
  cplx axis_shift_t(Side side) const {
    // series leg from i to i(1+r0); beyond it int S' dlambda telescopes to
    // -S(lam1) against the tail boundary term
    cplx lam1 = cplx(0, 1.0 + r0_i_);
    cplx v = series_int(reg_ti_, lam1 - cplx(0, 1), cplx(0));
    v += axis_numeric(dg_t_, side, lam1) - s_rat(lam1);
    return v + tail_t(dg_t_, kPi / 2, axis_outer_R_);
  }

  static cplx f_rat(cplx z) { return z - 1.0 / z; }

  /// S(lambda) = (lambda - 1/lambda)/(lambda + 1/lambda)^2.
  static cplx s_rat(cplx z) {
    cplx a = z - 1.0 / z, b = z + 1.0 / z;
    return a / (b * b);
  }

  /// S'(lambda) = -(lambda^4 - 6 lambda^2 + 1)/(lambda^2+1)^3: the matching
  /// singular part of dg^{(t)} at +-i (forced by g - theta = O(1) there).
  static cplx s_rat_deriv(cplx z) {
    cplx z2 = z * z;
    cplx d = z2 + 1.0;
    return -(z2 * z2 - 6.0 * z2 + 1.0) / (d * d * d);
  }

 private:
  static constexpr int L_ = 64;  // working series length

  // ---- linear systems -------------------------------------------------

  // dg^{(y)} ansatz sum_{k=-2}^{N} p_k lambda^k dlambda / R with
  // dg^{(y)} ~ (1 + lambda^{-2}) dlambda at both infinity and 0.
  DiffRep solve_y(bool tilde) {
    int N = model_->params().n_cuts(), g = model_->genus();
    int n = N + 3;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    // infinity rows: coefficient of mu^m in sum_k p_k mu^{N-P}/S(mu), P = k-2
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < n; ++k) {
        int e = m - (N - (k - 2));
        if (e >= 0) A(m, k) = inv_sqrt_inf_[e];
      }
    rhs[0] = 1;
    // zero rows: coefficient of lambda^m in sum_k p_k lambda^{k-2}/S0(lambda)
    for (int m = -2; m < 0; ++m)
      for (int k = 0; k < n; ++k) {
        int e = m - (k - 2);
        if (e >= 0) A(m + 4, k) = inv_sqrt_zero_[e];
      }
    rhs[2] = 1;
    for (int j = 1; j <= g; ++j)
      for (int k = 0; k < n; ++k) {
        auto f = [k](cplx z, cplx R) {
          cplx zp(1);
          for (int l = 0; l < k; ++l) zp *= z;
          return zp / (z * z * R);
        };
        A(3 + j, k) =
            tilde ? cycles_->a()[j - 1].integrate(f) : cycles_->b()[j].integrate(f);
      }
    DiffRep rep;
    rep.k_min = -2;
    rep.num = solve_checked(A, rhs, "dg_y");
    return rep;
  }

  // dg^{(t)} ansatz Q(lambda) dlambda / ((lambda^2+1)^3 R), deg Q <= N+4,
  // with dg^{(t)} ~ -S'(lambda) dlambda at +-i through order tau^{-1}.
  DiffRep solve_t(bool tilde) {
    int N = model_->params().n_cuts(), g = model_->genus();
    int n = N + 5;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    for (int ci = 0; ci < 2; ++ci) {
      cplx center = (ci == 0) ? cplx(0, 1) : cplx(0, -1);
      // (lambda^2+1)^3 = tau^3 (tau + 2 center)^3 around lambda = center + tau
      Poly regden = poly_shift(Poly{cplx(0), cplx(0), cplx(0), cplx(1)},
                               2.0 * center);
      Poly base = series_inv(series_mul(regden, sqrt_at(center), 3), 3);
      Poly lam{cplx(1)};
      for (int m = 0; m < n; ++m) {
        Poly row = series_mul(lam, base, 3);
        for (int r = 0; r < 3; ++r) A(3 * ci + r, m) = row[r];
        lam = series_mul(lam, Poly{center, cplx(1)}, 3);
      }
      // -S' = (lambda^4 - 6 lambda^2 + 1)/((lambda^2+1)^3): numerator series
      Poly tn = poly_shift(Poly{cplx(1), cplx(0), cplx(-6), cplx(0), cplx(1)},
                           center);
      Poly tgt = series_mul(tn, series_inv(regden, 3), 3);
      for (int r = 0; r < 3; ++r) rhs[3 * ci + r] = tgt[r];
    }
    for (int j = 1; j <= g; ++j)
      for (int m = 0; m < n; ++m) {
        auto f = [m](cplx z, cplx R) {
          cplx zp(1);
          for (int l = 0; l < m; ++l) zp *= z;
          cplx d = z * z + 1.0;
          return zp / (d * d * d * R);
        };
        A(5 + j, m) =
            tilde ? cycles_->a()[j - 1].integrate(f) : cycles_->b()[j].integrate(f);
      }
    DiffRep rep;
    rep.denom_pow = 3;
    rep.num = solve_checked(A, rhs, "dg_t");
    return rep;
  }

  Poly solve_checked(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& rhs,
                     const char* what) const {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
    Eigen::VectorXcd x = qr.solve(rhs);
    double scale = A.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() + 1.0;
    double resid = (A * x - rhs).cwiseAbs().maxCoeff();
    if (resid > model_->tol().lin_residual * scale)
      throw error(errc::ill_conditioned,
                  std::string(what) + " condition residual " + std::to_string(resid));
    Poly out(x.size());
    for (int i = 0; i < x.size(); ++i) out[i] = x[i];
    return out;
  }

  // ---- series data ----------------------------------------------------

  void build_series_data() {
    const Poly& P = model_->defining_poly();
    // palindromic P: the mu = 1/lambda chart reuses the same polynomial
    sqrt_inf_ = series_sqrt(P, cplx(1), L_);
    inv_sqrt_inf_ = series_inv(sqrt_inf_, L_);
    inv_sqrt_zero_ = series_inv(series_sqrt(P, model_->eval_R(cplx(0)), L_), L_);
    double dz = 1e300;
    for (cplx bp : model_->branch_points()) dz = std::min(dz, std::abs(bp));
    r0_zero_ = 0.4 * dz;
    r0_i_ = 0.4 * std::min(model_->distance_to_cuts(cplx(0, 1)), 2.0);
  }

  Poly sqrt_at(cplx center) const {
    return series_sqrt(poly_shift(model_->defining_poly(), center),
                       model_->eval_R(center), L_);
  }

  void build_local_series() {
    {
      Poly t = series_mul(dg_y_.num, inv_sqrt_zero_, L_);
      t[0] -= 1.0;
      t[2] -= 1.0;
      check_regular(t, 2, "dg_y at 0");
      reg_y0_.assign(t.begin() + 2, t.end());
    }
    reg_ti_ = t_regular_series(dg_t_, cplx(0, 1));
    reg_tmi_ = t_regular_series(dg_t_, cplx(0, -1));
    reg_tti_ = t_regular_series(dgt_t_, cplx(0, 1));
  }

  /// Taylor series of dens_t + S' (the derivative of h_t) about +-i.  The
  /// tau^{-3}..tau^{-1} parts must cancel by the solved matching conditions.
  Poly t_regular_series(const DiffRep& rep, cplx center) const {
    Poly regden = poly_shift(Poly{cplx(0), cplx(0), cplx(0), cplx(1)}, 2.0 * center);
    Poly A = series_mul(series_mul(poly_shift(rep.num, center),
                                   series_inv(regden, L_), L_),
                        series_inv(sqrt_at(center), L_), L_);
    // S = (lambda^3 - lambda)/(lambda^2+1)^2 = tau^{-2} B(tau)
    Poly regden2 = poly_shift(Poly{cplx(0), cplx(0), cplx(1)}, 2.0 * center);
    Poly B = series_mul(poly_shift(Poly{cplx(0), cplx(-1), cplx(0), cplx(1)}, center),
                        series_inv(regden2, L_), L_);
    // coefficient of tau^{k-3} in dens_t + S': A_k + (k-2) B_k
    Poly C = A;
    for (int k = 0; k < L_; ++k) C[k] += double(k - 2) * B[k];
    check_regular(C, 3, "dg_t principal part");
    return Poly(C.begin() + 3, C.end());
  }

  void check_regular(const Poly& t, int n_sing, const char* what) const {
    double scale = 0;
    for (cplx c : t) scale = std::max(scale, std::abs(c));
    for (int k = 0; k < n_sing; ++k)
      if (std::abs(t[k]) > 1e-8 * (scale + 1.0))
        throw error(errc::inconsistent_principal_part,
                    std::string(what) + " residue " + std::to_string(std::abs(t[k])));
  }

  /// Exact integral of a regular series about 0 from tau_a to tau_b.
  cplx series_int(const Poly& ser, cplx tau_b, cplx tau_a) const {
    cplx s(0), pb = tau_b, pa = tau_a;
    for (int k = 0; k < (int)ser.size(); ++k) {
      s += ser[k] * (pb - pa) / double(k + 1);
      pb *= tau_b;
      pa *= tau_a;
    }
    return s;
  }

  // ---- path machinery -------------------------------------------------

  void build_base_path() {
    const auto& sp = model_->params();
    base_path_.r_hi = model_->outer_radius();
    base_path_.psi = (sp.q > 0) ? kPi / 2 : kPi - sp.c[sp.p - 1];
    PathSeg first;
    first.a = df_->base_point();
    first.b = std::polar(base_path_.r_hi, base_path_.psi);
    base_path_.legs.push_back(
        detail::sample_seg(first, model_->tol().nodes_per_panel, Sing::at_start));
    track_path(base_path_);
    axis_outer_R_ = model_->track_R({cplx(0, model_->outer_radius())}).front();
  }

  /// Outward path z -> r e^{i psi} like the Abel machinery, but with panel
  /// refinement that also resolves the poles of the densities at 0 and +-i.
  OutwardPath build_path(cplx z, const Arc* arc, Side side) const {
    const auto& tol = model_->tol();
    std::vector<cplx> sing = model_->branch_points();
    sing.push_back(cplx(0, 1));
    sing.push_back(cplx(0, -1));
    sing.push_back(cplx(0));
    std::vector<PathSeg> segs;
    cplx z0 = z;
    if (arc) {
      double s = nearest_param(*arc, z);
      cplx n = arc->plus_normal(s);
      if (side == Side::minus) n = -n;
      double clear = 1e300;
      for (cplx bp : model_->branch_points())
        clear = std::min(clear, std::abs(z - bp));
      double off = std::min(0.12, 0.4 * clear);
      z0 = z + off * n;
      PathSeg first;
      first.a = z;
      first.b = z0;
      segs.push_back(first);
    } else if (model_->distance_to_cuts(z) < tol.snap_tol) {
      throw error(errc::on_cut, "g-function target on a cut without a side hint");
    }
    double rz = std::abs(z0), phi = std::arg(z0);
    double r_hi = std::max(model_->outer_radius(), rz);
    double phi_out = outward_angle(phi);
    if (std::abs(phi_out - phi) > 1e-15) {
      PathSeg sw;
      sw.is_arc = true;
      sw.r = rz;
      sw.t0 = phi;
      sw.t1 = phi_out;
      segs.push_back(sw);
    }
    if (r_hi - rz > 1e-15) {
      PathSeg rad;
      rad.a = std::polar(rz, phi_out);
      rad.b = std::polar(r_hi, phi_out);
      segs.push_back(rad);
    }
    OutwardPath path;
    path.psi = phi_out;
    path.r_hi = r_hi;
    for (const auto& seg : segs)
      path.legs.push_back(detail::sample_seg_adaptive(seg, sing, 32));
    if (path.legs.empty()) {
      Leg leg;
      leg.z = {z0};
      leg.w = {cplx(0)};
      path.legs.push_back(leg);
    }
    track_path(path);
    return path;
  }

  void track_path(OutwardPath& path) const {
    std::vector<cplx> all;
    for (const auto& l : path.legs) all.insert(all.end(), l.z.begin(), l.z.end());
    std::vector<cplx> rev;
    rev.push_back(std::polar(path.r_hi, path.psi));
    rev.insert(rev.end(), all.rbegin(), all.rend());
    auto rr = model_->track_R(rev);
    path.outer_R = rr.front();
    rr.erase(rr.begin());
    std::reverse(rr.begin(), rr.end());
    size_t off = 0;
    for (auto& l : path.legs) {
      l.R.assign(rr.begin() + off, rr.begin() + off + l.z.size());
      off += l.z.size();
    }
  }

  cplx integrate_path(const DiffRep& rep, const OutwardPath& path) const {
    cplx s(0);
    for (const auto& leg : path.legs)
      for (size_t i = 0; i < leg.z.size(); ++i)
        s += leg.w[i] * rep.density(leg.z[i], leg.R[i]);
    return s;
  }

  /// int_base^z of the differential along base ray -> outer arc -> inward.
  cplx g_integral(const DiffRep& rep, cplx z, const Arc* arc, Side side) const {
    OutwardPath tgt = build_path(z, arc, side);
    cplx s = integrate_path(rep, base_path_);
    double r0 = model_->outer_radius();
    if (std::abs(tgt.psi - base_path_.psi) > 1e-15) {
      PathSeg sw;
      sw.is_arc = true;
      sw.r = r0;
      sw.t0 = base_path_.psi;
      sw.t1 = tgt.psi;
      s += integrate_connector(rep, sw, tgt.psi, r0);
    }
    if (tgt.r_hi > r0 + 1e-15) {
      PathSeg rad;
      rad.a = std::polar(r0, tgt.psi);
      rad.b = std::polar(tgt.r_hi, tgt.psi);
      s += integrate_connector(rep, rad, tgt.psi, tgt.r_hi);
    }
    return s - integrate_path(rep, tgt);
  }

  cplx integrate_connector(const DiffRep& rep, const PathSeg& seg, double psi,
                           double r_hi) const {
    OutwardPath conn;
    conn.psi = psi;
    conn.r_hi = r_hi;
    conn.legs.push_back(
        detail::sample_seg_adaptive(seg, model_->branch_points(), 32));
    track_path(conn);
    return integrate_path(rep, conn);
  }

  // A 1e-3 nudge keeps the radial leg far enough from the axis cuts for the
  // panel refinement to resolve; points exactly on the axis route through the
  // right half-plane so that every evaluation near i shares one homotopy
  // class (the tilde differentials have nonzero b-periods).
  double outward_angle(double phi) const {
    double out = model_->safe_angle(phi);
    for (double axis : {kPi / 2, -kPi / 2}) {
      if (std::abs(out - axis) < 1e-3) {
        double dir;
        if (std::abs(phi - axis) < 1e-15) dir = (axis > 0) ? -1.0 : 1.0;
        else dir = (phi >= axis) ? 1.0 : -1.0;
        out = axis + dir * 1e-3;
      }
    }
    return out;
  }

  static double nearest_param(const Arc& arc, cplx z) {
    double best = 0, bd = 1e300;
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
      double s = double(i) / n;
      double d = std::abs(z - arc.point(s));
      if (d < bd) {
        bd = d;
        best = s;
      }
    }
    return best;
  }

  // ---- tails and the axis path ---------------------------------------

  /// mu-chart tail of int (dens_y - 1 - lambda^{-2}) dlambda beyond the outer
  /// radius along the ray of angle psi, by exact series integration.
  cplx tail_y(double psi, cplx outer_R) const {
    cplx mu1 = std::polar(1.0 / model_->outer_radius(), -psi);
    int N = model_->params().n_cuts();
    Poly amu(L_, cplx(0));
    for (size_t k = 0; k < dg_y_.num.size(); ++k) {
      int e = N - ((int)k - 2);
      if (e >= 0 && e < L_) amu[e] = dg_y_.num[k];
    }
    Poly t = series_mul(amu, inv_sqrt_inf_, L_);
    double sg = tail_sheet_sign(outer_R, mu1);
    for (auto& c : t) c *= sg;
    t[0] -= 1.0;
    t[2] -= 1.0;
    check_regular(t, 2, "dg_y at infinity");
    Poly reg(t.begin() + 2, t.end());
    return series_int(reg, mu1, cplx(0));
  }

  /// mu-chart tail of int dens_t dlambda beyond the outer radius.
  cplx tail_t(const DiffRep& rep, double psi, cplx outer_R) const {
    cplx mu1 = std::polar(1.0 / model_->outer_radius(), -psi);
    int N = model_->params().n_cuts();
    Poly qmu(L_, cplx(0));
    for (size_t m = 0; m < rep.num.size(); ++m) {
      int e = N + 4 - (int)m;
      if (e >= 0 && e < L_) qmu[e] = rep.num[m];
    }
    Poly den{cplx(1), cplx(0), cplx(3), cplx(0), cplx(3), cplx(0), cplx(1)};
    Poly t = series_mul(series_mul(qmu, series_inv(den, L_), L_),
                        inv_sqrt_inf_, L_);
    double sg = tail_sheet_sign(outer_R, mu1);
    for (auto& c : t) c *= sg;
    return series_int(t, mu1, cplx(0));
  }

  double tail_sheet_sign(cplx outer_R, cplx mu1) const {
    int N = model_->params().n_cuts();
    cplx S1 = series_eval(sqrt_inf_, mu1);
    cplx sigma = outer_R * std::pow(mu1, N) / S1;
    double sg = (sigma.real() >= 0) ? 1.0 : -1.0;
    if (std::abs(sigma - sg) > 1e-6)
      throw error(errc::continuation_failed, "g-function tail sheet matching");
    return sg;
  }

  /// Numeric part of the axis shift integral from `from` up to i r_hi, taking
  /// the requested boundary side on the imaginary cuts above i.
  cplx axis_numeric(const DiffRep& rep, Side side, cplx from) const {
    double r_hi = model_->outer_radius();
    std::vector<double> ys;
    for (cplx bp : model_->branch_points())
      if (std::abs(bp.real()) < 1e-14 && bp.imag() > from.imag() + 1e-12)
        ys.push_back(bp.imag());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             ys.end());
    std::vector<double> pts{from.imag()};
    pts.insert(pts.end(), ys.begin(), ys.end());
    pts.push_back(r_hi);
    cplx total(0);
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
      PathSeg seg;
      seg.a = cplx(0, pts[k]);
      seg.b = cplx(0, pts[k + 1]);
      bool s0 = std::binary_search(ys.begin(), ys.end(), pts[k]);
      bool s1 = std::binary_search(ys.begin(), ys.end(), pts[k + 1]);
      Sing sing = s0 ? (s1 ? Sing::both : Sing::at_start)
                     : (s1 ? Sing::at_end : Sing::none);
      Leg leg = detail::sample_seg(seg, model_->tol().nodes_per_panel, sing);
      const Arc* on = nullptr;
      for (const auto& arc : model_->arcs())
        if (arc.distance(0.5 * (seg.a + seg.b)) < 1e-12) on = &arc;
      leg.R = model_->track_R(leg.z, on, side);
      for (size_t i = 0; i < leg.z.size(); ++i)
        total += leg.w[i] * rep.density(leg.z[i], leg.R[i]);
    }
    return total;
  }

  void build_anchors() {
    hy_center0_ = cplx(r0_zero_, 0);
    hy_anchor0_ = g_integral(dg_y_, hy_center0_, nullptr, Side::plus) -
                  f_rat(hy_center0_);
    // anchors sit to the right of +-i: the inward path stays clear of the
    // imaginary cuts, unlike a path ending on the axis itself
    ht_center_i_ = cplx(r0_i_, 1.0);
    ht_anchor_i_ = g_integral(dg_t_, ht_center_i_, nullptr, Side::plus) +
                   s_rat(ht_center_i_);
    ht_center_mi_ = cplx(r0_i_, -1.0);
    ht_anchor_mi_ = g_integral(dg_t_, ht_center_mi_, nullptr, Side::plus) +
                    s_rat(ht_center_mi_);
    htt_anchor_i_ = g_integral(dgt_t_, ht_center_i_, nullptr, Side::plus) +
                    s_rat(ht_center_i_);
  }

  void build_omegas() {
    int g = model_->genus();
    om_y_.setZero(g + 1);
    om_t_.setZero(g + 1);
    omt_y_.setZero(g + 1);
    omt_t_.setZero(g + 1);
    auto dy = [&](cplx z, cplx R) { return dg_y_.density(z, R); };
    auto dt = [&](cplx z, cplx R) { return dg_t_.density(z, R); };
    cplx ay(0), at(0);
    for (int j = 1; j <= g; ++j) {
      ay += cycles_->a()[j - 1].integrate(dy);
      at += cycles_->a()[j - 1].integrate(dt);
      om_y_[j] = -0.25 * ay;
      om_t_[j] = -2.0 * at;
    }
    auto dyt = [&](cplx z, cplx R) { return dgt_y_.density(z, R); };
    auto dtt = [&](cplx z, cplx R) { return dgt_t_.density(z, R); };
    cplx by(0), bt(0);
    for (int j = g; j >= 1; --j) {
      by += cycles_->b()[j].integrate(dyt);
      bt += cycles_->b()[j].integrate(dtt);
      omt_y_[j] = 0.25 * by;
      omt_t_[j] = 2.0 * bt;
    }
  }

  const Differentials* df_;
  const Cycles* cycles_;
  const CurveModel* model_;
  DiffRep dg_y_, dg_t_, dgt_y_, dgt_t_;
  Poly sqrt_inf_, inv_sqrt_inf_, inv_sqrt_zero_;
  Poly reg_y0_, reg_ti_, reg_tmi_, reg_tti_;
  double r0_zero_ = 0, r0_i_ = 0;
  OutwardPath base_path_;
  cplx axis_outer_R_;
  cplx hy_center0_, ht_center_i_, ht_center_mi_;
  cplx hy_anchor0_, ht_anchor_i_, ht_anchor_mi_, htt_anchor_i_;
  Eigen::VectorXcd om_y_, om_t_, omt_y_, omt_t_;
  cplx X_y_, X_t_, Xt_y_, Xt_t_, hy_inf_, ht_inf_;
};

}  // namespace mchag

#endif
