#ifndef MCHAG_DIFFERENTIALS_HPP
#define MCHAG_DIFFERENTIALS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mchag/curve.hpp"
#include "mchag/homology.hpp"

namespace mchag {

struct PeriodSolve {
  Eigen::MatrixXcd raw_b;     // raw_b(j-1, m) = loop_{b_j} lambda^m dlambda / R
  Eigen::MatrixXcd coeff;     // coeff.col(k-1) = polynomial coefficients of omega_k
  Eigen::MatrixXcd a_period;  // a_period(l-1, k-1) = loop_{a_l} omega_k
  Eigen::MatrixXcd B;         // B(k-1, j-1) = sum_{l<=j} loop_{a_l} omega_k
  Eigen::VectorXcd K;         // Riemann constants
  double cond = 0;            // condition number of raw_b
};

/// A single outward integration path z -> r_hi e^{i psi} with R continued
/// along it, ready for moment accumulation; the tail to infinity is handled
/// separately in the mu = 1/lambda chart.
struct OutwardPath {
  std::vector<Leg> legs;
  double psi = 0;   // angle of the outer endpoint
  double r_hi = 0;  // its radius
  cplx outer_R;     // sheet-consistent R there
};

class Differentials {
 public:
  Differentials(const CurveModel& cm, const Cycles& cy)
      : model_(&cm), cycles_(&cy) {
    solve_periods();
    a_infinity_ = abel_from_base_to_infinity();
  }

  const CurveModel& model() const { return *model_; }
  const PeriodSolve& periods() const { return ps_; }
  const Eigen::VectorXcd& abel_infinity() const { return a_infinity_; }

  cplx base_point() const {
    const auto& sp = model_->params();
    if (sp.q > 0) return cplx(0, 1.0 / sp.a[0]);
    return std::polar(1.0, kPi - sp.c[sp.p - 1]);
  }

  /// Abel map on sheet 1 from the base point.  With an arc hint the boundary
  /// value from the given side is produced for z on that cut.
  Eigen::VectorXcd abel(cplx z, const Arc* arc = nullptr,
                        Side side = Side::plus) const {
    OutwardPath path = build_outward(z, arc, side);
    return a_infinity_ - integrate_outward(path);
  }

  /// Reduce v modulo the period lattice Z^g + B Z^g.
  Eigen::VectorXcd lattice_reduce(const Eigen::VectorXcd& v) const {
    Eigen::VectorXd n = im_solver_.solve(v.imag());
    Eigen::VectorXcd w = v;
    for (int k = 0; k < n.size(); ++k)
      w -= std::round(n[k]) * ps_.B.col(k);
    for (int k = 0; k < w.size(); ++k) w[k] -= std::round(w[k].real());
    return w;
  }

  /// Integral over the outward path plus the tail to infinity, for all omega_k.
  Eigen::VectorXcd integrate_outward(const OutwardPath& path) const {
    int g = model_->genus();
    Eigen::VectorXcd mom = Eigen::VectorXcd::Zero(g);
    for (const auto& leg : path.legs) {
      for (size_t i = 0; i < leg.z.size(); ++i) {
        cplx f = leg.w[i] / leg.R[i];
        cplx zp(1, 0);
        for (int m = 0; m < g; ++m) {
          mom[m] += f * zp;
          zp *= leg.z[i];
        }
      }
    }
    mom += tail_moments(path);
    return ps_.coeff.transpose() * mom;
  }

  /// Build the outward path from z (optionally a boundary point of `arc`).
  OutwardPath build_outward(cplx z, const Arc* arc = nullptr,
                            Side side = Side::plus) const {
    const auto& tol = model_->tol();
    std::vector<PathSeg> segs;
    cplx z0 = z;
    if (arc) {
      double s = nearest_param(*arc, z);
      cplx n = arc->plus_normal(s);
      if (side == Side::minus) n = -n;
      // leave the cut along the normal far enough that the later swing leg
      // clears the cut's branch points
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
      throw error(errc::on_cut, "Abel map target on a cut without a side hint");
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
      path.legs.push_back(
          detail::sample_seg_adaptive(seg, model_->branch_points(), 32));
    if (path.legs.empty()) {
      // z already at the outer radius: degenerate path, only the tail counts
      PathSeg stay;
      stay.a = z0;
      stay.b = z0;
      Leg leg;
      leg.z = {z0};
      leg.w = {cplx(0)};
      path.legs.push_back(leg);
    }
    track_backward(path);
    return path;
  }

  /// Abel map at the same lambda on sheet 2 (involution through the base).
  Eigen::VectorXcd abel_sheet2(cplx z) const { return -abel(z); }

 private:
  double outward_angle(double phi) const {
    double out = model_->safe_angle(phi);
    for (double axis : {kPi / 2, -kPi / 2}) {
      if (std::abs(out - axis) < 1e-3) {
        double dir = (phi >= axis) ? 1.0 : -1.0;
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

  void track_backward(OutwardPath& path) const {
    std::vector<cplx> all;
    for (const auto& l : path.legs) all.insert(all.end(), l.z.begin(), l.z.end());
    std::vector<cplx> rev;
    rev.push_back(std::polar(path.r_hi, path.psi));  // exact outer endpoint
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

  /// Moments of the tail integral int_{lambda_1}^{infty} lambda^m dlambda / R
  /// in the mu chart, using the palindromic symmetry P(1/mu) = P(mu)/mu^{8N/2}.
  Eigen::VectorXcd tail_moments(const OutwardPath& path) const {
    int g = model_->genus();
    int N = model_->params().n_cuts();  // R ~ lambda^N at infinity
    cplx mu1 = std::polar(1.0 / path.r_hi, -path.psi);
    std::vector<double> x, w;
    gauss_legendre(96, x, w);
    // continue log P(mu) from mu = 0 (where P = 1) outward along the ray
    cplx from(0), wlog(0);
    Eigen::VectorXcd T = Eigen::VectorXcd::Zero(g);
    std::vector<cplx> S(x.size());
    for (size_t k = 0; k < x.size(); ++k) {
      cplx mu = 0.5 * (x[k] + 1.0) * mu1;
      model_->step_log(from, wlog, mu);
      S[k] = std::exp(0.5 * wlog);
      cplx base = std::pow(mu, N - 2) / S[k] * (0.5 * w[k] * mu1);
      cplx mp(1, 0);
      for (int m = 0; m < g; ++m) {
        T[m] += base * mp;
        mp *= 1.0 / mu;  // mu^{N-2-m}
      }
    }
    // sheet-consistency sign between the tracked R and the principal S branch
    model_->step_log(from, wlog, mu1);
    cplx S1 = std::exp(0.5 * wlog);
    cplx sigma = path.outer_R * std::pow(mu1, N) / S1;
    if (std::abs(std::abs(sigma) - 1.0) > 1e-6)
      throw error(errc::continuation_failed, "tail sheet matching");
    double sg = (sigma.real() >= 0) ? 1.0 : -1.0;
    if (std::abs(sigma - sg) > 1e-6)
      throw error(errc::continuation_failed, "tail sheet sign is not +-1");
    return sg * T;
  }

  Eigen::VectorXcd abel_from_base_to_infinity() const {
    const auto& sp = model_->params();
    OutwardPath path;
    PathSeg first;
    if (sp.q > 0) {
      path.psi = kPi / 2;
      path.r_hi = model_->outer_radius();
      first.a = base_point();
      first.b = cplx(0, path.r_hi);
    } else {
      path.psi = kPi - sp.c[sp.p - 1];
      path.r_hi = model_->outer_radius();
      first.a = base_point();
      first.b = std::polar(path.r_hi, path.psi);
    }
    path.legs.push_back(
        detail::sample_seg(first, model_->tol().nodes_per_panel, Sing::at_start));
    track_backward(path);
    return integrate_outward(path);
  }

  void solve_periods() {
    int g = model_->genus();
    ps_.raw_b.resize(g, g);
    Eigen::MatrixXcd raw_a(g, g);
    for (int j = 1; j <= g; ++j) {
      for (int m = 0; m < g; ++m) {
        auto f = [m](cplx z, cplx R) { return std::pow(z, m) / R; };
        ps_.raw_b(j - 1, m) = cycles_->b()[j].integrate(f);
        raw_a(j - 1, m) = cycles_->a()[j - 1].integrate(f);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ps_.raw_b);
    ps_.cond = svd.singularValues()(0) / svd.singularValues()(g - 1);
    if (ps_.cond > model_->tol().cond_limit)
      throw error(errc::ill_conditioned, "raw b-period matrix");
    ps_.coeff = ps_.raw_b.partialPivLu().solve(Eigen::MatrixXcd::Identity(g, g));
    double resid =
        (ps_.raw_b * ps_.coeff - Eigen::MatrixXcd::Identity(g, g)).cwiseAbs().maxCoeff();
    if (resid > model_->tol().lin_residual * ps_.cond)
      throw error(errc::ill_conditioned, "period normalization residual");
    ps_.a_period = raw_a * ps_.coeff;
    ps_.B.resize(g, g);
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(g);
    for (int j = 0; j < g; ++j) {
      acc += ps_.a_period.row(j);
      ps_.B.col(j) = acc.transpose();
    }
    double asym = (ps_.B - ps_.B.transpose()).cwiseAbs().maxCoeff();
    if (asym > model_->tol().b_symmetry)
      throw error(errc::not_riemann_matrix,
                  "period matrix asymmetry " + std::to_string(asym));
    ps_.B = 0.5 * (ps_.B + ps_.B.transpose()).eval();
    Eigen::MatrixXd Y = ps_.B.imag();
    im_solver_.compute(Y);
    if (im_solver_.info() != Eigen::Success)
      throw error(errc::not_riemann_matrix, "Im B is not positive definite");
    ps_.K.resize(g);
    for (int j = 0; j < g; ++j)
      ps_.K[j] = 0.5 * ps_.B.col(j).sum() - 0.5 * (j + 1);
  }

  const CurveModel* model_;
  const Cycles* cycles_;
  PeriodSolve ps_;
  Eigen::LLT<Eigen::MatrixXd> im_solver_;
  Eigen::VectorXcd a_infinity_;
};

}  // namespace mchag

#endif
