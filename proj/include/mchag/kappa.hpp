#ifndef MCHAG_KAPPA_HPP
#define MCHAG_KAPPA_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mchag/differentials.hpp"

namespace mchag {

/// One point of the divisor D: a zero of kappa + 1/kappa on the surface.
struct DivisorPoint {
  cplx lambda;
  int sheet = 1;            // kappa^2 -> -1 on sheet 1, +1 on sheet 2
  cplx kappa;               // sheet-1 branch of kappa at lambda
  bool at_infinity = false; // the (inf, -R(inf)) point kept when q = 0
};

/// The quartic-root function kappa (kappa^4 = N/D rational, kappa(inf) = 1,
/// branch cuts on Gamma), its divisor and the theta-argument shift e.
class KappaDivisor {
 public:
  explicit KappaDivisor(const Differentials& df)
      : df_(&df), model_(&df.model()) {
    build_ratio();
    build_divisor();
    build_e();
  }

  const Poly& numerator() const { return num_; }
  const Poly& denominator() const { return den_; }
  const std::vector<DivisorPoint>& divisor() const { return divisor_; }
  const Eigen::VectorXcd& e() const { return e_; }
  const Eigen::VectorXcd& e_raw() const { return e_raw_; }

  /// kappa^4 as a plain rational value (any branch question absorbed).
  cplx ratio(cplx z) const { return poly_eval(num_, z) / poly_eval(den_, z); }

  /// kappa at z, continued from infinity where kappa = 1.  With an arc/side
  /// hint, z may sit on that cut and the boundary value is returned.
  cplx kappa(cplx z, const Arc* arc = nullptr, Side side = Side::plus) const {
    std::vector<cplx> path = model_->route(z, arc, side);
    cplx w = std::log(ratio(path.front()));
    cplx prev = path.front();
    for (size_t i = 1; i < path.size(); ++i) step_log_ratio(prev, w, path[i]);
    return std::exp(0.25 * w);
  }

  /// Largest winding defect of log(N/D) over loops enclosing each single cut.
  /// Zero defect makes kappa single-valued on the cut complement.
  double monodromy_defect() const {
    double worst = 0;
    for (const auto& arc : model_->arcs()) {
      cplx center = 0.5 * (arc.start + arc.end);
      double half = 0.5 * std::abs(arc.end - arc.start);
      double clear = 1e300;
      for (cplx bp : model_->branch_points()) {
        if (std::abs(bp - arc.start) < 1e-12 || std::abs(bp - arc.end) < 1e-12)
          continue;
        clear = std::min(clear, std::abs(bp - center));
      }
      double rad = half + std::min(0.05, 0.4 * (clear - half));
      if (rad <= half)
        throw error(errc::monodromy_failed, "no room for a loop around a cut");
      const int n = 256;
      cplx w(0);
      cplx prev = center + rad;
      for (int k = 1; k <= n; ++k) {
        cplx zk = center + std::polar(rad, 2 * kPi * k / n);
        step_log_ratio(prev, w, zk);
      }
      worst = std::max(worst, std::abs(w));
    }
    return worst;
  }

 private:
  // kappa^4 = N/D with
  //   N = prod_q (l^2 + i(a-1/a)l + 1)(l^2 - i(b-1/b)l + 1)
  //       prod_p (l^2 - e^{2ic})(l^2 - e^{-2id})
  // and D the sign/conjugate-flipped counterpart.  The weight factors run over
  // the q circle-weights a,b and the angle factors over the p gap angles c,d:
  // each cut then carries exactly one zero of N and one of D at its endpoints,
  // which is what makes the quartic root single-valued off the cuts.
  void build_ratio() {
    const auto& sp = model_->params();
    num_ = Poly{cplx(1)};
    den_ = Poly{cplx(1)};
    auto lin = [](cplx mid) { return Poly{cplx(1), mid, cplx(1)}; };
    for (int j = 0; j < sp.q; ++j) {
      cplx ta(0, sp.a[j] - 1.0 / sp.a[j]);
      cplx tb(0, sp.b[j] - 1.0 / sp.b[j]);
      num_ = poly_mul(num_, lin(ta));
      num_ = poly_mul(num_, lin(-tb));
      den_ = poly_mul(den_, lin(-ta));
      den_ = poly_mul(den_, lin(tb));
    }
    auto quad = [](cplx root2) { return Poly{-root2, cplx(0), cplx(1)}; };
    for (int l = 0; l < sp.p; ++l) {
      cplx ec = std::exp(cplx(0, 2 * sp.c[l]));
      cplx ed = std::exp(cplx(0, 2 * sp.d[l]));
      num_ = poly_mul(num_, quad(ec));
      num_ = poly_mul(num_, quad(std::conj(ed)));
      den_ = poly_mul(den_, quad(std::conj(ec)));
      den_ = poly_mul(den_, quad(ed));
    }
  }

  // Steps are kept short relative to the distance from the branch points
  // (the zeros and poles of N/D all sit there): the endpoint ratio aliases a
  // near-2pi phase turn to a small one when a long chord sweeps past them.
  void step_log_ratio(cplx& from, cplx& w, cplx to, int depth = 0) const {
    if (depth > 60)
      throw error(errc::continuation_failed, "kappa increment not resolved");
    double clear = std::max(1e-12, std::min(model_->branch_clearance(from),
                                            model_->branch_clearance(to)));
    if (std::abs(to - from) <= 0.25 * clear) {
      cplx r = ratio(to) / ratio(from);
      double da = std::abs(std::arg(r));
      if (da < kPi / 2 && std::abs(std::log(std::abs(r))) < 1.0) {
        w += std::log(r);
        from = to;
        return;
      }
    }
    cplx mid = 0.5 * (from + to);
    step_log_ratio(from, w, mid, depth + 1);
    step_log_ratio(from, w, to, depth + 1);
  }

  // Zeros of kappa + 1/kappa away from infinity solve N(l) = D(l): both are
  // monic of degree 4(p+q), so the difference drops to degree 4(p+q)-1 = g.
  // For q = 0 the difference is an even polynomial of degree g-1 and the
  // remaining divisor point moves to infinity on the second sheet (the zero
  // of kappa + 1/kappa there is double; removing (inf,-R(inf)) leaves one).
  void build_divisor() {
    int g = model_->genus();
    int nf = (model_->params().q == 0) ? g - 1 : g;  // finite divisor points
    Poly diff(num_.size());
    double scale = 0;
    for (size_t i = 0; i < num_.size(); ++i) {
      diff[i] = num_[i] - den_[i];
      scale = std::max(scale, std::abs(num_[i]));
    }
    while (diff.size() > 1 && std::abs(diff.back()) < 1e-10 * scale)
      diff.pop_back();
    if ((int)diff.size() != nf + 1)
      throw error(errc::root_count_mismatch,
                  "kappa divisor polynomial has degree " +
                      std::to_string(diff.size() - 1) + ", expected " +
                      std::to_string(nf));
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(nf, nf);
    for (int i = 0; i < nf; ++i) comp(i, nf - 1) = -diff[i] / diff[nf];
    for (int i = 1; i < nf; ++i) comp(i, i - 1) = cplx(1);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
    Poly dp = poly_deriv(diff);
    divisor_.clear();
    for (int i = 0; i < nf; ++i) {
      cplx r = es.eigenvalues()[i];
      for (int it = 0; it < 12; ++it) {
        cplx f = poly_eval(diff, r);
        cplx d = poly_eval(dp, r);
        if (std::abs(d) < 1e-300) break;
        cplx step = f / d;
        r -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
      }
      if (model_->distance_to_cuts(r) < model_->tol().snap_tol)
        throw error(errc::divisor_validation_failed, "divisor point on a cut");
      DivisorPoint pt;
      pt.lambda = r;
      pt.kappa = kappa(r);
      cplx k2 = pt.kappa * pt.kappa;
      if (std::abs(k2 + cplx(1)) < 1e-6) {
        pt.sheet = 1;
      } else if (std::abs(k2 - cplx(1)) < 1e-6) {
        pt.sheet = 2;
      } else {
        throw error(errc::ambiguous_sheet,
                    "kappa^2 away from +-1 at a divisor point");
      }
      divisor_.push_back(pt);
    }
    if (nf < g) {
      DivisorPoint pt;
      pt.lambda = cplx(0);
      pt.sheet = 2;
      pt.kappa = cplx(1);
      pt.at_infinity = true;
      divisor_.push_back(pt);
    }
  }

  void build_e() {
    e_raw_ = df_->periods().K;
    for (const auto& pt : divisor_) {
      Eigen::VectorXcd a =
          pt.at_infinity ? df_->abel_infinity() : df_->abel(pt.lambda);
      e_raw_ += (pt.sheet == 1) ? a : Eigen::VectorXcd(-a);
    }
    e_ = df_->lattice_reduce(e_raw_);
  }

  const Differentials* df_;
  const CurveModel* model_;
  Poly num_, den_;
  std::vector<DivisorPoint> divisor_;
  Eigen::VectorXcd e_, e_raw_;
};

}  // namespace mchag

#endif
