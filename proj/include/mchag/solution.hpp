#ifndef MCHAG_SOLUTION_HPP
#define MCHAG_SOLUTION_HPP

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

#include "mchag/gfunction.hpp"
#include "mchag/kappa.hpp"
#include "mchag/theta.hpp"

namespace mchag {

/// One grid point of the reconstructed solution, with reality diagnostics.
struct SolutionSample {
  double y = 0, t = 0;
  double u = 0, x = 0, q = 0, m = 0;
  double im_u = 0, im_x = 0;
  double denom_margin = 0;  // smallest theta denominator met, relative
};

/// Assembles the jump constants C(y,t), the explicit theta-function solution
/// M^(1), the scalars m_1, m_2, the full M (inverse of the g-function
/// transformation), and the reconstructed u, x, q, m.
///
/// The displayed closed forms for m_1, m_2 absorb the transformation factors:
/// with c0 = exp(-i/4 (y Omega_g^y + t Omega_g^t)) and E = exp(i(g - theta)),
/// m_1 = c0 E ((1 1) M)_1 and m_2 = ((1 1) M)_2 / (c0 E).  The factors cancel
/// in u and are compensated in x by the +2i(y X^y + t X^t) term.
class Solution {
 public:
  Solution(const Differentials& df, const GFunction& gf, const KappaDivisor& kd)
      : df_(&df),
        gf_(&gf),
        kd_(&kd),
        model_(&df.model()),
        theta_(df.periods().B, df.model().tol().theta_tol) {
    int g = model_->genus();
    theta_scale_ =
        std::abs(theta_.eval(Eigen::VectorXcd::Zero(g)).val);
    a_inf_ = df_->abel_infinity();
    // The theta shift enters the entries with the opposite sign of
    // A(D) + K: with e = -(A(D)+K), every zero of the kappa +- 1/kappa factor
    // in an entry coincides with a zero of that entry's theta denominator
    // (sheet-1 divisor points for the kp entries, sheet-2 ones for km), so
    // all entries are pole-free -- including the q = 0 case, where the
    // divisor point at infinity would otherwise make the diagonal diverge.
    e_ = -kd_->e_raw();
    build_c_const();
    num1_ = theta_.eval(a_inf_ + e_);
    num2_ = theta_.eval(-a_inf_ - e_);
    build_nodes();
  }

  const ThetaFunction& theta() const { return theta_; }

  /// C_j(y,t), j = 1..g, stored with a leading zero so that index j matches
  /// the cut Gamma_j (C_0 = 0 on Gamma_0).  Affine in (y,t); the log branch
  /// of the weight phases is frozen to the principal value at construction.
  Eigen::VectorXcd c_vector(double y, double t) const {
    int g = model_->genus();
    Eigen::VectorXcd c(g + 1);
    c[0] = 0;
    for (int j = 1; j <= g; ++j)
      c[j] = (y * gf_->omega_y()[j] + t * gf_->omega_t()[j] + c_const_[j]) /
             (2 * kPi);
    return c;
  }

  /// Constant jump matrix on Gamma_j for the explicit RH problem.
  Eigen::Matrix2cd jump_matrix(int j, double y, double t) const {
    cplx cj = c_vector(y, t)[j];
    Eigen::Matrix2cd J;
    cplx i1(0, 1);
    J << 0, i1 * std::exp(-2 * kPi * i1 * cj), i1 * std::exp(2 * kPi * i1 * cj),
        0;
    return J;
  }

  /// The explicit theta-function solution of the constant-jump RH problem.
  Eigen::Matrix2cd M1(cplx lam, double y, double t, const Arc* arc = nullptr,
                      Side side = Side::plus) const {
    double margin = 1e300;
    return m1_impl(lam, y, t, arc, side, margin);
  }

  /// The closed-form scalars (m_1, m_2) as displayed, including the
  /// exp(-+ i pi C_g) factors.
  std::pair<cplx, cplx> m1m2(cplx lam, double y, double t,
                             const Arc* arc = nullptr,
                             Side side = Side::plus) const {
    double margin = 1e300;
    return m1m2_impl(lam, y, t, arc, side, margin);
  }

  /// M recovered by inverting the g-function transformation.
  Eigen::Matrix2cd M_full(cplx lam, double y, double t,
                          const Arc* arc = nullptr,
                          Side side = Side::plus) const {
    Eigen::Matrix2cd m1 = M1(lam, y, t, arc, side);
    cplx c0 = phase_c0(y, t);
    cplx d2 = weight_d2();
    cplx eg = std::exp(cplx(0, 1) * gf_->g_minus_theta(lam, y, t, arc, side));
    Eigen::Matrix2cd m;
    m(0, 0) = m1(0, 0) / (c0 * eg);
    m(0, 1) = m1(0, 1) * eg / (c0 * d2);
    m(1, 0) = m1(1, 0) * c0 * d2 / eg;
    m(1, 1) = m1(1, 1) * c0 * eg;
    return m;
  }

  /// u, x, q, m at one (y,t).  u = -F'(i)/F(i) with F = m_1 m_2 (the exact
  /// derivative form of the reconstruction limit); F'(i) by central
  /// differences with one Richardson step.
  SolutionSample reconstruct(double y, double t) const {
    double margin = 1e300;
    cplx i1(0, 1);
    // The divisor may contain (i, sheet 2) (it does for p = 0), making one
    // entry of M^(1) a 0/0 exactly at lambda = i and numerically noisy close
    // by.  Evaluate m_1, m_2, F and F' at i through Cauchy means over a
    // circle well away from the degeneracy: trapezoid sums converge
    // spectrally for analytic integrands, and the noise is not amplified.
    YtCtx yc = make_yt(y, t, margin);
    int nr = (int)ring_.size();
    cplx m1i = 0, m2i = 0, f0 = 0, fp = 0;
    for (int k = 0; k < nr; ++k) {
      auto [a, b] = m1m2_from(m1_node(ring_[k], yc, margin), y, t);
      m1i += a / double(nr);
      m2i += b / double(nr);
      f0 += a * b / double(nr);
      fp += a * b / (ring_phase_[k] * double(nr) * ring_radius_);
    }
    if (std::abs(f0) < model_->tol().denom_floor)
      throw error(errc::denominator_underflow, "m1(i) m2(i) vanishes");
    cplx uc = -fp / f0;

    cplx xc = y + std::log(m1i / m2i) +
              2.0 * i1 * (y * gf_->X_y() + t * gf_->X_t());
    // x is real: a 2 pi k residue in Im(log) marks a branch crossing; remove
    // the whole multiple, keep the remainder as the reality diagnostic
    double k = std::round(xc.imag() / (2 * kPi));
    xc -= 2.0 * kPi * i1 * k;

    // q = 1/beta_0 and m = eta_0/(i beta_0) from M(0), by the symmetric
    // Richardson limit (M(l)+M(-l))/2 at l = 1e-3, 5e-4
    auto msym = [&](int idx) {
      Eigen::Matrix2cd a = m_full_node(zero_[2 * idx], yc, y, t, margin);
      Eigen::Matrix2cd b = m_full_node(zero_[2 * idx + 1], yc, y, t, margin);
      return Eigen::Matrix2cd(0.5 * (a + b));
    };
    Eigen::Matrix2cd m0 =
        (4.0 * msym(0).array() - msym(1).array()).matrix() / 3.0;
    cplx beta0 = 0.5 * (m0(0, 0) + m0(1, 1));
    cplx eta0 = 0.5 * (m0(0, 1) + m0(1, 0));
    cplx qc = 1.0 / beta0;
    cplx mc = eta0 / (i1 * beta0);

    SolutionSample s;
    s.y = y;
    s.t = t;
    s.u = uc.real();
    s.x = xc.real();
    s.q = qc.real();
    s.m = mc.real();
    s.im_u = uc.imag();
    s.im_x = xc.imag();
    s.denom_margin = margin;
    double rt = model_->tol().reality_tol;
    if (std::abs(s.im_u) > rt || std::abs(s.im_x) > rt)
      throw error(errc::reality_violation,
                  "Im u = " + std::to_string(s.im_u) +
                      ", Im x = " + std::to_string(s.im_x) + " at y = " +
                      std::to_string(y) + ", t = " + std::to_string(t));
    return s;
  }

  /// Row-major grid: y is the outer loop, t the inner one.
  std::vector<SolutionSample> sample_grid(double y0, double y1, int ny,
                                          double t0, double t1, int nt) const {
    std::vector<SolutionSample> out;
    out.reserve((size_t)ny * nt);
    for (int iy = 0; iy < ny; ++iy) {
      double y = (ny == 1) ? y0 : y0 + (y1 - y0) * iy / (ny - 1);
      for (int it = 0; it < nt; ++it) {
        double t = (nt == 1) ? t0 : t0 + (t1 - t0) * it / (nt - 1);
        out.push_back(reconstruct(y, t));
      }
    }
    return out;
  }

  /// exp(-i/4 (y Omega_g^y + t Omega_g^t)) from the transformation.
  cplx phase_c0(double y, double t) const {
    int g = model_->genus();
    return std::exp(cplx(0, -0.25) *
                    (y * gf_->omega_y()[g] + t * gf_->omega_t()[g]));
  }

  /// d^2 for the conjugation diag(d, 1/d): d = sqrt(beta_1) e^{-i pi/4} for
  /// q != 0 but plain sqrt(alpha_p) for q = 0 (no extra phase in that case).
  cplx weight_d2() const {
    const auto& sp = model_->params();
    if (sp.q > 0) return cplx(0, -1) * sp.beta[0];
    return cplx(sp.alpha[sp.p - 1]);
  }

 private:
  // constant part of 2 pi C_j: the frozen i log(alpha, beta) phases and the
  // pi/2 offsets, per the eight (q != 0) or four (q = 0) index ranges
  void build_c_const() {
    const auto& sp = model_->params();
    int p = sp.p, q = sp.q, g = model_->genus();
    c_const_.setZero(g + 1);
    cplx i1(0, 1);
    auto la = [&](int j) { return std::log(cplx(sp.alpha[j - 1])); };
    auto lb = [&](int j) { return std::log(cplx(sp.beta[j - 1])); };
    for (int j = 1; j <= g; ++j) {
      cplx v;
      if (q > 0) {
        if (j <= q - 1) v = -i1 * (lb(j + 1) - lb(1));
        else if (j <= p + q - 1) v = -i1 * (la(p + q - j) - lb(1)) + kPi / 2;
        else if (j <= 2 * p + q - 1)
          v = i1 * (la(j - p - q + 1) + lb(1)) + kPi / 2;
        else if (j <= 2 * p + 2 * q - 1) v = i1 * (lb(1) + lb(2 * p + 2 * q - j));
        else if (j <= 2 * p + 3 * q - 1)
          v = -i1 * (lb(j - 2 * p - 2 * q + 1) - lb(1));
        else if (j <= 3 * p + 3 * q - 1)
          v = -i1 * (la(3 * p + 3 * q - j) - lb(1)) + kPi / 2;
        else if (j <= 4 * p + 3 * q - 1)
          v = i1 * (la(j - 3 * p - 3 * q + 1) + lb(1)) + kPi / 2;
        else v = i1 * (lb(1) + lb(4 * p + 4 * q - j));
      } else {
        // no pi/2 offsets here: the q = 0 conjugation diag(d, 1/d) carries no
        // e^{-i pi/4} phase, so the weight phases enter the jump constants
        // bare (conjugating the alpha jumps by d^2 = alpha_p sends the
        // Gamma_0 family to [[0,i],[i,0]] directly)
        if (j <= p - 1) v = -i1 * (la(p - j) - la(p));
        else if (j <= 2 * p - 1) v = i1 * (la(j - p + 1) + la(p));
        else if (j <= 3 * p - 1) v = -i1 * (la(3 * p - j) - la(p));
        else v = i1 * (la(j - 3 * p + 1) + la(p));
      }
      c_const_[j] = v;
    }
  }

  // lambda-only data for a fixed evaluation point: the Abel image, kappa, the
  // regular g-function parts (g - theta is (y/4) h_y + 2t h_t), and the four
  // (y,t)-independent entry denominators Theta(+-A +- e)
  struct LamNode {
    cplx lam;
    Eigen::VectorXcd A;
    cplx kappa, hy, ht;
    std::array<ThetaVal, 4> den;
    double dmargin = 0;
  };

  LamNode make_node(cplx lam) const {
    LamNode n;
    n.lam = lam;
    n.A = df_->abel(lam);
    n.kappa = kd_->kappa(lam);
    n.hy = gf_->h_y(lam);
    n.ht = gf_->h_t(lam);
    std::vector<ThetaVal> d =
        theta_.eval_batch({n.A + e_, -n.A + e_, n.A - e_, -n.A - e_});
    std::copy(d.begin(), d.end(), n.den.begin());
    n.dmargin = 1e300;
    for (const auto& d : n.den)
      n.dmargin = std::min(n.dmargin, std::abs(d.val) / theta_scale_);
    return n;
  }

  // the (y,t)-dependent part shared by all evaluation nodes: the jump
  // constants and the two normalizing prefactors (their numerators are cached)
  struct YtCtx {
    Eigen::VectorXcd C;
    cplx p1, p2;
  };

  YtCtx make_yt(double y, double t, double& margin) const {
    YtCtx c;
    c.C = c_vector(y, t).tail(model_->genus());
    std::vector<ThetaVal> d =
        theta_.eval_batch({a_inf_ + c.C + e_, -a_inf_ + c.C - e_});
    for (const ThetaVal& v : d) {
      double rel = std::abs(v.val) / theta_scale_;
      margin = std::min(margin, rel);
      if (rel < model_->tol().denom_floor)
        throw error(errc::denominator_underflow, "theta denominator underflow");
    }
    c.p1 = num1_.val / d[0].val * std::exp(num1_.logpref - d[0].logpref);
    c.p2 = num2_.val / d[1].val * std::exp(num2_.logpref - d[1].logpref);
    return c;
  }

  Eigen::Matrix2cd m1_node(const LamNode& n, const YtCtx& yc,
                           double& margin) const {
    margin = std::min(margin, n.dmargin);
    if (n.dmargin < model_->tol().denom_floor)
      throw error(errc::denominator_underflow, "theta denominator underflow");
    std::vector<ThetaVal> v =
        theta_.eval_batch({n.A + yc.C + e_, -n.A + yc.C + e_, n.A + yc.C - e_,
                           -n.A + yc.C - e_});
    auto rat = [&](int idx) {
      return v[idx].val / n.den[idx].val *
             std::exp(v[idx].logpref - n.den[idx].logpref);
    };
    cplx kp = n.kappa + 1.0 / n.kappa, km = n.kappa - 1.0 / n.kappa;
    Eigen::Matrix2cd m;
    m(0, 0) = 0.5 * yc.p1 * kp * rat(0);
    m(0, 1) = 0.5 * yc.p1 * km * rat(1);
    m(1, 0) = 0.5 * yc.p2 * km * rat(2);
    m(1, 1) = 0.5 * yc.p2 * kp * rat(3);
    return m;
  }

  // fixed reconstruction stencils: a Cauchy circle about i (kept away from
  // the cuts and from the divisor 0/0 points on the axis) and the symmetric
  // probes for the M(0) limit
  void build_nodes() {
    int nr = model_->tol().ring_nodes;
    double r = 0.4 * std::min(model_->distance_to_cuts(cplx(0, 1)), 1.0);
    ring_radius_ = r;
    ring_.resize(nr);
    ring_phase_.resize(nr);
    for (int k = 0; k < nr; ++k) {
      cplx ph = std::polar(1.0, 2 * kPi * (k + 0.5) / nr);
      ring_[k] = make_node(cplx(0, 1) + r * ph);
      ring_phase_[k] = ph;
    }
    int idx = 0;
    for (double l0 : {5e-4, 1e-3})
      for (double sgn : {1.0, -1.0}) zero_[idx++] = make_node(cplx(sgn * l0, 0));
  }

  Eigen::Matrix2cd m1_from(const Eigen::VectorXcd& A, cplx k, double y,
                           double t, double& margin) const {
    Eigen::VectorXcd C = c_vector(y, t).tail(model_->genus());
    cplx kp = k + 1.0 / k, km = k - 1.0 / k;
    // one batched pass: numerator/denominator pairs of the two normalizing
    // prefactors and the four entries.  The prefactors are the row limits at
    // infinity (kappa -> 1), 2 Theta(A_inf + C + e)/Theta(A_inf + e) and its
    // reflection, so M1(inf) = I exactly for the concrete representative of e
    std::vector<ThetaVal> v = theta_.eval_batch(
        {a_inf_ + e_, a_inf_ + C + e_, -a_inf_ - e_, -a_inf_ + C - e_,
         A + C + e_, A + e_, -A + C + e_, -A + e_, A + C - e_, A - e_,
         -A + C - e_, -A - e_});
    auto rat = [&](int num, int den) {
      double rel = std::abs(v[den].val) / theta_scale_;
      margin = std::min(margin, rel);
      if (rel < model_->tol().denom_floor)
        throw error(errc::denominator_underflow, "theta denominator underflow");
      return v[num].val / v[den].val * std::exp(v[num].logpref - v[den].logpref);
    };
    cplx p1 = rat(0, 1), p2 = rat(2, 3);
    Eigen::Matrix2cd m;
    m(0, 0) = 0.5 * p1 * kp * rat(4, 5);
    m(0, 1) = 0.5 * p1 * km * rat(6, 7);
    m(1, 0) = 0.5 * p2 * km * rat(8, 9);
    m(1, 1) = 0.5 * p2 * kp * rat(10, 11);
    return m;
  }

  Eigen::Matrix2cd m1_impl(cplx lam, double y, double t, const Arc* arc,
                           Side side, double& margin) const {
    return m1_from(df_->abel(lam, arc, side), kd_->kappa(lam, arc, side), y, t,
                   margin);
  }

  std::pair<cplx, cplx> m1m2_from(const Eigen::Matrix2cd& m, double y,
                                  double t) const {
    // the displayed -+ i exp(-+ i pi C_g) weights equal c0^2 d^2 and its
    // inverse; using the transformation factors directly keeps the row-sum
    // identity exact and sidesteps the branch of exp(i pi C_g)
    cplx w2 = phase_c0(y, t);
    w2 = w2 * w2 * weight_d2();
    return {m(0, 0) + w2 * m(1, 0), m(1, 1) + m(0, 1) / w2};
  }

  std::pair<cplx, cplx> m1m2_impl(cplx lam, double y, double t, const Arc* arc,
                                  Side side, double& margin) const {
    return m1m2_from(m1_impl(lam, y, t, arc, side, margin), y, t);
  }

  Eigen::Matrix2cd m_full_node(const LamNode& n, const YtCtx& yc, double y,
                               double t, double& margin) const {
    Eigen::Matrix2cd m1 = m1_node(n, yc, margin);
    cplx c0 = phase_c0(y, t);
    cplx d2 = weight_d2();
    cplx eg = std::exp(cplx(0, 1) * (0.25 * y * n.hy + 2.0 * t * n.ht));
    Eigen::Matrix2cd m;
    m(0, 0) = m1(0, 0) / (c0 * eg);
    m(0, 1) = m1(0, 1) * eg / (c0 * d2);
    m(1, 0) = m1(1, 0) * c0 * d2 / eg;
    m(1, 1) = m1(1, 1) * c0 * eg;
    return m;
  }

  const Differentials* df_;
  const GFunction* gf_;
  const KappaDivisor* kd_;
  const CurveModel* model_;
  ThetaFunction theta_;
  double theta_scale_ = 1;
  Eigen::VectorXcd a_inf_, e_, c_const_;
  ThetaVal num1_, num2_;
  std::vector<LamNode> ring_;
  std::vector<cplx> ring_phase_;
  double ring_radius_ = 0;
  std::array<LamNode, 4> zero_;
};

}  // namespace mchag

#endif
