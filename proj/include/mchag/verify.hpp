#ifndef MCHAG_VERIFY_HPP
#define MCHAG_VERIFY_HPP

#include <random>
#include <string>
#include <vector>

#include "mchag/pipeline.hpp"

namespace mchag {

/// One gate: observed value is always stored, never just the boolean.
/// `upper` gates pass when observed < tolerance; negative controls invert it.
struct CheckRecord {
  std::string name;
  double tolerance = 0;
  double observed = 0;
  bool pass = false;
  bool hard = true;
};

struct VerificationReport {
  int version = 1;
  std::string fingerprint;
  std::string level;
  std::vector<CheckRecord> checks;
  std::vector<std::string> notes;

  CheckRecord& upper(const std::string& name, double tol, double obs,
                     bool hard = true) {
    checks.push_back({name, tol, obs, obs < tol, hard});
    return checks.back();
  }
  /// negative control: the gate must FAIL loudly, so pass means observed > tol
  CheckRecord& lower(const std::string& name, double tol, double obs) {
    checks.push_back({name, tol, obs, obs > tol, true});
    return checks.back();
  }

  bool overall() const {
    for (const auto& c : checks)
      if (c.hard && !c.pass) return false;
    return true;
  }

  json to_json() const {
    json j;
    j["format"] = "mchag-verification-report";
    j["version"] = version;
    j["fingerprint"] = fingerprint;
    j["level"] = level;
    j["overall_pass"] = overall();
    json arr = json::array();
    for (const auto& c : checks) {
      json r;
      r["name"] = c.name;
      r["tolerance"] = c.tolerance;
      r["observed"] = c.observed;
      r["pass"] = c.pass;
      r["hard"] = c.hard;
      arr.push_back(r);
    }
    j["checks"] = arr;
    j["notes"] = notes;
    return j;
  }
};

/// Runs the certification gates against a fully built Context.  quick =
/// periods + theta + divisor + one-point RH checks; full adds the second
/// (y,t), symmetry quadruples, endpoint probes, convergence re-solve, and
/// the grid PDE certificate.
class Verifier {
 public:
  Verifier(const Context& ctx, const RunConfig& cfg) : ctx_(&ctx), cfg_(cfg) {}

  VerificationReport run(bool full) const {
    VerificationReport rep;
    rep.fingerprint = fingerprint(cfg_);
    rep.level = full ? "full" : "quick";
    verify_periods(rep, full);
    verify_theta(rep);
    verify_divisor(rep);
    verify_rhp(rep, full);
    if (full) verify_pde(rep);
    return rep;
  }

  void verify_periods(VerificationReport& rep, bool full) const {
    const auto& ps = ctx_->df.periods();
    int g = ctx_->cm.genus();
    rep.upper("periods.b_symmetry",
              ctx_->cm.tol().b_symmetry,
              (ps.B - ps.B.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (ps.B.imag() + ps.B.imag().transpose()));
    double min_eig = es.eigenvalues().minCoeff();
    rep.upper("periods.im_positivity", 0.0, -min_eig);
    rep.upper("periods.b_normalization",
              ctx_->cm.tol().lin_residual,
              (ps.raw_b * ps.coeff - Eigen::MatrixXcd::Identity(g, g))
                  .cwiseAbs()
                  .maxCoeff());

    // g - theta tends to the linear-in-(y,t) constant built from the last
    // jump constants: exactly via the regularized values at infinity, and to
    // O(1/lambda) at the reference point
    double y = 0.7, t = 0.3;
    cplx target = 0.25 * (y * ctx_->gf.omega_y()[g] + t * ctx_->gf.omega_t()[g]);
    cplx exact = 0.25 * y * ctx_->gf.h_y_infinity() +
                 2.0 * t * ctx_->gf.h_t_infinity();
    rep.upper("periods.g_minus_theta_limit", 1e-9, std::abs(exact - target));
    cplx at_ref =
        ctx_->gf.g_minus_theta(cplx(ctx_->cm.tol().lambda_ref, 0), y, t);
    rep.upper("periods.g_minus_theta_at_lambda_ref", 1e-6,
              std::abs(at_ref - target));

    // negative control: flipping the first a-cycle orientation perturbs every
    // column of B by the same vector and must wreck the symmetry gate
    Eigen::MatrixXcd bad = ps.B;
    for (int j = 0; j < g; ++j) bad.col(j) -= 2.0 * ps.a_period.row(0).transpose();
    rep.lower("periods.negative_control_a_flip_breaks_symmetry", 1e-3,
              (bad - bad.transpose()).cwiseAbs().maxCoeff());

    if (full) {
      // convergence oracle: re-solve the periods with doubled quadrature
      QuadratureRule fine = cfg_.quad;
      fine.nodes *= 2;
      fine.smooth_nodes *= 2;
      CurveModel cm2(ctx_->cm.params(), ctx_->cm.tol());
      Cycles cy2(cm2, fine);
      Differentials df2(cm2, cy2);
      rep.upper("periods.quadrature_convergence", 1e-9,
                (df2.periods().B - ps.B).cwiseAbs().maxCoeff());
    }
  }

  void verify_theta(VerificationReport& rep) const {
    const ThetaFunction& th = ctx_->sol.theta();
    int g = ctx_->cm.genus();
    const Eigen::MatrixXcd& B = ctx_->df.periods().B;
    std::mt19937 rng(414213562);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double tol = 10 * ctx_->cm.tol().theta_tol;
    double worst_even = 0, worst_per = 0, worst_quasi = 0;
    for (int rep_i = 0; rep_i < 50; ++rep_i) {
      Eigen::VectorXcd z(g);
      for (int k = 0; k < g; ++k) z[k] = cplx(uni(rng), 0.3 * uni(rng));
      cplx v = th(z);
      double scale = std::max(1.0, std::abs(v));
      worst_even = std::max(worst_even, std::abs(v - th((-z).eval())) / scale);
      int k = rep_i % g;
      Eigen::VectorXcd zi = z;
      zi[k] += 1.0;
      worst_per = std::max(worst_per, std::abs(v - th(zi)) / scale);
      Eigen::VectorXcd zb = z + B.col(k);
      cplx factor =
          std::exp(-cplx(0, kPi) * B(k, k) - cplx(0, 2 * kPi) * z[k]);
      worst_quasi = std::max(
          worst_quasi, std::abs(th(zb) - factor * v) /
                           std::max(scale, std::abs(factor * v)));
    }
    rep.upper("theta.evenness", tol, worst_even);
    rep.upper("theta.integer_periodicity", tol, worst_per);
    rep.upper("theta.quasi_periodicity", tol, worst_quasi);

    // synthetic oracle at genus 1 with B = i: direct lattice sum
    Eigen::MatrixXcd b1(1, 1);
    b1(0, 0) = cplx(0, 1);
    ThetaFunction th1(b1, ctx_->cm.tol().theta_tol);
    cplx direct(0);
    for (int n = -40; n <= 40; ++n)
      direct += std::exp(-kPi * double(n) * double(n));
    rep.upper("theta.genus1_oracle", 1e-12,
              std::abs(th1(Eigen::VectorXcd::Zero(1)) - direct));
  }

  void verify_divisor(VerificationReport& rep) const {
    const auto& div = ctx_->kd.divisor();
    const ThetaFunction& th = ctx_->sol.theta();
    double scale = std::abs(th(Eigen::VectorXcd::Zero(ctx_->cm.genus())));
    rep.upper("divisor.count",
              0.5,
              std::abs((double)div.size() - ctx_->cm.genus()));
    auto abel_of = [&](const DivisorPoint& pt) {
      Eigen::VectorXcd a = pt.at_infinity ? ctx_->df.abel_infinity()
                                          : ctx_->df.abel(pt.lambda);
      return pt.sheet == 1 ? a : Eigen::VectorXcd(-a);
    };
    // the lattice-reduced argument keeps the quasi-periodic prefactor out of
    // the magnitude comparison
    auto vanish = [&](const DivisorPoint& pt) {
      Eigen::VectorXcd arg =
          ctx_->df.lattice_reduce((abel_of(pt) - ctx_->kd.e_raw()).eval());
      return std::abs(th.eval(arg).val) / scale;
    };
    double worst = 0;
    for (const auto& pt : div) worst = std::max(worst, vanish(pt));
    rep.upper("divisor.riemann_vanishing", 1e-6, worst);

    // negative control: swap the first point's sheet; its Riemann-vanishing
    // argument moves off the theta divisor
    DivisorPoint swapped = div.front();
    swapped.sheet = 3 - swapped.sheet;
    rep.lower("divisor.negative_control_sheet_swap", 1e-3, vanish(swapped));
  }

  void verify_rhp(VerificationReport& rep, bool full) const {
    const Solution& sol = ctx_->sol;
    std::vector<std::pair<double, double>> pts = {{0.7, 0.3}};
    if (full) pts.push_back({0.0, 0.0});

    double worst_jump = 0, worst_end = 0;
    for (auto [y, t] : pts) {
      for (const auto& arc : ctx_->cm.arcs()) {
        Eigen::Matrix2cd J = sol.jump_matrix(arc.index, y, t);
        auto residual = [&](double u) {
          Eigen::Matrix2cd mp = sol.M1(arc.point(u), y, t, &arc, Side::plus);
          Eigen::Matrix2cd mm = sol.M1(arc.point(u), y, t, &arc, Side::minus);
          return (mm * J - mp).norm();
        };
        for (double u : {0.12, 0.31, 0.5, 0.69, 0.88})
          worst_jump = std::max(worst_jump, residual(u));
        if (full) {
          // endpoint probes: ~1e-3 from each branch point along the arc; the
          // -1/4 singularity of the entries must cancel in the jump relation
          double len = std::abs(arc.end - arc.start);
          double eps = std::clamp(1e-3 / len, 1e-6, 0.49);
          worst_end = std::max({worst_end, residual(eps), residual(1 - eps)});
        }
      }
    }
    rep.upper("rhp.jump_residual", ctx_->cm.tol().jump_tol, worst_jump);
    if (full) rep.upper("rhp.endpoint_residual", 1e-5, worst_end);

    // normalization: M1 - I = c/lambda exactly, with |c| up to ~13 on these
    // curves; certify the magnitude at lambda_ref and the 1/lambda decay
    double lr = ctx_->cm.tol().lambda_ref;
    double worst_d6 = 0, worst_decay = 0, worst_det = 0;
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> uni(-2.5, 2.5);
    for (auto [y, t] : pts) {
      double d6 =
          (sol.M1(cplx(lr, 0), y, t) - Eigen::Matrix2cd::Identity()).norm();
      double d7 = (sol.M1(cplx(10 * lr, 0), y, t) -
                   Eigen::Matrix2cd::Identity())
                      .norm();
      worst_d6 = std::max(worst_d6, d6);
      worst_decay = std::max(worst_decay, d7 / std::max(d6, 1e-300));
      int found = 0;
      while (found < 8) {
        cplx z(uni(rng), uni(rng));
        if (ctx_->cm.distance_to_cuts(z) < 0.1 || std::abs(z) < 0.1) continue;
        ++found;
        worst_det =
            std::max(worst_det, std::abs(sol.M1(z, y, t).determinant() - 1.0));
      }
    }
    rep.upper("rhp.normalization_at_lambda_ref", 5e-5, worst_d6);
    rep.upper("rhp.normalization_decay_rate", 0.2, worst_decay);
    rep.upper("rhp.det_unimodular", 1e-9, worst_det);

    if (full) {
      // all three symmetries of the undressed M at symmetric quadruples
      Eigen::Matrix2cd s1, s2, s3;
      s1 << 0, 1, 1, 0;
      s2 << 0, cplx(0, -1), cplx(0, 1), 0;
      s3 << 1, 0, 0, -1;
      double y = 0.7, t = 0.3;
      auto msym = [&](double l0) {
        return Eigen::Matrix2cd(0.5 * (sol.M_full(cplx(l0, 0), y, t) +
                                       sol.M_full(cplx(-l0, 0), y, t)));
      };
      Eigen::Matrix2cd m0 =
          (4.0 * msym(5e-4).array() - msym(1e-3).array()).matrix() / 3.0;
      double worst_sym = 0;
      int found = 0;
      while (found < 10) {
        cplx z(uni(rng), uni(rng));
        double clear = std::min({ctx_->cm.distance_to_cuts(z),
                                 ctx_->cm.distance_to_cuts(-z),
                                 ctx_->cm.distance_to_cuts(std::conj(z)),
                                 ctx_->cm.distance_to_cuts(-1.0 / z)});
        if (clear < 0.1 || std::abs(z) < 0.3) continue;
        ++found;
        Eigen::Matrix2cd M = sol.M_full(z, y, t);
        worst_sym = std::max(
            {worst_sym,
             (M - s1 * sol.M_full(-z, y, t) * s1).norm(),
             (M - s2 * sol.M_full(std::conj(z), y, t).conjugate() * s2).norm(),
             (M - m0 * s3 * sol.M_full(-1.0 / z, y, t) * s3).norm()});
      }
      rep.upper("rhp.sym0_symmetries", 1e-6, worst_sym);
    }

    // negative control: jump matrices from a config with the first weight
    // perturbed by 10% cannot match the true boundary values
    SpectralParams bad = ctx_->cm.params();
    if (bad.q > 0) bad.beta[0] *= 1.1;
    else bad.alpha[0] *= 1.1;
    Context bad_ctx(bad, ctx_->cm.tol());
    double bad_res = 0;
    for (const auto& arc : ctx_->cm.arcs()) {
      Eigen::Matrix2cd J = bad_ctx.sol.jump_matrix(arc.index, 0.7, 0.3);
      cplx z = arc.point(0.5);
      Eigen::Matrix2cd mp = sol.M1(z, 0.7, 0.3, &arc, Side::plus);
      Eigen::Matrix2cd mm = sol.M1(z, 0.7, 0.3, &arc, Side::minus);
      bad_res = std::max(bad_res, (mm * J - mp).norm());
    }
    rep.lower("rhp.negative_control_weight_perturbation", 1e-3, bad_res);
  }

  void verify_pde(VerificationReport& rep) const {
    const Solution& sol = ctx_->sol;
    const GridSpec& gr = cfg_.grid;
    double h = ctx_->cm.tol().fd_step;
    double worst_im = 0, worst_qm = 0, worst_xy = 0, worst_r1 = 0,
           worst_r2 = 0;
    int unresolved = 0, total = 0;
    for (int iy = 0; iy < gr.ny; ++iy) {
      double y = (gr.ny == 1) ? gr.y0
                              : gr.y0 + (gr.y1 - gr.y0) * iy / (gr.ny - 1);
      for (int it = 0; it < gr.nt; ++it) {
        double t = (gr.nt == 1) ? gr.t0
                                : gr.t0 + (gr.t1 - gr.t0) * it / (gr.nt - 1);
        ++total;
        SolutionSample c = sol.reconstruct(y, t);
        SolutionSample yp = sol.reconstruct(y + h, t);
        SolutionSample ym = sol.reconstruct(y - h, t);
        worst_im = std::max({worst_im, std::abs(c.im_u), std::abs(c.im_x)});
        // relative to max(1, q^2): the subtraction is conditioned by q^2,
        // and q genuinely passes through poles for some configurations
        worst_qm = std::max(worst_qm, std::abs(c.q * c.q - c.m * c.m - 1) /
                                          std::max(1.0, c.q * c.q));
        worst_xy = std::max(
            worst_xy, std::abs((yp.x - ym.x) / (2 * h) * c.q - 1.0));

        // the FD residuals certify the PDE only where the O(h^2) stencil
        // resolves them: the Richardson error estimate |r_h - r_{h/2}|/3
        // must sit below half the gate; in the band around a q-pole line
        // the stencil truncation, not the solution, dominates the residual
        struct Stencil {
          double r1, r2, qt, uy, quyy;
        };
        auto residuals = [&](double hh) {
          Stencil s;
          s.qt = (sol.reconstruct(y, t + hh).q -
                  sol.reconstruct(y, t - hh).q) /
                 (2 * hh);
          SolutionSample ypl = sol.reconstruct(y + hh, t);
          SolutionSample yml = sol.reconstruct(y - hh, t);
          s.uy = (ypl.u - yml.u) / (2 * hh);
          s.r1 = std::abs(s.qt + 2 * c.q * c.q * c.m * s.uy) /
                 std::max(1.0, std::abs(s.qt));
          double uyp = (sol.reconstruct(y + 2 * hh, t).u - c.u) / (2 * hh);
          double uym = (c.u - sol.reconstruct(y - 2 * hh, t).u) / (2 * hh);
          s.quyy = (ypl.q * uyp - yml.q * uym) / (2 * hh);
          s.r2 = std::abs(c.m - (c.u - c.q * s.quyy)) /
                 std::max(1.0, std::abs(c.m));
          return s;
        };
        Stencil sh = residuals(h);
        Stencil sf = residuals(h / 2);
        if (std::abs(sh.r1 - sf.r1) / 3 > 0.5e-4 ||
            std::abs(sh.r2 - sf.r2) / 3 > 0.5e-4) {
          ++unresolved;
          continue;
        }
        worst_r1 = std::max(worst_r1, sf.r1);
        worst_r2 = std::max(worst_r2, sf.r2);
      }
    }
    rep.upper("pde.reality", ctx_->cm.tol().reality_tol, worst_im);
    rep.upper("pde.q2_minus_m2", 1e-8, worst_qm);
    rep.upper("pde.x_change_of_variables", 1e-4, worst_xy);
    rep.upper("pde.residual_evolution", 1e-4, worst_r1);
    rep.upper("pde.residual_momentum", 1e-4, worst_r2);
    rep.upper("pde.unresolved_stencils", total / 3.0 + 1, (double)unresolved,
              false);
    if (unresolved)
      rep.notes.push_back(std::to_string(unresolved) + " of " +
                          std::to_string(total) +
                          " grid points sit too close to a q pole for the "
                          "finite-difference stencil and are excluded from "
                          "the residual gates");

    // FD order oracle: halving h shrinks both residuals by about 4
    double y = 0.1, t = 0.2;
    auto res_at = [&](double hh) {
      SolutionSample c = sol.reconstruct(y, t);
      double qt = (sol.reconstruct(y, t + hh).q -
                   sol.reconstruct(y, t - hh).q) /
                  (2 * hh);
      double uy = (sol.reconstruct(y + hh, t).u -
                   sol.reconstruct(y - hh, t).u) /
                  (2 * hh);
      return std::abs(qt + 2 * c.q * c.q * c.m * uy);
    };
    double rh = res_at(h), rh2 = res_at(h / 2);
    rep.upper("pde.residual_h_scaling", 0.4, rh2 / std::max(rh, 1e-14));
  }

 private:
  const Context* ctx_;
  RunConfig cfg_;
};

}  // namespace mchag

#endif
