#ifndef MCHAG_THETA_HPP
#define MCHAG_THETA_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include "mchag/params.hpp"

namespace mchag {

/// Theta value in scaled form: theta = val * exp(logpref).  The prefactor
/// carries the quasi-periodicity exponential from argument reduction, which
/// can over- or underflow if expanded.
struct ThetaVal {
  cplx val{0};
  cplx logpref{0};
  cplx full() const { return val * std::exp(logpref); }
};

/// Riemann theta function with a fixed period matrix: the truncated lattice
/// sum is enumerated once (ellipsoid via Cholesky of Im B) and reused for
/// every evaluation after integer/B-lattice reduction of the argument.
class ThetaFunction {
 public:
  explicit ThetaFunction(const Eigen::MatrixXcd& B, double tau = 1e-10,
                         double max_terms = 1e9)
      : B_(B), g_((int)B.rows()), tau_(tau) {
    Eigen::MatrixXd Y = 0.5 * (B.imag() + B.imag().transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(Y);
    if (llt.info() != Eigen::Success)
      throw error(errc::not_riemann_matrix, "Im B not positive definite");
    Y_inv_ = Y.inverse();
    Eigen::MatrixXd R = llt.matrixU();  // Y = R^T R
    // worst-case displacement of the reduced center in the Y-metric
    double c_rad = 0;
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y);
      c_rad = 0.5 * std::sqrt(es.eigenvalues().maxCoeff() * g_);
    }
    tail_rad_ = std::sqrt(std::log(1.0 / tau) / kPi_) + 1.5;
    R_ = R;
    double rad = c_rad + tail_rad_;
    double count = 0;
    enumerate(R, rad, [&](const Eigen::VectorXi&) {
      if (++count > max_terms)
        throw error(errc::truncation_overflow, "theta lattice truncation");
    });
    // the enumeration emits lattice points in lexicographic order with the
    // first coordinates varying fastest; store the z-independent coefficient
    // exp(i pi <l, B l>) per point, so that an evaluation only multiplies
    // per-dimension powers of exp(2 pi i z_k) -- reusing the shared prefix
    // product of the slow dimensions between consecutive points.  The table
    // covers the worst-case reduced center, but a given argument only needs
    // the ball of radius |R c| + tail around the origin, so the points are
    // grouped into norm shells (lexicographic within each) and an evaluation
    // stops at the shell its own radius requires.
    std::vector<std::int16_t> raw;
    std::vector<float> norm;
    raw.reserve((size_t)count * g_);
    norm.reserve((size_t)count);
    lo_.assign(g_, 0);
    hi_.assign(g_, 0);
    enumerate(R, rad, [&](const Eigen::VectorXi& l) {
      Eigen::VectorXd rl = R * l.cast<double>();
      norm.push_back((float)rl.norm());
      for (int k = 0; k < g_; ++k) {
        raw.push_back((std::int16_t)l[k]);
        lo_[k] = std::min(lo_[k], l[k]);
        hi_[k] = std::max(hi_[k], l[k]);
      }
    });
    const size_t n = norm.size();
    const int n_shells = (int)std::ceil(rad / kShell_) + 1;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    auto shell_of = [&](std::uint32_t i) {
      return std::min(n_shells - 1, (int)(norm[i] / kShell_));
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return shell_of(a) < shell_of(b);
                     });
    shell_end_.assign(n_shells, 0);
    lat_.resize(n * g_);
    coef_.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const std::int16_t* src = raw.data() + (size_t)order[i] * g_;
      std::int16_t* dst = lat_.data() + i * g_;
      cplx q(0);
      for (int a = 0; a < g_; ++a) {
        dst[a] = src[a];
        for (int b = 0; b < g_; ++b)
          q += B_(a, b) * double(src[a]) * double(src[b]);
      }
      coef_[i] = std::exp(cplx(0, kPi_) * q);
      shell_end_[shell_of(order[i])] = i + 1;
    }
    for (int s = 1; s < n_shells; ++s)
      shell_end_[s] = std::max(shell_end_[s], shell_end_[s - 1]);
  }

  int genus() const { return g_; }
  size_t term_count() const { return coef_.size(); }
  const Eigen::MatrixXcd& B() const { return B_; }

  /// Batched evaluation: one pass over the coefficient table serves every
  /// argument, so a small batch costs little more than a single point.
  std::vector<ThetaVal> eval_batch(const std::vector<Eigen::VectorXcd>& zs) const {
    const int nb = (int)zs.size();
    std::vector<ThetaVal> out(nb);
    if (nb == 0) return out;

    // per-dimension power tables of w_k = exp(2 pi i z0_k), indexed by the
    // raw lattice coordinate via off[k] - lo_k
    std::vector<int> off(g_ + 1, 0);
    for (int k = 0; k < g_; ++k) off[k + 1] = off[k] + (hi_[k] - lo_[k] + 1);
    const int tab = off[g_];
    std::vector<cplx> pows((size_t)nb * tab);
    std::vector<double> cnorm(nb);
    for (int b = 0; b < nb; ++b) {
      // z = z0 + B n + m with the reduced z0 near the fundamental domain
      Eigen::VectorXd n = Y_inv_ * zs[b].imag();
      for (int k = 0; k < g_; ++k) n[k] = std::round(n[k]);
      Eigen::VectorXcd z0 = zs[b] - B_ * n;
      for (int k = 0; k < g_; ++k) z0[k] -= std::round(z0[k].real());
      // a term's magnitude is exp(-pi(|R(l-c)|^2 - |Rc|^2)) with the reduced
      // center c = Y^{-1} Im z0; the truncation below bounds each argument's
      // discarded tail per shell from its center norm
      cnorm[b] = (R_ * (Y_inv_ * z0.imag())).norm();
      cplx* p = pows.data() + (size_t)b * tab;
      for (int k = 0; k < g_; ++k) {
        cplx w = std::exp(cplx(0, 2 * kPi_) * z0[k]);
        cplx wi = std::exp(cplx(0, -2 * kPi_) * z0[k]);
        cplx* pk = p + off[k] - lo_[k];
        pk[0] = 1;
        for (int v = 1; v <= hi_[k]; ++v) pk[v] = pk[v - 1] * w;
        for (int v = -1; v >= lo_[k]; --v) pk[v] = pk[v + 1] * wi;
      }
      cplx nBn(0);
      for (int i = 0; i < g_; ++i)
        for (int j = 0; j < g_; ++j) nBn += B_(i, j) * n[i] * n[j];
      cplx nz(0);
      for (int k = 0; k < g_; ++k) nz += n[k] * z0[k];
      out[b].logpref = -cplx(0, kPi_) * nBn - cplx(0, 2 * kPi_) * nz;
    }

    // certified truncation, per argument: a term in shell s has magnitude at
    // most exp(-pi((r_s - c)^2 - c^2)) (r_s = shell inner radius) while the
    // generic theta scale is exp(pi c^2), so the discarded tail relative to
    // that scale is bounded by sum_s count_s exp(-pi(r_s - c)^2); drop the
    // outermost shells while the bound stays below tau -- the same relative
    // guarantee the table radius provides in the worst case, which remains
    // the fallback
    std::vector<size_t> cut(nb);
    for (int b = 0; b < nb; ++b) {
      size_t count = coef_.size();
      double tail = 0;
      for (int s = (int)shell_end_.size() - 1; s >= 1; --s) {
        double d = std::max(0.0, s * kShell_ - cnorm[b]);
        size_t cnt = shell_end_[s] - shell_end_[s - 1];
        tail += (double)cnt * std::exp(-kPi_ * d * d);
        if (tail > tau_) break;
        count = shell_end_[s - 1];
      }
      cut[b] = count;
    }
    // arguments ordered by cutoff, largest first: a pass over the shell-sorted
    // table keeps an active prefix of arguments and retires each one once the
    // term index passes its cutoff
    std::vector<int> ord(nb);
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(),
              [&](int a, int b) { return cut[a] > cut[b]; });
    const size_t count = cut[ord[0]];
    // the fastest dimension's power row, transposed to [value][element] so
    // the hot loop below reads contiguously across the active elements
    const int span0 = hi_[0] - lo_[0] + 1;
    std::vector<cplx> pw0((size_t)span0 * nb);
    for (int v = 0; v < span0; ++v)
      for (int j = 0; j < nb; ++j)
        pw0[(size_t)v * nb + j] = pows[(size_t)ord[j] * tab + off[0] + v];

    // plain sums within a chunk, Kahan-compensated across the fixed number of
    // chunks: rounding stays orders below tau while the inner loop stays
    // short, and the result is bit-identical whether the chunks run serially
    // or on threads; prefix products over the slow dimensions are reused
    // while the fast coordinates advance
    auto sum_range = [&](size_t i0, size_t i1, cplx* s) {
      std::vector<cplx> pref((size_t)nb * (g_ + 1), cplx(1));
      std::vector<cplx> pref0(nb, cplx(1));
      std::vector<std::int16_t> prev(g_, std::numeric_limits<std::int16_t>::min());
      int na = 0;
      while (na < nb && cut[ord[na]] > i0) ++na;
      const std::int16_t* l = lat_.data() + i0 * g_;
      for (size_t i = i0; i < i1; ++i, l += g_) {
        while (na > 0 && cut[ord[na - 1]] <= i) --na;
        if (na == 0) break;
        int d = g_ - 1;
        while (d >= 1 && l[d] == prev[d]) --d;
        if (d >= 1) {
          for (int j = 0; j < na; ++j) {
            cplx* pr = pref.data() + (size_t)j * (g_ + 1);
            const cplx* p = pows.data() + (size_t)ord[j] * tab;
            for (int k = std::min(d, g_ - 2); k >= 0; --k)
              pr[k] = pr[k + 1] * p[off[k + 1] + l[k + 1] - lo_[k + 1]];
            pref0[j] = pr[0];
          }
          for (int k = 1; k < g_; ++k) prev[k] = l[k];
        }
        const cplx c = coef_[i];
        const cplx* p0 = pw0.data() + (size_t)(l[0] - lo_[0]) * nb;
        for (int j = 0; j < na; ++j) s[j] += c * pref0[j] * p0[j];
      }
    };

    const int nc = count * (size_t)nb > (size_t)1 << 21 ? 16 : 1;
    std::vector<cplx> parts((size_t)nc * nb, cplx(0));
    if (nc == 1) {
      sum_range(0, count, parts.data());
    } else {
      const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
      const int nt = (int)std::min<unsigned>(hw, nc);
      std::vector<std::thread> pool;
      pool.reserve(nt);
      for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
          for (int c = t; c < nc; c += nt)
            sum_range(count * c / nc, count * (c + 1) / nc,
                      parts.data() + (size_t)c * nb);
        });
      for (auto& th : pool) th.join();
    }
    for (int j = 0; j < nb; ++j) {
      cplx s(0), comp(0);
      for (int c = 0; c < nc; ++c) {
        cplx term = parts[(size_t)c * nb + j];
        cplx t = s + (term - comp);
        comp = (t - s) - (term - comp);
        s = t;
      }
      out[ord[j]].val = s;
    }
    return out;
  }

  ThetaVal eval(const Eigen::VectorXcd& z) const { return eval_batch({z})[0]; }

  cplx operator()(const Eigen::VectorXcd& z) const { return eval(z).full(); }

 private:
  template <class F>
  void enumerate(const Eigen::MatrixXd& R, double rad, F&& emit) const {
    Eigen::VectorXi l = Eigen::VectorXi::Zero(g_);
    rec(R, rad * rad, g_ - 1, 0.0, l, emit);
  }

  template <class F>
  void rec(const Eigen::MatrixXd& R, double rad2, int k, double partial,
           Eigen::VectorXi& l, F&& emit) const {
    // R upper triangular: component k of R l is sum_{j>=k} R(k,j) l_j
    double shift = 0;
    for (int j = k + 1; j < g_; ++j) shift += R(k, j) * l[j];
    double room = rad2 - partial;
    if (room < 0) return;
    double half = std::sqrt(room) / R(k, k);
    int lo = (int)std::ceil(-half - shift / R(k, k));
    int hi = (int)std::floor(half - shift / R(k, k));
    for (int v = lo; v <= hi; ++v) {
      l[k] = v;
      double c = R(k, k) * v + shift;
      if (k == 0) {
        emit(l);
      } else {
        rec(R, rad2, k - 1, partial + c * c, l, emit);
      }
    }
    l[k] = 0;
  }

  static constexpr double kPi_ = 3.14159265358979323846;
  static constexpr double kShell_ = 0.25;
  Eigen::MatrixXcd B_;
  int g_;
  double tau_;
  double tail_rad_{0};
  Eigen::MatrixXd Y_inv_;
  Eigen::MatrixXd R_;
  std::vector<cplx> coef_;
  std::vector<std::int16_t> lat_;
  std::vector<size_t> shell_end_;
  std::vector<int> lo_, hi_;
};

}  // namespace mchag

#endif
