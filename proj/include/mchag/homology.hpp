#ifndef MCHAG_HOMOLOGY_HPP
#define MCHAG_HOMOLOGY_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>
#include <vector>

#include "mchag/curve.hpp"
#include "mchag/quadrature.hpp"

namespace mchag {

enum class Sing { none, at_start, at_end, both };

/// One geometric piece of an integration path, centered-arc or straight.
struct PathSeg {
  bool is_arc = false;
  cplx a, b;            // straight: endpoints
  double r = 0, t0 = 0, t1 = 0;  // arc about 0: radius, angles
  cplx point(double s) const {
    if (!is_arc) return a + s * (b - a);
    return std::polar(r, t0 + s * (t1 - t0));
  }
  cplx deriv(double s) const {
    if (!is_arc) return b - a;
    return cplx(0, 1) * (t1 - t0) * std::polar(r, t0 + s * (t1 - t0));
  }
};

/// Sampled leg: nodes in path order with weights (integral = sum w_k f(z_k))
/// and the tracked sheet-1 (or plus-side) value of R at each node.
struct Leg {
  std::vector<cplx> z, w, R;
};

struct Chain {
  std::vector<Leg> legs;
  double factor = 1.0;  // 2 for the cut/gap reductions of full cycles
  std::string label;

  template <class F>
  cplx integrate(F&& f) const {
    cplx s(0);
    for (const auto& leg : legs)
      for (size_t k = 0; k < leg.z.size(); ++k)
        s += leg.w[k] * f(leg.z[k], leg.R[k]);
    return factor * s;
  }
};

namespace detail {

inline Leg sample_seg(const PathSeg& seg, int n, Sing sing) {
  Leg leg;
  if (sing == Sing::both) {
    std::vector<double> u;
    double wc;
    gauss_chebyshev(n, u, wc);
    // ascending s
    for (int k = n - 1; k >= 0; --k) {
      double s = 0.5 * (u[k] + 1.0);
      leg.z.push_back(seg.point(s));
      leg.w.push_back(wc * std::sqrt(1.0 - u[k] * u[k]) * 0.5 * seg.deriv(s));
    }
  } else if (sing == Sing::none) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int k = 0; k < n; ++k) {
      double s = 0.5 * (x[k] + 1.0);
      leg.z.push_back(seg.point(s));
      leg.w.push_back(0.5 * w[k] * seg.deriv(s));
    }
  } else {
    // square-root substitution at the singular end
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    for (int k = 0; k < n; ++k) {
      double v = 0.5 * (x[k] + 1.0);
      double s = (sing == Sing::at_start) ? v * v : 1.0 - v * v;
      double jac = 2.0 * v * 0.5 * w[k];  // |ds| = 2v dv, dv = dx/2
      leg.z.push_back(seg.point(s));
      leg.w.push_back(jac * seg.deriv(s));
    }
    if (sing == Sing::at_end) {
      // nodes came out descending in s; restore path order
      std::reverse(leg.z.begin(), leg.z.end());
      std::reverse(leg.w.begin(), leg.w.end());
    }
  }
  return leg;
}

inline void adapt_panels(const PathSeg& seg, double t0, double t1,
                         const std::vector<cplx>& bps, int depth,
                         std::vector<double>& cuts) {
  cplx a = seg.point(t0), m = seg.point(0.5 * (t0 + t1)), b = seg.point(t1);
  double len = std::abs(m - a) + std::abs(b - m);
  double d = 1e300;
  for (cplx bp : bps)
    d = std::min({d, std::abs(a - bp), std::abs(m - bp), std::abs(b - bp)});
  if (depth < 14 && len > 0.7 * d) {
    adapt_panels(seg, t0, 0.5 * (t0 + t1), bps, depth + 1, cuts);
    adapt_panels(seg, 0.5 * (t0 + t1), t1, bps, depth + 1, cuts);
  } else {
    cuts.push_back(t1);
  }
}

/// Composite rule with panel sizes adapted to the distance from the nearest
/// branch point, for legs that pass close to (but not through) them.
inline Leg sample_seg_adaptive(const PathSeg& seg, const std::vector<cplx>& bps,
                               int n_per_panel) {
  std::vector<double> cuts{0.0};
  adapt_panels(seg, 0.0, 1.0, bps, 0, cuts);
  std::vector<double> x, w;
  gauss_legendre(n_per_panel, x, w);
  Leg leg;
  for (size_t p = 0; p + 1 < cuts.size(); ++p) {
    double lo = cuts[p], h = cuts[p + 1] - cuts[p];
    for (int k = 0; k < n_per_panel; ++k) {
      double s = lo + 0.5 * (x[k] + 1.0) * h;
      leg.z.push_back(seg.point(s));
      leg.w.push_back(0.5 * w[k] * h * seg.deriv(s));
    }
  }
  return leg;
}

}  // namespace detail

/// Builds the concrete cycle realizations: b_j as twice the plus-boundary
/// integral over cut Gamma_j, a_j as twice the sheet-1 integral over the gap
/// path from Gamma_{j-1} to Gamma_j in the chain order of the cut table.
class Cycles {
 public:
  Cycles(const CurveModel& model, QuadratureRule rule = {})
      : model_(&model), rule_(rule) {
    build_gap_endpoints();
    build_b();
    build_a();
  }

  const CurveModel& model() const { return *model_; }
  const QuadratureRule& rule() const { return rule_; }
  /// b[j] encircles cut j, j = 0..4(p+q)-1 (the paper's basis uses 1..g).
  const std::vector<Chain>& b() const { return b_; }
  /// a[j-1] runs the gap between cuts j-1 and j, j = 1..g.
  const std::vector<Chain>& a() const { return a_; }
  /// Chain-adjacent endpoints: exit point of each cut and entry of the next.
  cplx gap_from(int j) const { return exit_[j - 1]; }
  cplx gap_to(int j) const { return entry_[j]; }
  const std::vector<PathSeg>& gap_segs(int j) const { return gap_paths_[j - 1]; }

  /// Sign convention for a-cycle traversal (fixed so that Im B > 0).
  static constexpr double a_sign = -1.0;

 private:
  void build_gap_endpoints() {
    const auto& arcs = model_->arcs();
    const auto& sp = model_->params();
    int n = (int)arcs.size();
    entry_.resize(n);
    exit_.resize(n);
    // The connected chain Gamma_0 -> gap -> Gamma_1 -> ... enters the cuts of
    // the first three index blocks (outer upper segments, second- and
    // third-quadrant arcs) and the last block at the arc `end`, the remaining
    // blocks at the arc `start`.
    for (int j = 0; j < n; ++j) {
      bool at_end = (j < 2 * sp.p + sp.q) || (j >= 4 * sp.p + 3 * sp.q);
      entry_[j] = at_end ? arcs[j].end : arcs[j].start;
      exit_[j] = at_end ? arcs[j].start : arcs[j].end;
    }
  }

  // Geometric gap path between exit of cut j-1 and entry of cut j.
  std::vector<PathSeg> gap_path(int j) const {
    const auto& sp = model_->params();
    cplx u = exit_[j - 1], v = entry_[j];
    std::vector<PathSeg> segs;
    auto line = [](cplx a, cplx b) {
      PathSeg s;
      s.a = a;
      s.b = b;
      return s;
    };
    auto arc0 = [](double r, double t0, double t1) {
      PathSeg s;
      s.is_arc = true;
      s.r = r;
      s.t0 = t0;
      s.t1 = t1;
      return s;
    };
    double rb = 0.45;  // bulge radius around the origin
    if (sp.q > 0) rb = 0.45 * sp.a[0];

    bool through_zero = false;
    {
      cplx d = v - u;
      double t = std::clamp((-(u * std::conj(d))).real() / std::norm(d), 0.0, 1.0);
      if (std::abs(u + t * d) < rb * 1.5) through_zero = true;
    }
    bool hemispheric = (u.real() == 0 && v.real() == 0 && u.imag() * v.imag() < 0 &&
                        std::abs(std::abs(u) - std::abs(v)) > 1e-12);

    if (hemispheric) {
      // p = 0 only.  The p -> 0 limit of the canonical chain runs the
      // outer-to-inner gap through the left half-plane and the inner-to-outer
      // one through the right.
      double ru = std::abs(u), rv = std::abs(v);
      double su = (u.imag() > 0) ? 1.0 : -1.0;
      double h = (ru > 1.0) ? -1.0 : 1.0;
      double mid = (h > 0) ? 0.0 : su * kPi;
      double s1 = su * (kPi / 2 - h * 0.35);
      double s2 = 2 * mid - s1;
      segs.push_back(line(u, std::polar(ru, s1)));
      segs.push_back(arc0(ru, s1, mid));
      segs.push_back(line(std::polar(ru, mid), std::polar(rv, mid)));
      segs.push_back(arc0(rv, mid, s2));
      segs.push_back(line(std::polar(rv, s2), v));
    } else if (through_zero) {
      cplx du = -u / std::abs(u), dv = -v / std::abs(v);  // toward 0
      cplx p1 = u + (std::abs(u) - rb) * du;              // radius rb, direction of u
      cplx p2 = v + (std::abs(v) - rb) * dv;
      double t0 = std::arg(p1), t1 = std::arg(p2);
      if (t1 < t0) t1 += 2 * kPi;          // counterclockwise half-turn
      if (t1 - t0 > kPi + 1e-9) {          // take the shorter closed side
        t1 -= 2 * kPi;
      }
      segs.push_back(line(u, p1));
      segs.push_back(arc0(rb, t0, t1));
      segs.push_back(line(p2, v));
    } else {
      segs.push_back(line(u, v));
    }
    return segs;
  }

  void build_b() {
    const auto& arcs = model_->arcs();
    b_.clear();
    for (const auto& arc : arcs) {
      PathSeg seg;
      if (arc.kind == ArcKind::imaginary_segment) {
        seg.a = arc.start;
        seg.b = arc.end;
      } else {
        seg.is_arc = true;
        seg.r = 1.0;
        seg.t0 = arc.arg_start;
        seg.t1 = arc.arg_end;
      }
      Leg leg = detail::sample_seg(seg, rule_.nodes, Sing::both);
      track(leg, &arc, Side::plus);
      Chain c;
      c.factor = 2.0;
      c.label = "b" + std::to_string(arc.index);
      c.legs.push_back(std::move(leg));
      b_.push_back(std::move(c));
    }
  }

  void build_a() {
    a_.clear();
    gap_paths_.clear();
    int n = (int)model_->arcs().size();
    for (int j = 1; j < n; ++j) {
      auto segs = gap_path(j);
      gap_paths_.push_back(segs);
      Chain c;
      c.factor = 2.0 * a_sign;
      c.label = "a" + std::to_string(j);
      for (size_t i = 0; i < segs.size(); ++i) {
        Sing s = Sing::none;
        if (segs.size() == 1) s = Sing::both;
        else if (i == 0) s = Sing::at_start;
        else if (i + 1 == segs.size()) s = Sing::at_end;
        int nn = (s == Sing::none) ? rule_.smooth_nodes : rule_.nodes;
        c.legs.push_back(detail::sample_seg(segs[i], nn, s));
      }
      track_chain(c);
      a_.push_back(std::move(c));
    }
  }

  // Continue R onto the nodes of a single on-cut leg (plus side).
  void track(Leg& leg, const Arc* arc, Side side) const {
    size_t mid = leg.z.size() / 2;
    std::vector<cplx> fwd(leg.z.begin() + mid, leg.z.end());
    leg.R = model_->track_R(fwd, arc, side);
    std::vector<cplx> back(leg.z.rend() - mid - 1, leg.z.rend());
    auto rb = model_->track_R(back, arc, side);
    std::vector<cplx> full(leg.z.size());
    for (size_t i = 0; i < fwd.size(); ++i) full[mid + i] = leg.R[i];
    for (size_t i = 0; i < back.size(); ++i) full[mid - i] = rb[i];
    leg.R = std::move(full);
  }

  // Continue R across all legs of a gap chain, anchored at the middle node.
  void track_chain(Chain& c) const {
    std::vector<cplx> all;
    for (const auto& l : c.legs) all.insert(all.end(), l.z.begin(), l.z.end());
    size_t mid = all.size() / 2;
    std::vector<cplx> fwd(all.begin() + mid, all.end());
    std::vector<cplx> back(all.rend() - mid - 1, all.rend());
    auto rf = model_->track_R(fwd);
    auto rb = model_->track_R(back);
    std::vector<cplx> full(all.size());
    for (size_t i = 0; i < fwd.size(); ++i) full[mid + i] = rf[i];
    for (size_t i = 0; i < back.size(); ++i) full[mid - i] = rb[i];
    size_t off = 0;
    for (auto& l : c.legs) {
      l.R.assign(full.begin() + off, full.begin() + off + l.z.size());
      off += l.z.size();
    }
  }

  const CurveModel* model_;
  QuadratureRule rule_;
  std::vector<Chain> b_, a_;
  std::vector<cplx> entry_, exit_;
  std::vector<std::vector<PathSeg>> gap_paths_;
};

}  // namespace mchag

#endif
