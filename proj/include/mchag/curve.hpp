#ifndef MCHAG_CURVE_HPP
#define MCHAG_CURVE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mchag/params.hpp"
#include "mchag/series.hpp"

namespace mchag {

inline constexpr double kPi = 3.14159265358979323846;

enum class ArcKind { imaginary_segment, unit_circle_arc };
enum class Side { plus, minus };

/// One oriented branch cut.  Segments run start -> end in a straight line;
/// circle arcs run clockwise (decreasing argument) from start to end on |z|=1.
struct Arc {
  int index = 0;
  ArcKind kind = ArcKind::imaginary_segment;
  cplx start, end;
  double arg_start = 0, arg_end = 0;  // circle arcs only, arg_start > arg_end

  cplx point(double s) const {
    if (kind == ArcKind::imaginary_segment) return start + s * (end - start);
    double a = arg_start + s * (arg_end - arg_start);
    return std::polar(1.0, a);
  }
  cplx tangent(double s) const {
    if (kind == ArcKind::imaginary_segment) return end - start;
    double a = arg_start + s * (arg_end - arg_start);
    return cplx(0, 1) * std::polar(1.0, a) * (arg_end - arg_start);
  }
  /// Unit normal on the plus (left-of-orientation) side.
  cplx plus_normal(double s) const {
    cplx t = tangent(s);
    cplx n = cplx(0, 1) * t;
    return n / std::abs(n);
  }
  double length() const {
    if (kind == ArcKind::imaginary_segment) return std::abs(end - start);
    return std::abs(arg_start - arg_end);
  }
  double distance(cplx z) const {
    if (kind == ArcKind::imaginary_segment) {
      cplx d = end - start;
      double t = std::clamp(((z - start) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
      return std::abs(z - (start + t * d));
    }
    double a = std::arg(z);
    // the arc ranges used here never wrap across the +-pi line interior
    if (a <= arg_start && a >= arg_end) return std::abs(std::abs(z) - 1.0);
    return std::min(std::abs(z - start), std::abs(z - end));
  }
};

namespace detail {

// Does the straight segment [u,v] intersect the arc (interior or endpoints)?
inline bool segment_hits_arc(cplx u, cplx v, const Arc& arc, double clearance) {
  // coarse sampling plus distance check: robust for the short steps we use
  const int n = 32;
  for (int i = 0; i <= n; ++i) {
    double t = double(i) / n;
    if (arc.distance(u + t * (v - u)) < clearance) return true;
  }
  // sign-change test against the carrier (line Re z = 0 or circle |z| = 1)
  if (arc.kind == ArcKind::imaginary_segment) {
    if ((u.real() > 0) != (v.real() > 0)) {
      double t = u.real() / (u.real() - v.real());
      cplx x = u + t * (v - u);
      if (arc.distance(x) < clearance * 2) return true;
      // exact: x on the imaginary axis, inside the cut's span?
      double lo = std::min(arc.start.imag(), arc.end.imag());
      double hi = std::max(arc.start.imag(), arc.end.imag());
      if (x.imag() > lo - clearance && x.imag() < hi + clearance) return true;
    }
  } else {
    if ((std::abs(u) > 1) != (std::abs(v) > 1)) {
      // bisect for the circle crossing
      cplx a = u, b = v;
      for (int k = 0; k < 60; ++k) {
        cplx m = 0.5 * (a + b);
        if ((std::abs(a) > 1) == (std::abs(m) > 1)) a = m; else b = m;
      }
      double ang = std::arg(0.5 * (a + b));
      if (ang < arc.arg_start + clearance && ang > arc.arg_end - clearance) return true;
    }
  }
  return false;
}

}  // namespace detail

/// The hyperelliptic curve: branch cuts, defining polynomial and the sheet-1
/// square root R(lambda) evaluated by analytic continuation from lambda_ref.
class CurveModel {
 public:
  CurveModel(const SpectralParams& sp, Tolerances tol = {})
      : params_(validate(sp)), tol_(tol) {
    build_contour();
    build_poly();
    r_out_ = 3.0;
    if (params_.q > 0) r_out_ = 2.0 / params_.a[0] + 1.0;
    lambda_ref_ = tol_.lambda_ref;
  }

  const SpectralParams& params() const { return params_; }
  const Tolerances& tol() const { return tol_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<cplx>& branch_points() const { return branch_points_; }
  int genus() const { return params_.genus(); }
  const Poly& defining_poly() const { return poly_; }  // R(lambda)^2
  double lambda_ref() const { return lambda_ref_; }
  double outer_radius() const { return r_out_; }

  cplx poly_value(cplx z) const { return poly_eval(poly_, z); }

  double distance_to_cuts(cplx z) const {
    double d = 1e300;
    for (const auto& a : arcs_) d = std::min(d, a.distance(z));
    return d;
  }

  double branch_clearance(cplx z) const {
    double d = 1e300;
    for (cplx bp : branch_points_) d = std::min(d, std::abs(z - bp));
    return d;
  }

  /// Waypoints of a cut-avoiding polyline from lambda_ref to z.  If `side` is
  /// given, z may lie on a cut: the approach comes in from that side of `arc`.
  std::vector<cplx> route(cplx z, const Arc* arc = nullptr,
                          Side side = Side::plus) const {
    cplx z_goal = z;
    std::vector<cplx> tail;
    if (arc) {
      // stage a point clearly off the cut on the requested side
      double s = nearest_param(*arc, z);
      cplx n = arc->plus_normal(s);
      if (side == Side::minus) n = -n;
      double off = 1e-3 * std::max(0.05, arc->length());
      z_goal = z + off * n;
      tail.push_back(z);
    } else if (distance_to_cuts(z) < tol_.snap_tol) {
      throw error(errc::on_cut, "target on a branch cut without a side hint");
    }
    std::vector<cplx> w = route_off_cut(z_goal);
    for (cplx t : tail) w.push_back(t);
    return w;
  }

  /// R on the requested sheet at z (not on a cut).
  cplx eval_R(cplx z, int sheet = 1) const {
    std::vector<cplx> path = route(z);
    cplx r = continue_R(path);
    return sheet == 1 ? r : -r;
  }

  /// Boundary value of sheet-1 R on a cut, from the requested side.
  cplx eval_R_boundary(const Arc& arc, double s, Side side) const {
    cplx z = arc.point(s);
    std::vector<cplx> path = route(z, &arc, side);
    return continue_R(path);
  }

  /// Continue R along an explicit polyline (first point must be reachable by
  /// route()); returns R at every point of `pts`.
  std::vector<cplx> track_R(const std::vector<cplx>& pts, const Arc* arc = nullptr,
                            Side side = Side::plus) const {
    std::vector<cplx> head = route(pts.front(), arc, side);
    cplx w = anchor_log();
    cplx prev = head.front();
    for (size_t i = 1; i < head.size(); ++i) step_log(prev, w, head[i]);
    std::vector<cplx> out(pts.size());
    out[0] = std::exp(0.5 * w);
    for (size_t i = 1; i < pts.size(); ++i) {
      step_log(prev, w, pts[i]);
      out[i] = std::exp(0.5 * w);
    }
    return out;
  }

  /// log P(lambda_ref), real by construction.
  cplx anchor_log() const { return std::log(poly_eval(poly_, cplx(lambda_ref_, 0))); }

  /// One continuation step of log P from `from` (accumulated log w) to `to`,
  /// with adaptive halving; updates from and w in place.  A step is also kept
  /// short relative to its distance from the branch points: the endpoint
  /// ratio alone cannot see a full phase turn picked up when a long chord
  /// sweeps past several zeros of P, and would alias it away silently.
  void step_log(cplx& from, cplx& w, cplx to, int depth = 0) const {
    if (depth > 60)
      throw error(errc::continuation_failed,
                  "argument increment not resolved near " + std::to_string(to.real()) +
                      "+" + std::to_string(to.imag()) + "i");
    double clear =
        std::max(1e-12, std::min(branch_clearance(from), branch_clearance(to)));
    if (std::abs(to - from) <= 0.25 * clear) {
      cplx ratio = poly_eval(poly_, to) / poly_eval(poly_, from);
      double da = std::abs(std::arg(ratio));
      if (da < kPi / 2 && std::abs(std::log(std::abs(ratio))) < 1.0) {
        w += std::log(ratio);
        from = to;
        return;
      }
    }
    cplx mid = 0.5 * (from + to);
    step_log(from, w, mid, depth + 1);
    step_log(from, w, to, depth + 1);
  }

  /// Safe angle near phi: outside every circle-arc angular range.
  double safe_angle(double phi) const {
    struct Range { double lo, hi; };
    std::vector<Range> blocked;
    for (int l = 0; l < params_.p; ++l) {
      double c = params_.c[l], d = params_.d[l];
      blocked.push_back({c, d});
      blocked.push_back({kPi - d, kPi - c});
      blocked.push_back({-d, -c});
      blocked.push_back({-kPi + c, -kPi + d});
    }
    for (const auto& r : blocked) {
      double m = std::min(0.02, 0.45 * (r.hi - r.lo));
      if (phi > r.lo - 1e-12 && phi < r.hi + 1e-12) {
        double mid = 0.5 * (r.lo + r.hi);
        return (phi <= mid) ? r.lo - m : r.hi + m;
      }
    }
    return phi;
  }

 private:
  void build_contour() {
    const int p = params_.p, q = params_.q;
    const auto& a = params_.a;
    const auto& b = params_.b;
    const auto& c = params_.c;
    const auto& d = params_.d;
    auto seg = [](int j, double y0, double y1) {  // oriented upward: y0 < y1
      Arc arc;
      arc.index = j;
      arc.kind = ArcKind::imaginary_segment;
      arc.start = cplx(0, y0);
      arc.end = cplx(0, y1);
      return arc;
    };
    auto circ = [](int j, double alo, double ahi) {  // oriented clockwise
      Arc arc;
      arc.index = j;
      arc.kind = ArcKind::unit_circle_arc;
      arc.arg_start = ahi;
      arc.arg_end = alo;
      arc.start = std::polar(1.0, ahi);
      arc.end = std::polar(1.0, alo);
      return arc;
    };
    arcs_.clear();
    for (int j = 0; j < q; ++j) arcs_.push_back(seg(j, 1.0 / b[j], 1.0 / a[j]));
    for (int j = q; j < p + q; ++j) {
      int l = q + p - j;  // 1-based
      arcs_.push_back(circ(j, kPi - d[l - 1], kPi - c[l - 1]));
    }
    for (int j = p + q; j < 2 * p + q; ++j) {
      int l = j - p - q + 1;
      arcs_.push_back(circ(j, -kPi + c[l - 1], -kPi + d[l - 1]));
    }
    for (int j = 2 * p + q; j < 2 * p + 2 * q; ++j) {
      int k = 2 * p + 2 * q - j;
      arcs_.push_back(seg(j, -b[k - 1], -a[k - 1]));
    }
    for (int j = 2 * p + 2 * q; j < 2 * p + 3 * q; ++j) {
      int k = j - 2 * p - 2 * q + 1;
      arcs_.push_back(seg(j, a[k - 1], b[k - 1]));
    }
    for (int j = 2 * p + 3 * q; j < 3 * p + 3 * q; ++j) {
      int l = 3 * q + 3 * p - j - 2 * q;  // c_{3q+3p-j} with the paper's index
      l = 3 * p + 3 * q - j;
      arcs_.push_back(circ(j, c[l - 1], d[l - 1]));
    }
    for (int j = 3 * p + 3 * q; j < 4 * p + 3 * q; ++j) {
      int l = j - 3 * p - 3 * q + 1;
      arcs_.push_back(circ(j, -d[l - 1], -c[l - 1]));
    }
    for (int j = 4 * p + 3 * q; j < 4 * p + 4 * q; ++j) {
      int k = 4 * p + 4 * q - j;
      arcs_.push_back(seg(j, -1.0 / a[k - 1], -1.0 / b[k - 1]));
    }
    branch_points_.clear();
    for (const auto& arc : arcs_) {
      branch_points_.push_back(arc.start);
      branch_points_.push_back(arc.end);
    }
  }

  // R^2 as a polynomial.  The q-factors carry +(a^2+a^-2): that sign is forced
  // by the branch points +-i a, +-i/a sitting at the imaginary cut endpoints.
  void build_poly() {
    poly_ = Poly{cplx(1)};
    auto quart = [&](cplx mid) { return Poly{cplx(1), cplx(0), mid, cplx(0), cplx(1)}; };
    for (int l = 0; l < params_.p; ++l) {
      poly_ = poly_mul(poly_, quart(-2 * std::cos(2 * params_.c[l])));
      poly_ = poly_mul(poly_, quart(-2 * std::cos(2 * params_.d[l])));
    }
    for (int j = 0; j < params_.q; ++j) {
      double a = params_.a[j], b = params_.b[j];
      poly_ = poly_mul(poly_, quart(a * a + 1.0 / (a * a)));
      poly_ = poly_mul(poly_, quart(b * b + 1.0 / (b * b)));
    }
  }

  static double nearest_param(const Arc& arc, cplx z) {
    double best = 0, bd = 1e300;
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
      double s = double(i) / n;
      double d = std::abs(z - arc.point(s));
      if (d < bd) { bd = d; best = s; }
    }
    return best;
  }

  std::vector<cplx> route_off_cut(cplx z) const {
    std::vector<cplx> w;
    w.push_back(cplx(lambda_ref_, 0));
    double rz = std::abs(z);
    double phi = std::arg(z);
    double phis = safe_angle(phi);
    // descending exactly along the imaginary axis would run through the
    // segment cuts: shift to the side the target lies on
    for (double axis : {kPi / 2, -kPi / 2}) {
      if (std::abs(phis - axis) < 1e-4) {
        double dir = (phi >= axis) ? 1.0 : -1.0;
        phis = axis + dir * 1e-4;
      }
    }
    double r_hi = std::max(r_out_, rz);
    w.push_back(cplx(r_hi, 0));
    // big arc at radius r_hi from angle 0 to phis, short chords
    append_arc(w, r_hi, 0.0, phis, kPi / 24);
    // radial descent to |z|
    if (std::abs(rz - r_hi) > 1e-14) w.push_back(std::polar(rz, phis));
    // final swing at radius |z| from phis to phi
    if (std::abs(phi - phis) > 1e-14) {
      double step = kPi / 36;
      if (std::abs(rz - 1.0) < 0.1)
        step = std::min(step, std::sqrt(2.0 * std::max(std::abs(rz - 1.0), 1e-6) / rz));
      append_arc(w, rz, phis, phi, step);
    }
    if (std::abs(w.back() - z) > 1e-14) w.push_back(z);
    return w;
  }

  static void append_arc(std::vector<cplx>& w, double r, double a0, double a1,
                         double max_step) {
    int n = std::max(1, (int)std::ceil(std::abs(a1 - a0) / max_step));
    for (int i = 1; i <= n; ++i)
      w.push_back(std::polar(r, a0 + (a1 - a0) * i / n));
  }

  cplx continue_R(const std::vector<cplx>& path) const {
    cplx w = anchor_log();
    cplx prev = path.front();
    for (size_t i = 1; i < path.size(); ++i) step_log(prev, w, path[i]);
    return std::exp(0.5 * w);
  }

  SpectralParams params_;
  Tolerances tol_;
  std::vector<Arc> arcs_;
  std::vector<cplx> branch_points_;
  Poly poly_;
  double r_out_ = 3.0;
  double lambda_ref_ = 1e6;
};

}  // namespace mchag

#endif
