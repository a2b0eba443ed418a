#include "doctest.h"
#include "mchag/homology.hpp"

using namespace mchag;

static SpectralParams pq10() {
  SpectralParams sp;
  sp.p = 1;
  sp.c = {0.4};
  sp.d = {0.9};
  sp.alpha = {1.5};
  return sp;
}

static SpectralParams pq01() {
  SpectralParams sp;
  sp.q = 1;
  sp.a = {0.4};
  sp.b = {0.7};
  sp.beta = {2.0};
  return sp;
}

static SpectralParams pq11() {
  SpectralParams sp;
  sp.p = sp.q = 1;
  sp.c = {0.4};
  sp.d = {0.9};
  sp.a = {0.4};
  sp.b = {0.7};
  sp.alpha = {1.5};
  sp.beta = {2.0};
  return sp;
}

TEST_CASE("Chebyshev leg reproduces the arcsine integral") {
  PathSeg seg;
  seg.a = cplx(-1, 0);
  seg.b = cplx(1, 0);
  Leg leg = detail::sample_seg(seg, 64, Sing::both);
  cplx s(0);
  for (size_t k = 0; k < leg.z.size(); ++k)
    s += leg.w[k] / std::sqrt(cplx(1) - leg.z[k] * leg.z[k]);
  CHECK(std::abs(s - kPi) < 1e-13);
}

TEST_CASE("one-sided square-root substitution legs") {
  PathSeg seg;
  seg.a = cplx(0, 0);
  seg.b = cplx(1, 0);
  // int_0^1 dx/sqrt(x) = 2 with the singular end at the start
  Leg leg = detail::sample_seg(seg, 64, Sing::at_start);
  cplx s(0);
  for (size_t k = 0; k < leg.z.size(); ++k) s += leg.w[k] / std::sqrt(leg.z[k]);
  CHECK(std::abs(s - 2.0) < 1e-13);
  // int_0^1 dx/sqrt(1-x) = 2 with the singular end at the end
  leg = detail::sample_seg(seg, 64, Sing::at_end);
  s = cplx(0);
  for (size_t k = 0; k < leg.z.size(); ++k)
    s += leg.w[k] / std::sqrt(cplx(1) - leg.z[k]);
  CHECK(std::abs(s - 2.0) < 1e-13);
  // nodes must be in path order either way
  CHECK(leg.z.front().real() < leg.z.back().real());
}

TEST_CASE("circular legs integrate exactly") {
  PathSeg seg;
  seg.is_arc = true;
  seg.r = 2.0;
  seg.t0 = 0.3;
  seg.t1 = -1.1;
  Leg leg = detail::sample_seg(seg, 48, Sing::none);
  cplx s(0), s1(0);
  for (size_t k = 0; k < leg.z.size(); ++k) {
    s += leg.w[k] / leg.z[k];  // = i (t1 - t0)
    s1 += leg.w[k];            // = z(t1) - z(t0)
  }
  CHECK(std::abs(s - cplx(0, seg.t1 - seg.t0)) < 1e-13);
  CHECK(std::abs(s1 - (seg.point(1) - seg.point(0))) < 1e-13);
}

TEST_CASE("cycle construction: counts, endpoints, sheet consistency") {
  for (auto sp : {pq10(), pq01(), pq11()}) {
    CurveModel cm(sp);
    Cycles cy(cm);
    CHECK((int)cy.b().size() == sp.n_cuts());
    CHECK((int)cy.a().size() == sp.genus());
    // gap endpoints are branch points
    for (int j = 1; j < sp.n_cuts(); ++j) {
      double d0 = 1e300, d1 = 1e300;
      for (cplx bp : cm.branch_points()) {
        d0 = std::min(d0, std::abs(cy.gap_from(j) - bp));
        d1 = std::min(d1, std::abs(cy.gap_to(j) - bp));
      }
      CHECK(d0 < 1e-12);
      CHECK(d1 < 1e-12);
    }
    // every chain endpoint pairs up: entry_j adjacent to exit_{j-1}
    for (const auto& chain : cy.a()) {
      CHECK(!chain.legs.empty());
      for (const auto& leg : chain.legs) {
        for (size_t k = 0; k < leg.z.size(); k += 17) {
          cplx p = cm.poly_value(leg.z[k]);
          CHECK(std::abs(leg.R[k] * leg.R[k] - p) <
                1e-8 * std::max(1.0, std::abs(p)));
        }
      }
    }
    for (const auto& chain : cy.b()) {
      for (const auto& leg : chain.legs) {
        for (size_t k = 0; k < leg.z.size(); k += 17) {
          cplx p = cm.poly_value(leg.z[k]);
          CHECK(std::abs(leg.R[k] * leg.R[k] - p) <
                1e-8 * std::max(1.0, std::abs(p)));
        }
      }
    }
  }
}

TEST_CASE("gap legs avoid all non-adjacent cuts") {
  for (auto sp : {pq10(), pq01(), pq11()}) {
    CurveModel cm(sp);
    Cycles cy(cm);
    for (int j = 1; j < sp.n_cuts(); ++j) {
      for (const auto& seg : cy.gap_segs(j)) {
        for (const auto& arc : cm.arcs()) {
          if (arc.index == j || arc.index == j - 1) continue;
          const int n = 64;
          for (int i = 0; i <= n; ++i)
            CHECK(arc.distance(seg.point(double(i) / n)) > 1e-3);
        }
      }
    }
  }
}

// Oracle: the b-cycle reduction 2 * int_{Gamma_j,+} f dlambda must agree with
// a direct loop integral over a stadium contour encircling the cut, with R
// continued along the loop itself.
static cplx loop_integral_inv_R(const CurveModel& cm, const Arc& arc, double eps,
                                int n) {
  std::vector<cplx> pts;
  auto push_side = [&](int dir) {
    for (int k = 0; k <= n; ++k) {
      double t = double(k) / n;
      double s = 0.5 * (1.0 - std::cos(kPi * t));  // cluster toward endpoints
      if (dir < 0) s = 1.0 - s;
      cplx nrm = arc.plus_normal(s);
      pts.push_back(arc.point(s) + double(dir) * eps * nrm);
    }
  };
  auto push_cap = [&](double s_end, cplx from_dir) {
    cplx c = arc.point(s_end);
    double a0 = std::arg(from_dir);
    // rotate clockwise: both caps wrap around the outward extension of the
    // cut, keeping the loop off the cut span
    for (int k = 1; k < 48; ++k)
      pts.push_back(c + eps * std::polar(1.0, a0 - kPi * k / 48.0));
  };
  // plus side forward, cap at the end, minus side backward, cap at the start
  push_side(+1);
  push_cap(1.0, arc.plus_normal(1.0));
  push_side(-1);
  push_cap(0.0, -arc.plus_normal(0.0));
  pts.push_back(pts.front());
  auto R = cm.track_R(pts);
  cplx s(0);
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    cplx mid_f = 0.5 * (1.0 / R[k] + 1.0 / R[k + 1]);
    s += mid_f * (pts[k + 1] - pts[k]);
  }
  return s;
}

TEST_CASE("b-cycle reduction matches a direct loop integral") {
  for (auto sp : {pq10(), pq01()}) {
    CurveModel cm(sp);
    Cycles cy(cm);
    for (int j : {0, 1}) {
      cplx red = cy.b()[j].integrate([](cplx, cplx R) { return 1.0 / R; });
      cplx loop = loop_integral_inv_R(cm, cm.arcs()[j], 1e-4, 1500);
      // coarse tolerance: this certifies orientation and the factor 2, the
      // precision itself is covered by the refinement test below
      CHECK(std::abs(red - loop) < 1e-2 * std::max(1.0, std::abs(red)));
    }
  }
}

TEST_CASE("loop integral of an exact differential vanishes") {
  CurveModel cm(pq01());
  const Arc& arc = cm.arcs()[1];
  std::vector<cplx> pts;
  for (int k = 0; k <= 200; ++k) {
    double t = 2 * kPi * k / 200.0;
    pts.push_back(arc.point(0.5) + 0.05 * std::polar(1.0, t));
  }
  cplx s(0);
  for (size_t k = 0; k + 1 < pts.size(); ++k) s += pts[k + 1] - pts[k];
  CHECK(std::abs(s) < 1e-14);
}

TEST_CASE("a-cycle integrals self-converge under node refinement") {
  for (auto sp : {pq10(), pq01(), pq11()}) {
    CurveModel cm(sp);
    QuadratureRule r1, r2;
    r2.nodes = 192;
    r2.smooth_nodes = 96;
    Cycles c1(cm, r1), c2(cm, r2);
    auto f = [](cplx, cplx R) { return 1.0 / R; };
    for (int j = 0; j < sp.genus(); ++j) {
      cplx v1 = c1.a()[j].integrate(f);
      cplx v2 = c2.a()[j].integrate(f);
      CHECK(std::abs(v1 - v2) < 1e-9 * std::max(1.0, std::abs(v1)));
    }
    for (int j = 0; j < sp.n_cuts(); ++j) {
      cplx v1 = c1.b()[j].integrate(f);
      cplx v2 = c2.b()[j].integrate(f);
      CHECK(std::abs(v1 - v2) < 1e-9 * std::max(1.0, std::abs(v1)));
    }
  }
}
