#include "doctest.h"
#include "mchag/kappa.hpp"
#include "mchag/theta.hpp"

using namespace mchag;

namespace {

SpectralParams pq10() {
  SpectralParams sp;
  sp.p = 1;
  sp.c = {0.4};
  sp.d = {0.9};
  sp.alpha = {1.5};
  return sp;
}

SpectralParams pq01() {
  SpectralParams sp;
  sp.q = 1;
  sp.a = {0.4};
  sp.b = {0.7};
  sp.beta = {2.0};
  return sp;
}

struct Stack {
  CurveModel cm;
  Cycles cy;
  Differentials df;
  KappaDivisor kd;
  explicit Stack(const SpectralParams& sp) : cm(sp), cy(cm), df(cm, cy), kd(df) {}
};

}  // namespace

TEST_CASE("kappa^4 factors vanish at the right cut endpoints") {
  // each cut must carry one numerator zero and one denominator zero
  for (auto sp : {pq10(), pq01()}) {
    CurveModel cm(sp);
    Cycles cy(cm);
    Differentials df(cm, cy);
    KappaDivisor kd(df);
    for (const auto& arc : cm.arcs()) {
      auto at = [&](const Poly& f, cplx z) { return std::abs(poly_eval(f, z)); };
      double ns = at(kd.numerator(), arc.start), ne = at(kd.numerator(), arc.end);
      double ds = at(kd.denominator(), arc.start), de = at(kd.denominator(), arc.end);
      // exactly one endpoint kills N, the other kills D
      bool n_at_start = ns < 1e-10;
      CHECK((ns < 1e-10) != (ne < 1e-10));
      CHECK((ds < 1e-10) != (de < 1e-10));
      CHECK((n_at_start ? de : ds) < 1e-10);
      CHECK((n_at_start ? ds : de) > 1e-3);
    }
  }
}

TEST_CASE("kappa is a quartic root of the ratio, normalized at infinity") {
  for (auto sp : {pq10(), pq01()}) {
    Stack s(sp);
    CHECK(std::abs(s.kd.kappa(cplx(1e4, 0)) - cplx(1)) < 1e-3);
    for (cplx z : {cplx(0.3, 0.2), cplx(-1.7, 0.4), cplx(0.1, -2.2), cplx(2.0, 2.0)}) {
      cplx k = s.kd.kappa(z);
      CHECK(std::abs(std::pow(k, 4) - s.kd.ratio(z)) <
            1e-10 * std::max(1.0, std::abs(s.kd.ratio(z))));
    }
  }
}

TEST_CASE("kappa is single-valued around every cut") {
  for (auto sp : {pq10(), pq01()}) {
    Stack s(sp);
    CHECK(s.kd.monodromy_defect() < 1e-9);
  }
}

TEST_CASE("boundary values jump by a factor +-i across each cut") {
  for (auto sp : {pq10(), pq01()}) {
    Stack s(sp);
    for (const auto& arc : s.cm.arcs()) {
      cplx r_prev(0);
      for (double t : {0.3, 0.6}) {
        cplx kp = s.kd.kappa(arc.point(t), &arc, Side::plus);
        cplx km = s.kd.kappa(arc.point(t), &arc, Side::minus);
        cplx r = kp / km;
        CHECK(std::abs(std::abs(r) - 1.0) < 1e-8);
        CHECK(std::abs(r.real()) < 1e-8);  // ratio is +-i
        if (r_prev != cplx(0)) CHECK(std::abs(r - r_prev) < 1e-8);
        r_prev = r;
      }
    }
  }
}

TEST_CASE("divisor: g simple roots of N = D with definite sheets") {
  for (auto sp : {pq10(), pq01()}) {
    Stack s(sp);
    const auto& dv = s.kd.divisor();
    REQUIRE((int)dv.size() == s.cm.genus());
    for (const auto& pt : dv) {
      if (pt.at_infinity) {
        CHECK(pt.sheet == 2);
        continue;
      }
      cplx n = poly_eval(s.kd.numerator(), pt.lambda);
      cplx d = poly_eval(s.kd.denominator(), pt.lambda);
      CHECK(std::abs(n - d) < 1e-9 * std::max(1.0, std::abs(n)));
      cplx k2 = pt.kappa * pt.kappa;
      cplx want = (pt.sheet == 1) ? cplx(-1) : cplx(1);
      CHECK(std::abs(k2 - want) < 1e-8);
    }
    // simple roots: pairwise distinct
    for (size_t i = 0; i < dv.size(); ++i)
      for (size_t j = i + 1; j < dv.size(); ++j)
        CHECK(std::abs(dv[i].lambda - dv[j].lambda) > 1e-6);
  }
}

TEST_CASE("theta vanishes on the divisor and nowhere generic") {
  for (auto sp : {pq10(), pq01()}) {
    Stack s(sp);
    ThetaFunction th(s.df.periods().B);
    for (const auto& pt : s.kd.divisor()) {
      Eigen::VectorXcd a =
          pt.at_infinity ? s.df.abel_infinity() : s.df.abel(pt.lambda);
      if (pt.sheet == 2) a = -a;
      ThetaVal v = th.eval((a - s.kd.e()).eval());
      CHECK(std::abs(v.val) < 1e-6);
    }
    // negative control: generic arguments stay well away from zero
    for (cplx z : {cplx(0.25, 0.35), cplx(-1.4, 0.6), cplx(0.8, -1.1)}) {
      Eigen::VectorXcd a = s.df.abel(z);
      ThetaVal v = th.eval((a - s.kd.e()).eval());
      CHECK(std::abs(v.val) > 1e-4);
    }
  }
}
