#include "doctest.h"
#include "mchag/differentials.hpp"
#include "mchag/theta.hpp"

using namespace mchag;

static Eigen::MatrixXcd b_of_pq01() {
  SpectralParams sp;
  sp.q = 1;
  sp.a = {0.4};
  sp.b = {0.7};
  sp.beta = {2.0};
  CurveModel cm(sp);
  Cycles cy(cm);
  Differentials df(cm, cy);
  return df.periods().B;
}

TEST_CASE("genus 1 agrees with a direct Jacobi-type sum") {
  Eigen::MatrixXcd B(1, 1);
  B(0, 0) = cplx(0.3, 1.1);
  ThetaFunction th(B);
  for (cplx zv : {cplx(0.2, 0.1), cplx(-0.7, 0.4), cplx(3.2, -2.1)}) {
    Eigen::VectorXcd z(1);
    z << zv;
    cplx direct(0);
    for (int n = -60; n <= 60; ++n)
      direct += std::exp(cplx(0, kPi) * B(0, 0) * double(n) * double(n) +
                         cplx(0, 2 * kPi) * double(n) * zv);
    cplx v = th(z);
    CHECK(std::abs(v - direct) < 1e-9 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("evenness and quasi-periodicity on a genus-3 period matrix") {
  Eigen::MatrixXcd B = b_of_pq01();
  ThetaFunction th(B);
  int g = 3;
  Eigen::VectorXcd z(g);
  z << cplx(0.13, 0.21), cplx(-0.4, 0.05), cplx(0.33, -0.18);

  CHECK(std::abs(th(z) - th((-z).eval())) < 1e-10 * std::abs(th(z)));

  // integer shifts
  Eigen::VectorXcd m = Eigen::VectorXcd::Zero(g);
  m << cplx(2, 0), cplx(-1, 0), cplx(3, 0);
  CHECK(std::abs(th((z + m).eval()) - th(z)) < 1e-10 * std::abs(th(z)));

  // B-lattice shifts
  for (int k = 0; k < g; ++k) {
    Eigen::VectorXcd zs = z + B.col(k);
    cplx factor = std::exp(-cplx(0, kPi) * B(k, k) - cplx(0, 2 * kPi) * z[k]);
    cplx lhs = th(zs);
    cplx rhs = factor * th(z);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(std::abs(lhs), std::abs(rhs)));
  }
}

TEST_CASE("truncation tolerance refinement") {
  Eigen::MatrixXcd B = b_of_pq01();
  ThetaFunction coarse(B, 1e-8), fine(B, 1e-13);
  CHECK(fine.term_count() > coarse.term_count());
  Eigen::VectorXcd z(3);
  z << cplx(0.4, 0.8), cplx(0.1, -0.3), cplx(-0.2, 0.5);
  CHECK(std::abs(coarse(z) - fine(z)) < 1e-8);
}

TEST_CASE("scaled form keeps large reductions finite") {
  Eigen::MatrixXcd B = b_of_pq01();
  ThetaFunction th(B);
  Eigen::VectorXcd z(3);
  z << cplx(0.2, 80.0), cplx(-0.1, -55.0), cplx(0.05, 30.0);
  auto v = th.eval(z);
  CHECK(std::isfinite(std::abs(v.val)));
  CHECK(std::isfinite(v.logpref.real()));
  // the expanded value would overflow; the prefactor carries it
  CHECK(v.logpref.real() > 100.0);
}

TEST_CASE("absurd period matrix trips the truncation guard") {
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Identity(6, 6) * cplx(0, 1e-4);
  CHECK_THROWS_AS(ThetaFunction(B, 1e-10, 1e5), error);
}
