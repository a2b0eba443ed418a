#include "doctest.h"
#include "mchag/verify.hpp"

using namespace mchag;

namespace {

RunConfig config(int which) {
  RunConfig cfg;
  if (which == 0) {
    cfg.params.p = 1;
    cfg.params.c = {0.4};
    cfg.params.d = {0.9};
    cfg.params.alpha = {1.5};
  } else {
    cfg.params.q = 1;
    cfg.params.a = {0.4};
    cfg.params.b = {0.7};
    cfg.params.beta = {2.0};
  }
  return cfg;
}

struct Run {
  RunConfig cfg;
  Context ctx;
  VerificationReport rep;
  explicit Run(int which)
      : cfg(config(which)),
        ctx(cfg),
        rep(Verifier(ctx, cfg).run(false)) {}
};

Run& run(int which) {
  static Run r0(0), r1(1);
  return which == 0 ? r0 : r1;
}

const CheckRecord& find(const VerificationReport& rep, const std::string& n) {
  for (const auto& c : rep.checks)
    if (c.name == n) return c;
  REQUIRE_MESSAGE(false, "missing check ", n);
  static CheckRecord dummy;
  return dummy;
}

}  // namespace

TEST_CASE("quick verification passes for both spectral families") {
  for (int w : {0, 1}) {
    const VerificationReport& rep = run(w).rep;
    CHECK(rep.overall());
    for (const auto& c : rep.checks) {
      INFO(c.name, " observed ", c.observed, " tolerance ", c.tolerance);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("negative controls fail their targeted gate loudly") {
  for (int w : {0, 1}) {
    const VerificationReport& rep = run(w).rep;
    CHECK(find(rep, "periods.negative_control_a_flip_breaks_symmetry").observed >
          0.1);
    CHECK(find(rep, "divisor.negative_control_sheet_swap").observed > 0.1);
    CHECK(find(rep, "rhp.negative_control_weight_perturbation").observed >
          0.1);
    // and the untampered versions of the same quantities stay tiny
    CHECK(find(rep, "periods.b_symmetry").observed < 1e-10);
    CHECK(find(rep, "divisor.riemann_vanishing").observed < 1e-8);
    CHECK(find(rep, "rhp.jump_residual").observed < 1e-8);
  }
}

TEST_CASE("report stores observed values and serializes to JSON") {
  const VerificationReport& rep = run(0).rep;
  json j = rep.to_json();
  CHECK(j["format"] == "mchag-verification-report");
  CHECK(j["level"] == "quick");
  CHECK(j["overall_pass"] == true);
  CHECK(j["fingerprint"].get<std::string>().size() == 64);
  REQUIRE(j["checks"].size() == rep.checks.size());
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("observed"));
    CHECK(c["observed"].is_number());
  }
}

TEST_CASE("verification is reproducible: identical observed values") {
  const Run& r = run(0);
  VerificationReport again = Verifier(r.ctx, r.cfg).run(false);
  REQUIRE(again.checks.size() == r.rep.checks.size());
  for (size_t i = 0; i < again.checks.size(); ++i) {
    CHECK(again.checks[i].name == r.rep.checks[i].name);
    CHECK(again.checks[i].observed == r.rep.checks[i].observed);
  }
}

TEST_CASE("overall status: any hard failure flips it, soft ones do not") {
  VerificationReport rep;
  rep.upper("a", 1.0, 0.5);
  CHECK(rep.overall());
  rep.upper("b", 1.0, 2.0, false);
  CHECK(rep.overall());
  rep.upper("c", 1.0, 2.0);
  CHECK(!rep.overall());
}
