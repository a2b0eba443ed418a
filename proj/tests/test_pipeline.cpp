#include "doctest.h"
#include "mchag/pipeline.hpp"

#include <cstdlib>
#include <filesystem>

using namespace mchag;

namespace {

json base_config() {
  return json{{"p", 1},
              {"q", 0},
              {"c", {0.4}},
              {"d", {0.9}},
              {"alpha", {1.5}}};
}

}  // namespace

TEST_CASE("config parsing: valid, empty-spectrum, malformed") {
  RunConfig cfg = parse_config(base_config());
  CHECK(cfg.params.p == 1);
  CHECK(cfg.params.genus() == 3);
  CHECK(cfg.grid.ny == 11);

  json empty = {{"p", 0}, {"q", 0}};
  CHECK_THROWS_WITH_AS(parse_config(empty), "EmptySpectrum: p = q = 0", error);

  json bad = base_config();
  bad["c"] = {"oops"};
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const error& ex) {
    CHECK(ex.code() == errc::config_error);
    CHECK(std::string(ex.what()).find("'c'") != std::string::npos);
  }

  json missing = base_config();
  missing.erase("p");
  CHECK_THROWS_AS(parse_config(missing), error);
}

TEST_CASE("config parsing: tolerance and quadrature bounds") {
  json j = base_config();
  j["tolerances"] = {{"theta_tol", 1e-3}};
  CHECK_THROWS_AS(parse_config(j), error);
  j["tolerances"] = {{"theta_tol", 1e-12}};
  CHECK(parse_config(j).tol.theta_tol == 1e-12);

  j = base_config();
  j["quadrature"] = {{"nodes", 8}};
  CHECK_THROWS_AS(parse_config(j), error);
  j["quadrature"] = {{"nodes", 64}};
  CHECK(parse_config(j).quad.nodes == 64);
}

TEST_CASE("fingerprint keys on spectral + quadrature + tau, not grid") {
  RunConfig a = parse_config(base_config());
  RunConfig b = a;
  b.grid.ny = 99;
  b.cache_dir = "/elsewhere";
  CHECK(fingerprint(a) == fingerprint(b));

  RunConfig c = a;
  c.params.alpha = {1.5000001};
  CHECK(fingerprint(a) != fingerprint(c));
  RunConfig d = a;
  d.quad.nodes = 256;
  CHECK(fingerprint(a) != fingerprint(d));
  RunConfig e = a;
  e.tol.theta_tol = 1e-11;
  CHECK(fingerprint(a) != fingerprint(e));
  CHECK(fingerprint(a).size() == 64);
}

TEST_CASE("cache directory: env var override beats config") {
  RunConfig cfg = parse_config(base_config());
  cfg.cache_dir = "/from-config";
  unsetenv("MCHAG_CACHE_DIR");
  CHECK(cache_directory(cfg) == "/from-config");
  setenv("MCHAG_CACHE_DIR", "/from-env", 1);
  CHECK(cache_directory(cfg) == "/from-env");
  unsetenv("MCHAG_CACHE_DIR");
}

TEST_CASE("atomic write leaves no temp file and round-trips") {
  auto dir = std::filesystem::temp_directory_path() / "mchag-test-io";
  std::filesystem::remove_all(dir);
  auto path = dir / "x.json";
  atomic_write(path, "{\"k\":1}\n");
  std::ifstream in(path);
  std::string got((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  CHECK(got == "{\"k\":1}\n");
  CHECK(!std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("period data document round-trips through the cache") {
  RunConfig cfg = parse_config(base_config());
  auto dir = std::filesystem::temp_directory_path() / "mchag-test-cache";
  std::filesystem::remove_all(dir);
  cfg.cache_dir = dir.string();
  unsetenv("MCHAG_CACHE_DIR");

  CHECK(!load_period_cache(cfg).has_value());

  Context ctx(cfg);
  json doc = period_data_json(cfg, ctx);
  CHECK(doc["genus"] == 3);
  CHECK(doc["divisor"].size() == 3);
  atomic_write(cache_path(cfg), doc.dump(2) + "\n");

  auto hit = load_period_cache(cfg);
  REQUIRE(hit.has_value());
  Eigen::MatrixXcd B = detail::mat_from((*hit)["B"]);
  CHECK((B - ctx.df.periods().B).cwiseAbs().maxCoeff() == 0.0);

  // a different config must not hit this entry
  RunConfig other = cfg;
  other.params.alpha = {1.6};
  CHECK(!load_period_cache(other).has_value());

  // corruption is detected, reported, and treated as a miss
  atomic_write(cache_path(cfg), "{ not json");
  std::string note;
  CHECK(!load_period_cache(cfg, &note).has_value());
  CHECK(note.find("corrupt") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("complex serialization helpers round-trip") {
  Eigen::MatrixXcd m(2, 2);
  m << cplx(1, -2), cplx(0, 3), cplx(-4.5, 0), cplx(1e-15, 1e15);
  CHECK((detail::mat_from(detail::mat_json(m)) - m).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK_THROWS_AS(detail::cplx_from(json::array({1.0})), error);
}
