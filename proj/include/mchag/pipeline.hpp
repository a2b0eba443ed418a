#ifndef MCHAG_PIPELINE_HPP
#define MCHAG_PIPELINE_HPP

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <openssl/evp.h>

#include "json.hpp"
#include "mchag/solution.hpp"

namespace mchag {

using json = nlohmann::ordered_json;

struct GridSpec {
  double y0 = -1, y1 = 1;
  int ny = 11;
  double t0 = -1, t1 = 1;
  int nt = 11;
};

/// Everything a run needs: spectral data, tolerance overrides, grid, cache.
struct RunConfig {
  SpectralParams params;
  Tolerances tol;
  QuadratureRule quad;
  GridSpec grid;
  std::string cache_dir = ".mchag-cache";
};

namespace detail {

inline double get_num(const json& j, const std::string& field) {
  if (!j.contains(field))
    throw error(errc::config_error, "missing field '" + field + "'");
  if (!j[field].is_number())
    throw error(errc::config_error, "field '" + field + "' must be a number");
  return j[field].get<double>();
}

inline double opt_num(const json& j, const std::string& field, double dflt) {
  return j.contains(field) ? get_num(j, field) : dflt;
}

inline std::vector<double> get_vec(const json& j, const std::string& field) {
  if (!j.contains(field)) return {};
  if (!j[field].is_array())
    throw error(errc::config_error, "field '" + field + "' must be an array");
  std::vector<double> v;
  for (const auto& x : j[field]) {
    if (!x.is_number())
      throw error(errc::config_error,
                  "field '" + field + "' has a non-numeric entry");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  RunConfig cfg;
  if (!j.is_object())
    throw error(errc::config_error, "config root must be an object");
  cfg.params.p = (int)detail::get_num(j, "p");
  cfg.params.q = (int)detail::get_num(j, "q");
  cfg.params.c = detail::get_vec(j, "c");
  cfg.params.d = detail::get_vec(j, "d");
  cfg.params.a = detail::get_vec(j, "a");
  cfg.params.b = detail::get_vec(j, "b");
  cfg.params.alpha = detail::get_vec(j, "alpha");
  cfg.params.beta = detail::get_vec(j, "beta");
  validate(cfg.params);

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    Tolerances& tol = cfg.tol;
    tol.theta_tol = detail::opt_num(t, "theta_tol", tol.theta_tol);
    tol.reality_tol = detail::opt_num(t, "reality_tol", tol.reality_tol);
    tol.jump_tol = detail::opt_num(t, "jump_tol", tol.jump_tol);
    tol.fd_step = detail::opt_num(t, "fd_step", tol.fd_step);
    tol.b_symmetry = detail::opt_num(t, "b_symmetry", tol.b_symmetry);
    tol.denom_floor = detail::opt_num(t, "denom_floor", tol.denom_floor);
    tol.nodes_per_panel =
        (int)detail::opt_num(t, "nodes_per_panel", tol.nodes_per_panel);
    tol.max_depth = (int)detail::opt_num(t, "max_depth", tol.max_depth);
    tol.ring_nodes = (int)detail::opt_num(t, "ring_nodes", tol.ring_nodes);
    if (tol.theta_tol < 1e-14 || tol.theta_tol > 1e-6)
      throw error(errc::config_error, "theta_tol must be in [1e-14, 1e-6]");
    if (tol.nodes_per_panel < 16 || tol.nodes_per_panel > 4096)
      throw error(errc::config_error, "nodes_per_panel must be in [16, 4096]");
    if (tol.max_depth < 0 || tol.max_depth > 20)
      throw error(errc::config_error, "max_depth must be in [0, 20]");
    if (tol.ring_nodes < 8 || tol.ring_nodes > 512)
      throw error(errc::config_error, "ring_nodes must be in [8, 512]");
  }

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    cfg.quad.nodes = (int)detail::opt_num(q, "nodes", cfg.quad.nodes);
    cfg.quad.smooth_nodes =
        (int)detail::opt_num(q, "smooth_nodes", cfg.quad.smooth_nodes);
    cfg.quad.max_depth = (int)detail::opt_num(q, "max_depth", cfg.quad.max_depth);
    if (cfg.quad.nodes < 16 || cfg.quad.nodes > 4096 ||
        cfg.quad.smooth_nodes < 16 || cfg.quad.smooth_nodes > 4096)
      throw error(errc::config_error, "quadrature nodes must be in [16, 4096]");
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    cfg.grid.y0 = detail::opt_num(g, "y0", cfg.grid.y0);
    cfg.grid.y1 = detail::opt_num(g, "y1", cfg.grid.y1);
    cfg.grid.ny = (int)detail::opt_num(g, "ny", cfg.grid.ny);
    cfg.grid.t0 = detail::opt_num(g, "t0", cfg.grid.t0);
    cfg.grid.t1 = detail::opt_num(g, "t1", cfg.grid.t1);
    cfg.grid.nt = (int)detail::opt_num(g, "nt", cfg.grid.nt);
    if (cfg.grid.ny < 1 || cfg.grid.nt < 1)
      throw error(errc::config_error, "grid counts must be >= 1");
  }

  if (j.contains("cache_dir")) {
    if (!j["cache_dir"].is_string())
      throw error(errc::config_error, "cache_dir must be a string");
    cfg.cache_dir = j["cache_dir"].get<std::string>();
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::config_error, "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw error(errc::config_error, std::string("JSON parse: ") + ex.what());
  }
  return parse_config(j);
}

/// Canonical serialization of the part of the config that determines the
/// period data: spectral parameters, quadrature, theta tolerance.  The grid
/// and output options deliberately do not enter.
inline std::string canonical_period_key(const RunConfig& cfg) {
  json j;
  j["p"] = cfg.params.p;
  j["q"] = cfg.params.q;
  auto put = [&](const char* k, const std::vector<double>& v) {
    json arr = json::array();
    char buf[32];
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      arr.push_back(std::string(buf));
    }
    j[k] = arr;
  };
  put("c", cfg.params.c);
  put("d", cfg.params.d);
  put("a", cfg.params.a);
  put("b", cfg.params.b);
  put("alpha", cfg.params.alpha);
  put("beta", cfg.params.beta);
  j["nodes"] = cfg.quad.nodes;
  j["smooth_nodes"] = cfg.quad.smooth_nodes;
  j["nodes_per_panel"] = cfg.tol.nodes_per_panel;
  j["max_depth"] = cfg.tol.max_depth;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", cfg.tol.theta_tol);
  j["theta_tol"] = std::string(buf);
  return j.dump();
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string fingerprint(const RunConfig& cfg) {
  return sha256_hex(canonical_period_key(cfg));
}

/// Cache directory: environment override beats the config value.
inline std::filesystem::path cache_directory(const RunConfig& cfg) {
  if (const char* env = std::getenv("MCHAG_CACHE_DIR"); env && *env)
    return env;
  return cfg.cache_dir;
}

inline std::filesystem::path cache_path(const RunConfig& cfg) {
  return cache_directory(cfg) / ("periods-" + fingerprint(cfg) + ".json");
}

/// Write-temp-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error(errc::config_error, "cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

/// The full evaluation pipeline for one configuration.
struct Context {
  CurveModel cm;
  Cycles cy;
  Differentials df;
  GFunction gf;
  KappaDivisor kd;
  Solution sol;
  explicit Context(const SpectralParams& sp, const Tolerances& tol = {},
                   const QuadratureRule& rule = {})
      : cm(sp, tol),
        cy(cm, rule),
        df(cm, cy),
        gf(df, cy),
        kd(df),
        sol(df, gf, kd) {}
  explicit Context(const RunConfig& cfg)
      : Context(cfg.params, cfg.tol, cfg.quad) {}
};

namespace detail {

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json vec_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(cplx_json(v[i]));
  return a;
}

inline json mat_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(cplx_json(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

inline cplx cplx_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw error(errc::config_error, "complex entries must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Eigen::VectorXcd vec_from(const json& j) {
  Eigen::VectorXcd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = cplx_from(j[i]);
  return v;
}

inline Eigen::MatrixXcd mat_from(const json& j) {
  int n = (int)j.size();
  int m = n ? (int)j[0].size() : 0;
  Eigen::MatrixXcd out(n, m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) out(i, k) = cplx_from(j[i][k]);
  return out;
}

}  // namespace detail

/// Serialized period-level data: everything that is expensive relative to
/// grid sampling and depends only on the canonical key.
inline json period_data_json(const RunConfig& cfg, const Context& ctx) {
  json j;
  j["format"] = "mchag-period-data";
  j["version"] = 1;
  j["fingerprint"] = fingerprint(cfg);
  j["genus"] = ctx.cm.genus();
  j["B"] = detail::mat_json(ctx.df.periods().B);
  j["riemann_constants"] = detail::vec_json(ctx.df.periods().K);
  j["abel_infinity"] = detail::vec_json(ctx.df.abel_infinity());
  j["omega_y"] = detail::vec_json(ctx.gf.omega_y());
  j["omega_t"] = detail::vec_json(ctx.gf.omega_t());
  j["X_y"] = detail::cplx_json(ctx.gf.X_y());
  j["X_t"] = detail::cplx_json(ctx.gf.X_t());
  j["e"] = detail::vec_json(ctx.kd.e());
  json div = json::array();
  for (const auto& pt : ctx.kd.divisor()) {
    json d;
    d["lambda"] = detail::cplx_json(pt.lambda);
    d["sheet"] = pt.sheet;
    d["at_infinity"] = pt.at_infinity;
    div.push_back(d);
  }
  j["divisor"] = div;
  return j;
}

/// Load a cached period document if it exists, matches the fingerprint, and
/// parses cleanly; returns nothing (caller recomputes) otherwise.
inline std::optional<json> load_period_cache(const RunConfig& cfg,
                                             std::string* note = nullptr) {
  std::filesystem::path path = cache_path(cfg);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    json j = json::parse(in);
    if (j.value("format", "") != "mchag-period-data" ||
        j.value("fingerprint", "") != fingerprint(cfg)) {
      if (note) *note = "cache file " + path.string() + " has a stale key";
      return std::nullopt;
    }
    return j;
  } catch (const std::exception& ex) {
    if (note)
      *note = "cache file " + path.string() + " is corrupt (" + ex.what() +
              "), recomputing";
    return std::nullopt;
  }
}

}  // namespace mchag

#endif
