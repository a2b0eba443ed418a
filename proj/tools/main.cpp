#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mchag/verify.hpp"

using namespace mchag;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct GridOverrides {
  std::optional<double> y0, y1, t0, t1;
  std::optional<int> ny, nt;
  void apply(GridSpec& g) const {
    if (y0) g.y0 = *y0;
    if (y1) g.y1 = *y1;
    if (t0) g.t0 = *t0;
    if (t1) g.t1 = *t1;
    if (ny) g.ny = *ny;
    if (nt) g.nt = *nt;
  }
};

int cmd_validate(const std::string& config_path) {
  RunConfig cfg = load_config(config_path);
  std::printf("genus %d, %d cuts, OK\n", cfg.params.genus(),
              cfg.params.n_cuts());
  return 0;
}

int cmd_periods(const std::string& config_path, const std::string& out_path) {
  RunConfig cfg = load_config(config_path);
  std::string note;
  if (auto hit = load_period_cache(cfg, &note)) {
    std::fprintf(stderr, "periods: cache hit %s\n",
                 cache_path(cfg).string().c_str());
    if (!out_path.empty()) atomic_write(out_path, hit->dump(2) + "\n");
    bool ok = (*hit)["verification"].value("overall_pass", false);
    return ok ? 0 : 1;
  }
  if (!note.empty()) std::fprintf(stderr, "periods: %s\n", note.c_str());

  Context ctx(cfg);
  VerificationReport rep = Verifier(ctx, cfg).run(false);
  json doc = period_data_json(cfg, ctx);
  doc["verification"] = rep.to_json();
  std::string text = doc.dump(2) + "\n";
  atomic_write(cache_path(cfg), text);
  std::fprintf(stderr, "periods: wrote %s\n",
               cache_path(cfg).string().c_str());
  if (!out_path.empty()) atomic_write(out_path, text);
  return rep.overall() ? 0 : 1;
}

int cmd_sample(const std::string& config_path, const std::string& out_path,
               const std::string& format, const GridOverrides& go,
               bool coords_x) {
  RunConfig cfg = load_config(config_path);
  go.apply(cfg.grid);
  if (cfg.grid.ny < 1 || cfg.grid.nt < 1)
    throw error(errc::config_error, "grid counts must be >= 1");
  Context ctx(cfg);
  const GridSpec& gr = cfg.grid;

  struct Row {
    double y, t;
    SolutionSample s;
    std::string err;
  };
  std::vector<Row> rows;
  int failures = 0;
  for (int iy = 0; iy < gr.ny; ++iy) {
    double y =
        (gr.ny == 1) ? gr.y0 : gr.y0 + (gr.y1 - gr.y0) * iy / (gr.ny - 1);
    for (int it = 0; it < gr.nt; ++it) {
      double t =
          (gr.nt == 1) ? gr.t0 : gr.t0 + (gr.t1 - gr.t0) * it / (gr.nt - 1);
      Row r;
      r.y = y;
      r.t = t;
      try {
        r.s = ctx.sol.reconstruct(y, t);
      } catch (const error& ex) {
        r.err = ex.what();
        ++failures;
      }
      rows.push_back(std::move(r));
    }
  }

  std::ostringstream out;
  if (format == "csv") {
    out << "y,t,x,u,q,m,im_u,im_x,denominator_margin\n";
    for (const auto& r : rows) {
      if (!r.err.empty()) {
        std::string msg = r.err;
        for (char& ch : msg)
          if (ch == '"' || ch == '\n') ch = '\'';
        out << fmt(r.y) << ',' << fmt(r.t) << ",error,\"" << msg
            << "\",,,,,\n";
        continue;
      }
      out << fmt(r.y) << ',' << fmt(r.t) << ',' << fmt(r.s.x) << ','
          << fmt(r.s.u) << ',' << fmt(r.s.q) << ',' << fmt(r.s.m) << ','
          << fmt(r.s.im_u) << ',' << fmt(r.s.im_x) << ','
          << fmt(r.s.denom_margin) << '\n';
    }
  } else {
    json arr = json::array();
    for (const auto& r : rows) {
      json rec;
      rec["y"] = r.y;
      rec["t"] = r.t;
      if (!r.err.empty()) {
        rec["error"] = r.err;
      } else {
        rec["x"] = r.s.x;
        rec["u"] = r.s.u;
        rec["q"] = r.s.q;
        rec["m"] = r.s.m;
        rec["im_u"] = r.s.im_u;
        rec["im_x"] = r.s.im_x;
        rec["denominator_margin"] = r.s.denom_margin;
      }
      arr.push_back(rec);
    }
    out << arr.dump(2) << '\n';
  }

  // the physical-variable view: (x, u) pairs per t-slice, sorted by x
  std::ostringstream xu;
  if (coords_x) {
    std::vector<const Row*> ok;
    for (const auto& r : rows)
      if (r.err.empty()) ok.push_back(&r);
    std::stable_sort(ok.begin(), ok.end(), [](const Row* a, const Row* b) {
      return a->t != b->t ? a->t < b->t : a->s.x < b->s.x;
    });
    xu << "t,x,u\n";
    for (const Row* r : ok)
      xu << fmt(r->t) << ',' << fmt(r->s.x) << ',' << fmt(r->s.u) << '\n';
  }

  if (out_path.empty()) {
    std::fputs(out.str().c_str(), stdout);
    if (coords_x) {
      std::fputs("\n", stdout);
      std::fputs(xu.str().c_str(), stdout);
    }
  } else {
    atomic_write(out_path, out.str());
    if (coords_x) {
      std::filesystem::path p(out_path);
      p.replace_extension(".xu" + p.extension().string());
      atomic_write(p, xu.str());
      std::fprintf(stderr, "sample: wrote %s and %s\n", out_path.c_str(),
                   p.string().c_str());
    } else {
      std::fprintf(stderr, "sample: wrote %s\n", out_path.c_str());
    }
  }
  if (failures)
    std::fprintf(stderr, "sample: %d of %zu points failed\n", failures,
                 rows.size());
  return failures ? 1 : 0;
}

int cmd_verify(const std::string& config_path, const std::string& level,
               const std::string& out_path) {
  RunConfig cfg = load_config(config_path);
  Context ctx(cfg);
  VerificationReport rep = Verifier(ctx, cfg).run(level == "full");
  std::string text = rep.to_json().dump(2) + "\n";
  if (out_path.empty()) std::fputs(text.c_str(), stdout);
  else {
    atomic_write(out_path, text);
    std::fprintf(stderr, "verify: wrote %s\n", out_path.c_str());
  }
  for (const auto& c : rep.checks)
    std::fprintf(stderr, "  %-50s %s\n", c.name.c_str(),
                 c.pass ? "pass" : (c.hard ? "FAIL" : "fail (soft)"));
  std::fprintf(stderr, "verify: overall %s\n",
               rep.overall() ? "PASS" : "FAIL");
  return rep.overall() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-gap solutions of the modified Camassa-Holm equation"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv", level = "full";
  GridOverrides go;

  CLI::App* validate = app.add_subcommand("validate", "parse and check a config");
  validate->add_option("config", config_path, "JSON config file")->required();

  CLI::App* periods = app.add_subcommand("periods", "compute and cache period data");
  periods->add_option("config", config_path, "JSON config file")->required();
  periods->add_option("-o,--out", out_path, "also write the document here");

  CLI::App* sample = app.add_subcommand("sample", "evaluate the solution on a grid");
  sample->add_option("config", config_path, "JSON config file")->required();
  sample->add_option("-o,--out", out_path, "output file (default stdout)");
  sample->add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  std::string coords = "y";
  sample->add_option("--coords", coords,
                     "x: also emit (x, u) pairs sorted by x per t-slice")
      ->check(CLI::IsMember({"y", "x"}));
  sample->add_option("--y0", go.y0, "grid override");
  sample->add_option("--y1", go.y1, "grid override");
  sample->add_option("--t0", go.t0, "grid override");
  sample->add_option("--t1", go.t1, "grid override");
  sample->add_option("--ny", go.ny, "grid override");
  sample->add_option("--nt", go.nt, "grid override");

  CLI::App* verify = app.add_subcommand("verify", "run the certification gates");
  verify->add_option("config", config_path, "JSON config file")->required();
  verify->add_option("--level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("-o,--out", out_path, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // 0 covers --help/--version
  }

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (periods->parsed()) return cmd_periods(config_path, out_path);
    if (sample->parsed())
      return cmd_sample(config_path, out_path, format, go, coords == "x");
    if (verify->parsed()) return cmd_verify(config_path, level, out_path);
  } catch (const error& ex) {
    std::fprintf(stderr, "%s\n", ex.what());
    switch (ex.code()) {  // bad input is a usage error, not a gate failure
      case errc::config_error:
      case errc::empty_spectrum:
      case errc::ordering_violation:
      case errc::range_violation:
      case errc::length_mismatch:
      case errc::zero_weight:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "%s\n", ex.what());
    return 1;
  }
  return 2;
}
