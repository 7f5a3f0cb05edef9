#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "kho/decoherence.hpp"
#include "kho/error.hpp"
#include "kho/harness.hpp"
#include "kho/io.hpp"

using namespace kho;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("kho_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::size_t lines(const fs::path& p) {
  std::ifstream is(p);
  std::size_t n = 0;
  for (std::string s; std::getline(is, s);) ++n;
  return n;
}

ErrorCode code_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::numerical;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"kind": "dn_series", "model": {"K": 0.7, "eta": 0.125},
      "reservoir": {"D": 0.01}, "x0": [0.2, 1.0], "n_kicks": 12})");
  CHECK(c.kind == ExperimentKind::dn_series);
  CHECK(c.model.K == 0.7);
  CHECK(c.model.eta == 0.125);
  CHECK(c.reservoir.D == 0.01);
  CHECK(c.x0.q == 0.2);
  CHECK(c.n_kicks == 12);
  CHECK(parse_config(to_json(c)).model.K == 0.7);

  const auto r = parse_config(R"({"kind": "evolve", "model": {"eta": 0.25},
      "reservoir": {"n_bar": 2, "gamma": 0.01, "tau": 1.5}})");
  CHECK(r.reservoir.D == doctest::Approx(2 * 0.01 * 0.0625 * 1.5).epsilon(1e-9).scale(0));

  CHECK(code_of(R"({"kind": "dn_series", "bogus": 1})") == ErrorCode::config);
  CHECK(code_of(R"({"kind": "warp"})") == ErrorCode::config);
  CHECK(code_of(R"({"kind": "dn_series", "n_kicks": 0})") == ErrorCode::config);
  CHECK(code_of(R"({"kind": "dn_series", "model": {"eta": 2}})") == ErrorCode::config);
  CHECK(code_of(R"({"kind": "sweep", "sweep": {"K": [0.5], "eta": [0.25], "D": []}})") ==
        ErrorCode::config);
  CHECK(code_of("{not json") == ErrorCode::config);
}

TEST_CASE("worker resolution") {
  ::unsetenv("KHO_WORKERS");
  CHECK(resolve_workers(3, 5) == 3);
  CHECK(resolve_workers(0, 5) == 5);
  CHECK(resolve_workers(0, 0) >= 1);
  ::setenv("KHO_WORKERS", "2", 1);
  CHECK(resolve_workers(0, 5) == 2);
  CHECK(resolve_workers(4, 5) == 4);
  ::setenv("KHO_WORKERS", "zero", 1);
  CHECK_THROWS_AS(resolve_workers(0, 5), Error);
  ::unsetenv("KHO_WORKERS");
}

TEST_CASE("automatic grid") {
  ModelParams m;
  GridSpec spec;
  const auto a = auto_grid(spec, {0.0, 1.1}, m, 0.0, 60);
  CHECK(a.grid.nq() % 64 == 0);
  CHECK(a.grid.q_max() >= 1.1 + 0.5 + 6 * 0.25);
  CHECK(a.grid.dq() <= 0.25 * 0.25 / 2 + 1e-12);
  CHECK_FALSE(a.capped);

  m.eta = 0.03125;
  const auto b = auto_grid(spec, {0.0, 1.1}, m, 0.0, 60);
  CHECK(b.capped);
  CHECK(b.grid.nq() == 1024);

  spec.extent = 3.0;
  spec.n_cells = 128;
  const auto fixed = auto_grid(spec, {0.0, 1.1}, m, 0.0, 60);
  CHECK(fixed.grid.nq() == 128);
  CHECK(fixed.grid.q_max() == doctest::Approx(3.0));
}

TEST_CASE("poincare run") {
  const auto out = scratch("poincare");
  auto c = parse_config(R"({"kind": "poincare", "model": {"K": 2.0}, "n_kicks": 5000,
      "poincare": {"n_seeds": 20}})");
  c.output_dir = out;
  const auto r = run(c, 2);
  CHECK(r.error.empty());
  CHECK(lines(out / "poincare.csv") == 100000 + 1);
  CHECK(fs::exists(out / "record.json"));
}

TEST_CASE("dn_series run") {
  const auto out = scratch("dn");
  auto c = parse_config(R"({"kind": "dn_series", "model": {"K": 0.5, "eta": 0.25},
      "reservoir": {"D": 0}, "x0": [0, 1.1], "n_kicks": 60})");
  c.output_dir = out;
  const auto r = run(c);
  REQUIRE(r.series.has_value());
  double mx = 0.0;
  for (const auto& s : r.series->values) mx = std::max(mx, s.dn);
  CHECK(mx > 1.0);
  CHECK_FALSE(r.chi.has_value());
  CHECK_FALSE(r.boundary_flag);
  CHECK(lines(out / "dn.csv") == 62);
  CHECK(slurp(out / "dn.csv").rfind("n,dn,boundary_flag\n", 0) == 0);
  const auto rec = nlohmann::json::parse(slurp(out / "record.json"));
  CHECK(rec["config"]["kind"] == "dn_series");
}

TEST_CASE("evolve run writes paired snapshots") {
  const auto out = scratch("evolve");
  auto c = parse_config(R"({"kind": "evolve", "model": {"K": 0.5, "eta": 0.25},
      "x0": [0, 1.1], "n_kicks": 8, "snapshot_every": 1})");
  c.output_dir = out;
  const auto r = run(c);
  CHECK(r.snapshots.size() == 16);
  std::size_t quantum = 0;
  for (const auto& s : r.snapshots) {
    CHECK(fs::exists(out / s.file));
    quantum += s.kind == FieldKind::quantum;
  }
  CHECK(quantum == 8);
  const auto w8 = read_snapshot(out / "quantum_n0008.khow");
  CHECK(w8.grid() == *r.grid);
  CHECK(integrate(w8) == doctest::Approx(1.0).epsilon(1e-10).scale(0));
}

TEST_CASE("fringes at kick 18") {
  const auto out = scratch("fringe");
  auto c = parse_config(R"({"kind": "evolve", "model": {"K": 0.5, "eta": 0.25},
      "x0": [0, 1.1], "n_kicks": 18, "snapshot_every": 18, "density_plots": true})");
  c.output_dir = out;
  run(c);
  const auto meta = nlohmann::json::parse(slurp(out / "quantum_n0018.pgm.json"));
  CHECK(meta["sign_alternation_fraction"].get<double>() >= 0.10);
  CHECK(meta["negativity_fraction"].get<double>() > 0.0);
  CHECK(fs::exists(out / "quantum_n0018_neg.pgm"));
  CHECK(fs::exists(out / "classical_n0018.pgm"));
}

TEST_CASE("sweep covers the product and is deterministic") {
  const std::string cfg = R"({"kind": "sweep", "n_kicks": 3,
      "x0": [0, 1.1], "grid": {"max_cells": 256},
      "sweep": {"K": [0.5], "eta": [0.25, 0.125, 0.0625, 0.03125],
                "D": [0.1, 0.05, 0.01, 0.005, 0.001, 0.0005]}})";
  auto c = parse_config(cfg);
  c.output_dir = scratch("sweep1");
  const auto r = run(c, 1);
  REQUIRE(r.runs.size() == 24);
  double lo = 1e9, hi = 0.0;
  for (const auto& child : r.runs) {
    CHECK(child.error.empty());
    REQUIRE(child.chi.has_value());
    lo = std::min(lo, *child.chi);
    hi = std::max(hi, *child.chi);
  }
  // the full product; the plotted subset runs from 4.3e-5 to 6.2e-2
  CHECK(lo == doctest::Approx(chi(0.5, 0.03125, 0.1)).epsilon(1e-12).scale(0));
  CHECK(hi == doctest::Approx(chi(0.5, 0.25, 0.0005)).epsilon(1e-12).scale(0));
  auto listed = [&](double v) {
    return std::any_of(r.runs.begin(), r.runs.end(), [&](const RunRecord& x) {
      return std::abs(*x.chi - v) <= 0.05 * v;
    });
  };
  CHECK(listed(4.3e-5));
  CHECK(listed(6.2e-2));
  CHECK(lines(c.output_dir / "summary.csv") == 25);
  CHECK(slurp(c.output_dir / "summary.csv").rfind("chi,dn_peak,n_peak,K,eta,D\n", 0) == 0);

  auto again = parse_config(cfg);
  again.output_dir = scratch("sweep2");
  run(again, 4);
  CHECK(slurp(c.output_dir / "summary.csv") == slurp(again.output_dir / "summary.csv"));
}
