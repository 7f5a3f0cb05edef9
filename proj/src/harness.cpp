#include "kho/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kho/error.hpp"
#include "kho/io.hpp"
#include "kho/maps.hpp"

namespace kho {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kKindNames[] = {"poincare",    "evolve",       "dn_series",
                                      "sweep",       "collapse",     "peaks_vs_chi",
                                      "perturbative_compare"};

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::config, msg); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) config_error("unknown key '" + it.key() + "' in " + where);
  }
}

PhasePoint parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    config_error(where + " must be a [q, p] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<double> parse_list(const json& j, const std::string& where) {
  if (!j.is_array()) config_error(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) config_error(where + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename T>
T get_as(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

std::string fmt(double v) { return format_double(v); }

std::string n_tag(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04zu", n);
  return buf;
}

json grid_json(const PhaseSpaceGrid& g) {
  return json{{"nq", g.nq()}, {"np", g.np()}, {"q_max", g.q_max()},
              {"p_max", g.p_max()}, {"dq", g.dq()}, {"dp", g.dp()}};
}

ClassicalScheme scheme_for(const ExperimentConfig& c) {
  if (c.classical_scheme) return *c.classical_scheme;
  return c.reservoir.D > 0.0 ? ClassicalScheme::spectral : ClassicalScheme::semi_lagrangian;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

std::string dn_csv(const DnSeries& s) {
  std::string out = "n,dn,boundary_flag\n";
  for (const auto& v : s.values)
    out += std::to_string(v.n) + "," + fmt(v.dn) + "," + (v.boundary_flag ? "1" : "0") + "\n";
  return out;
}

std::optional<Peak> try_peak(const DnSeries& s, const ExperimentConfig& c) {
  try {
    return first_peak(s, c.peak_window, c.peak_prominence);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
}

// Independent dn_series runs; a failure is captured in its record.
std::vector<RunRecord> run_children(std::vector<ExperimentConfig> configs,
                                    std::size_t workers) {
  std::vector<RunRecord> out(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) {
    try {
      out[i] = run(configs[i], 1);
    } catch (const std::exception& e) {
      out[i].config = configs[i];
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<ExperimentConfig> product(const ExperimentConfig& c,
                                      const std::vector<double>& Ks,
                                      const std::vector<double>& etas,
                                      const std::vector<double>& Ds) {
  std::vector<ExperimentConfig> out;
  for (double K : Ks)
    for (double eta : etas)
      for (double D : Ds) {
        ExperimentConfig child = c;
        child.kind = ExperimentKind::dn_series;
        child.model.K = K;
        child.model.eta = eta;
        child.reservoir.D = D;
        child.K_values.clear();
        child.eta_values.clear();
        child.D_values.clear();
        child.output_dir = c.output_dir / ("run_" + n_tag(out.size()));
        out.push_back(std::move(child));
      }
  return out;
}

std::string summary_csv(const std::vector<RunRecord>& runs) {
  std::string out = "chi,dn_peak,n_peak,K,eta,D\n";
  for (const auto& r : runs) {
    const auto& m = r.config.model;
    out += r.chi ? fmt(*r.chi) : "";
    out += ",";
    if (r.peak) out += fmt(r.peak->value) + "," + std::to_string(r.peak->n);
    else out += ",";
    out += "," + fmt(m.K) + "," + fmt(m.eta) + "," + fmt(r.config.reservoir.D) + "\n";
  }
  return out;
}

void write_record(const RunRecord& r) {
  ensure_dir(r.config.output_dir);
  write_text_file(r.config.output_dir / "record.json", r.to_json() + "\n");
}

RunRecord run_poincare(const ExperimentConfig& c) {
  RunRecord r;
  r.config = c;
  std::vector<PhasePoint> seeds = c.seeds;
  if (seeds.empty()) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-c.seed_box, c.seed_box);
    for (std::size_t i = 0; i < c.n_seeds; ++i) {
      const double q = u(rng);
      seeds.push_back({q, u(rng)});
    }
  }
  const auto pts = poincare_section(seeds, c.n_kicks, c.model);
  std::string csv = "seed_id,iter,q,p\n";
  csv.reserve(pts.size() * 48);
  for (const auto& s : pts)
    csv += std::to_string(s.seed_id) + "," + std::to_string(s.iter) + "," + fmt(s.q) +
           "," + fmt(s.p) + "\n";
  write_text_file(c.output_dir / "poincare.csv", csv);
  r.metrics["rows"] = static_cast<double>(pts.size());
  r.metrics["seeds"] = static_cast<double>(seeds.size());
  const auto origin = classify_origin(c.model.K, c.model.nu_tau);
  r.metrics["origin_trace"] = origin.trace;
  return r;
}

RunRecord run_single(const ExperimentConfig& c) {
  RunRecord r;
  r.config = c;
  const double D = c.reservoir.D;
  const auto choice = auto_grid(c.grid, c.x0, c.model, D, c.n_kicks);
  r.grid = choice.grid;
  r.resolution_capped = choice.capped;
  if (D > 0.0) r.chi = chi(c.model.K, c.model.eta, D);

  const auto options = evolution_options(c, choice.grid);
  EvolutionObserver observer;
  if (c.kind == ExperimentKind::evolve && c.snapshot_every > 0) {
    observer = [&](const PairedEvolution& evo) {
      const std::size_t n = evo.kicks();
      if (n == 0 || n % c.snapshot_every != 0) return;
      for (const Field* f : {&evo.quantum(), &evo.classical()}) {
        const std::string stem = std::string(to_string(f->kind())) + "_n" + n_tag(n);
        write_snapshot(*f, c.output_dir / (stem + ".khow"));
        r.snapshots.push_back({n, f->kind(), stem + ".khow"});
        if (c.density_plots)
          emit_density_plot(*f, c.output_dir / (stem + ".pgm"), c.plot_gamma,
                            f->kind() == FieldKind::quantum);
      }
    };
  }
  auto series = dn_series(c.x0, c.model, D, c.n_kicks, options, observer);
  write_text_file(c.output_dir / "dn.csv", dn_csv(series));
  r.boundary_flag = series.boundary_flag;
  r.peak = try_peak(series, c);

  if (c.kind == ExperimentKind::perturbative_compare) {
    require(D > 0.0, ErrorCode::config, "perturbative_compare needs D > 0");
    const Field W0 = coherent_state(choice.grid, c.x0, c.model.eta, FieldKind::classical);
    const auto pert = dn_perturbative(W0, c.n_kicks, c.model, D);
    std::string csv = "n,dn_full,dn_perturbative,ratio\n";
    double worst = 0.0;
    for (std::size_t n = 1; n <= c.n_kicks; ++n) {
      const double full = series.values[n].dn;
      const double ratio = full > 0.0 ? pert[n - 1] / full : 0.0;
      worst = std::max(worst, std::abs(ratio - 1.0));
      csv += std::to_string(n) + "," + fmt(full) + "," + fmt(pert[n - 1]) + "," +
             fmt(ratio) + "\n";
    }
    write_text_file(c.output_dir / "perturbative.csv", csv);
    r.metrics["max_relative_deviation"] = worst;
  }
  r.series = std::move(series);
  return r;
}

RunRecord run_collapse(const ExperimentConfig& c, std::size_t workers) {
  RunRecord r;
  r.config = c;
  const std::vector<double> Ks{c.model.K};
  const std::vector<double> Ds{c.reservoir.D};
  r.runs = run_children(product(c, Ks, c.eta_values, Ds), workers);
  std::vector<CollapseCurve> curves;
  std::string csv = "eta,n,dn\n";
  for (const auto& child : r.runs) {
    require(child.error.empty(), ErrorCode::numerical,
            "collapse member failed: " + child.error);
    r.boundary_flag = r.boundary_flag || child.boundary_flag;
    curves.push_back({child.config.model.eta, child.series->dn_values()});
    for (const auto& v : child.series->values)
      csv += fmt(child.config.model.eta) + "," + std::to_string(v.n) + "," + fmt(v.dn) + "\n";
  }
  write_text_file(c.output_dir / "collapse.csv", csv);
  const auto res = collapse_alpha(curves, c.alpha_lo, c.alpha_hi);
  r.metrics["alpha"] = res.alpha;
  r.metrics["objective"] = res.objective;
  r.metrics["objective_at_zero"] = res.objective_at_zero;
  r.metrics["improvement"] = res.objective > 0.0 ? res.objective_at_zero / res.objective : 0.0;
  r.metrics["no_rescaling_detected"] = res.no_rescaling_detected ? 1.0 : 0.0;
  return r;
}

RunRecord run_peaks(const ExperimentConfig& c, std::size_t workers) {
  RunRecord r;
  r.config = c;
  const auto Ks = c.K_values.empty() ? std::vector<double>{c.model.K} : c.K_values;
  r.runs = run_children(product(c, Ks, c.eta_values, c.D_values), workers);
  write_text_file(c.output_dir / "peaks.csv", summary_csv(r.runs));
  std::vector<ChiPeak> points;
  for (const auto& child : r.runs) {
    r.boundary_flag = r.boundary_flag || child.boundary_flag;
    if (child.chi && child.peak) points.push_back({*child.chi, child.peak->value});
  }
  r.metrics["points"] = static_cast<double>(points.size());
  try {
    r.metrics["slope"] = slope_loglog(points, c.chi_fit_lo, c.chi_fit_hi);
  } catch (const Error&) {
    // fewer than three points in the fit window: no slope reported
  }
  return r;
}

}  // namespace

const char* to_string(ExperimentKind k) noexcept {
  return kKindNames[static_cast<int>(k)];
}

ExperimentKind parse_kind(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (name == kKindNames[i]) return static_cast<ExperimentKind>(i);
  config_error("unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
    reservoir.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (n_kicks < 1) config_error("n_kicks must be >= 1");
  if (grid.extent < 0.0 || !std::isfinite(grid.extent)) config_error("grid extent must be >= 0");
  if (grid.n_cells % 2 != 0) config_error("grid n_cells must be even");
  if (grid.max_cells < 16) config_error("grid max_cells must be >= 16");
  if (!std::isfinite(x0.q) || !std::isfinite(x0.p)) config_error("x0 must be finite");
  auto positive = [](const std::vector<double>& v, bool allow_zero) {
    return std::all_of(v.begin(), v.end(), [&](double x) {
      return std::isfinite(x) && (allow_zero ? x >= 0.0 : x > 0.0);
    });
  };
  if (!positive(K_values, true)) config_error("K values must be finite and >= 0");
  if (!positive(eta_values, false) ||
      std::any_of(eta_values.begin(), eta_values.end(), [](double e) { return e > 1.0; }))
    config_error("eta values must lie in (0, 1]");
  if (!positive(D_values, true)) config_error("D values must be finite and >= 0");
  switch (kind) {
    case ExperimentKind::sweep:
      if (K_values.empty() || eta_values.empty() || D_values.empty())
        config_error("sweep needs non-empty K, eta and D axes");
      break;
    case ExperimentKind::peaks_vs_chi:
      if (eta_values.empty() || D_values.empty())
        config_error("peaks_vs_chi needs non-empty eta and D axes");
      break;
    case ExperimentKind::collapse:
      if (eta_values.size() < 2) config_error("collapse needs at least two eta values");
      if (std::any_of(eta_values.begin(), eta_values.end(), [](double e) { return e >= 1.0; }))
        config_error("collapse needs eta < 1");
      break;
    case ExperimentKind::poincare:
      if (seeds.empty() && n_seeds == 0) config_error("poincare needs seeds");
      break;
    default:
      break;
  }
  if (!(plot_gamma > 0.0)) config_error("plot_gamma must be positive");
  if (peak_window % 2 == 0) config_error("peak_window must be odd");
  if (!(chi_fit_lo > 0.0 && chi_fit_hi > chi_fit_lo)) config_error("bad chi_fit range");
  if (!(alpha_lo < alpha_hi)) config_error("bad alpha_range");
  if (output_dir.empty()) config_error("output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"kind", "model", "reservoir", "x0", "grid", "n_kicks", "sweep",
                 "output_dir", "snapshot_every", "seed", "workers", "classical_scheme",
                 "density_plots", "plot_gamma", "poincare", "analysis"},
             "config");
  ExperimentConfig c;
  if (!j.contains("kind") || !j["kind"].is_string()) config_error("config needs a 'kind'");
  c.kind = parse_kind(j["kind"].get<std::string>());

  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, {"K", "eta", "nu_tau"}, "model");
    c.model.K = get_as(m, "K", c.model.K);
    c.model.eta = get_as(m, "eta", c.model.eta);
    c.model.nu_tau = get_as(m, "nu_tau", c.model.nu_tau);
  }
  if (j.contains("reservoir")) {
    const auto& rv = j["reservoir"];
    check_keys(rv, {"D", "n_bar", "gamma", "tau"}, "reservoir");
    if (rv.contains("D")) {
      if (rv.contains("n_bar") || rv.contains("gamma"))
        config_error("reservoir: give either D or n_bar/gamma/tau");
      c.reservoir.D = get_as(rv, "D", 0.0);
    } else if (rv.contains("n_bar")) {
      try {
        c.reservoir = ReservoirParams::from_rates(get_as(rv, "n_bar", 0.0),
                                                  get_as(rv, "gamma", 0.0), c.model.eta,
                                                  get_as(rv, "tau", 1.0));
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
  }
  if (j.contains("x0")) c.x0 = parse_point(j["x0"], "x0");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, {"extent", "n_cells", "max_cells", "commensurate"}, "grid");
    c.grid.extent = get_as(g, "extent", 0.0);
    c.grid.n_cells = get_as<std::size_t>(g, "n_cells", 0);
    c.grid.max_cells = get_as<std::size_t>(g, "max_cells", c.grid.max_cells);
    c.grid.commensurate = get_as(g, "commensurate", false);
  }
  if (j.contains("n_kicks")) {
    if (!j["n_kicks"].is_number_integer() || j["n_kicks"].get<long long>() < 1)
      config_error("n_kicks must be an integer >= 1");
    c.n_kicks = j["n_kicks"].get<std::size_t>();
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    check_keys(s, {"K", "eta", "D"}, "sweep");
    if (s.contains("K")) c.K_values = parse_list(s["K"], "sweep.K");
    if (s.contains("eta")) c.eta_values = parse_list(s["eta"], "sweep.eta");
    if (s.contains("D")) c.D_values = parse_list(s["D"], "sweep.D");
  }
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir", "");
  c.snapshot_every = get_as<std::size_t>(j, "snapshot_every", 0);
  c.seed = get_as<std::uint64_t>(j, "seed", c.seed);
  c.workers = get_as<std::size_t>(j, "workers", 0);
  if (j.contains("classical_scheme")) {
    const auto s = get_as<std::string>(j, "classical_scheme", "");
    if (s == "spectral") c.classical_scheme = ClassicalScheme::spectral;
    else if (s == "semi_lagrangian") c.classical_scheme = ClassicalScheme::semi_lagrangian;
    else if (s != "auto") config_error("classical_scheme must be auto, spectral or semi_lagrangian");
  }
  c.density_plots = get_as(j, "density_plots", false);
  c.plot_gamma = get_as(j, "plot_gamma", c.plot_gamma);
  if (j.contains("poincare")) {
    const auto& p = j["poincare"];
    check_keys(p, {"seeds", "n_seeds", "seed_box"}, "poincare");
    if (p.contains("seeds")) {
      if (!p["seeds"].is_array()) config_error("poincare.seeds must be an array");
      for (const auto& s : p["seeds"]) c.seeds.push_back(parse_point(s, "poincare seed"));
    }
    c.n_seeds = get_as<std::size_t>(p, "n_seeds", c.n_seeds);
    c.seed_box = get_as(p, "seed_box", c.seed_box);
  }
  if (j.contains("analysis")) {
    const auto& a = j["analysis"];
    check_keys(a, {"peak_window", "peak_prominence", "chi_fit", "alpha_range"}, "analysis");
    c.peak_window = get_as<std::size_t>(a, "peak_window", c.peak_window);
    c.peak_prominence = get_as(a, "peak_prominence", c.peak_prominence);
    if (a.contains("chi_fit")) {
      const auto v = parse_list(a["chi_fit"], "analysis.chi_fit");
      if (v.size() != 2) config_error("analysis.chi_fit must hold two numbers");
      c.chi_fit_lo = v[0];
      c.chi_fit_hi = v[1];
    }
    if (a.contains("alpha_range")) {
      const auto v = parse_list(a["alpha_range"], "analysis.alpha_range");
      if (v.size() != 2) config_error("analysis.alpha_range must hold two numbers");
      c.alpha_lo = v[0];
      c.alpha_hi = v[1];
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

namespace {

json config_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["model"] = {{"K", c.model.K}, {"eta", c.model.eta}, {"nu_tau", c.model.nu_tau}};
  j["reservoir"] = {{"D", c.reservoir.D}};
  j["x0"] = {c.x0.q, c.x0.p};
  j["grid"] = {{"extent", c.grid.extent},
               {"n_cells", c.grid.n_cells},
               {"max_cells", c.grid.max_cells},
               {"commensurate", c.grid.commensurate}};
  j["n_kicks"] = c.n_kicks;
  json sw = json::object();
  if (!c.K_values.empty()) sw["K"] = c.K_values;
  if (!c.eta_values.empty()) sw["eta"] = c.eta_values;
  if (!c.D_values.empty()) sw["D"] = c.D_values;
  if (!sw.empty()) j["sweep"] = sw;
  j["output_dir"] = c.output_dir.string();
  j["snapshot_every"] = c.snapshot_every;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["classical_scheme"] = c.classical_scheme ? to_string(*c.classical_scheme) : "auto";
  j["density_plots"] = c.density_plots;
  j["plot_gamma"] = c.plot_gamma;
  if (c.kind == ExperimentKind::poincare) {
    json seeds = json::array();
    for (const auto& s : c.seeds) seeds.push_back({s.q, s.p});
    j["poincare"] = {{"seeds", seeds}, {"n_seeds", c.n_seeds}, {"seed_box", c.seed_box}};
  }
  j["analysis"] = {{"peak_window", c.peak_window},
                   {"peak_prominence", c.peak_prominence},
                   {"chi_fit", {c.chi_fit_lo, c.chi_fit_hi}},
                   {"alpha_range", {c.alpha_lo, c.alpha_hi}}};
  return j;
}

json record_json(const RunRecord& r) {
  json j;
  j["config"] = config_json(r.config);
  if (!r.error.empty()) j["error"] = r.error;
  if (r.grid) j["grid"] = grid_json(*r.grid);
  if (r.chi) j["chi"] = *r.chi;
  if (r.peak) j["peak"] = {{"n", r.peak->n}, {"dn", r.peak->value}};
  j["wall_seconds"] = r.wall_seconds;
  j["boundary_flag"] = r.boundary_flag;
  j["resolution_capped"] = r.resolution_capped;
  if (r.series) {
    const auto& s = *r.series;
    j["diagnostics"] = {{"max_boundary_fraction", s.max_boundary_fraction},
                        {"max_renormalization_deviation", s.max_renormalization_deviation},
                        {"quantum_mass_drift", s.quantum_mass_drift}};
    j["dn"] = s.dn_values();
  }
  if (!r.snapshots.empty()) {
    json snaps = json::array();
    for (const auto& s : r.snapshots)
      snaps.push_back({{"n", s.n}, {"kind", to_string(s.kind)}, {"file", s.file}});
    j["snapshots"] = snaps;
  }
  if (!r.metrics.empty()) j["metrics"] = r.metrics;
  if (!r.runs.empty()) {
    json runs = json::array();
    for (const auto& child : r.runs) {
      json cj{{"output_dir", child.config.output_dir.string()},
              {"K", child.config.model.K},
              {"eta", child.config.model.eta},
              {"D", child.config.reservoir.D}};
      if (child.chi) cj["chi"] = *child.chi;
      if (child.peak) cj["peak"] = {{"n", child.peak->n}, {"dn", child.peak->value}};
      cj["boundary_flag"] = child.boundary_flag;
      if (!child.error.empty()) cj["error"] = child.error;
      runs.push_back(cj);
    }
    j["runs"] = runs;
  }
  return j;
}

}  // namespace

std::string to_json(const ExperimentConfig& c) { return config_json(c).dump(2); }

std::string RunRecord::to_json() const { return record_json(*this).dump(2); }

GridChoice auto_grid(const GridSpec& spec, PhasePoint x0, const ModelParams& params,
                     double D, std::size_t n_kicks) {
  const double eta = params.eta;
  double extent = spec.extent;
  if (extent <= 0.0) {
    const double spread = std::sqrt(eta * eta + 2.0 * D * static_cast<double>(n_kicks));
    extent = 1.2 * (std::hypot(x0.q, x0.p) + params.K + 6.0 * spread) + 1.0;
  }
  GridChoice out;
  std::size_t n = spec.n_cells;
  if (n == 0) {
    const double h = D > 0.0 ? std::sqrt(2.0 * D) / 4.0 : std::min(eta / 4.0, eta * eta / 2.0);
    const double want = 2.0 * std::ceil(extent / h);
    // multiples of 64 keep the transforms on fast sizes
    auto cells = static_cast<std::size_t>(std::ceil(want / 64.0)) * 64;
    if (cells > spec.max_cells) {
      cells = spec.max_cells - spec.max_cells % 2;
      out.capped = true;
    }
    n = std::max<std::size_t>(cells, 64);
  }
  out.grid = spec.commensurate ? make_grid(extent, n, eta) : make_square_grid(extent, n);
  require(out.grid.q_max() - std::abs(x0.q) >= 4.0 * eta &&
              out.grid.p_max() - std::abs(x0.p) >= 4.0 * eta,
          ErrorCode::config, "grid extent leaves less than 4 eta around x0");
  return out;
}

EvolutionOptions evolution_options(const ExperimentConfig& c, const PhaseSpaceGrid& grid) {
  EvolutionOptions o;
  o.grid = grid;
  o.classical_scheme = scheme_for(c);
  o.kick_method = KickMethod::automatic;
  return o;
}

std::size_t resolve_workers(std::size_t override_count, std::size_t configured) {
  if (override_count > 0) return override_count;
  if (const char* env = std::getenv("KHO_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    require(end != env && *end == '\0' && v > 0, ErrorCode::config,
            "KHO_WORKERS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  if (configured > 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

RunRecord run(const ExperimentConfig& config, std::size_t workers_override) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(config.output_dir);
  RunRecord r;
  switch (config.kind) {
    case ExperimentKind::poincare:
      r = run_poincare(config);
      break;
    case ExperimentKind::evolve:
    case ExperimentKind::dn_series:
    case ExperimentKind::perturbative_compare:
      r = run_single(config);
      break;
    case ExperimentKind::sweep:
      r.config = config;
      r.runs = sweep(config, workers_override);
      for (const auto& child : r.runs) r.boundary_flag = r.boundary_flag || child.boundary_flag;
      break;
    case ExperimentKind::collapse:
      r = run_collapse(config, resolve_workers(workers_override, config.workers));
      break;
    case ExperimentKind::peaks_vs_chi:
      r = run_peaks(config, resolve_workers(workers_override, config.workers));
      break;
  }
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_record(r);
  return r;
}

std::vector<RunRecord> sweep(const ExperimentConfig& config, std::size_t workers_override) {
  config.validate();
  require(!config.K_values.empty() && !config.eta_values.empty() && !config.D_values.empty(),
          ErrorCode::config, "sweep needs non-empty K, eta and D axes");
  ensure_dir(config.output_dir);
  auto runs = run_children(product(config, config.K_values, config.eta_values, config.D_values),
                           resolve_workers(workers_override, config.workers));
  write_text_file(config.output_dir / "summary.csv", summary_csv(runs));
  return runs;
}

}  // namespace kho
