// Command-line front end. Talks to the library only through kho.h: the config
// file is read here, overrides are merged into the JSON, and the document is
// handed to kho_run_json.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kho/kho.h"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Overrides {
  std::string config;
  std::optional<double> K, eta, D;
  std::string center;
  std::optional<long long> kicks;
  std::optional<double> grid_extent;
  std::optional<long long> grid_cells;
  std::string out;
  std::optional<unsigned long long> seed;
  std::size_t workers = 0;
};

struct CliError {
  int code;
  std::string message;
};

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CliError{kExitIo, "cannot open config " + path};
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw CliError{kExitConfig, std::string("config is not valid JSON: ") + e.what()};
  }
}

json build_config(const std::string& kind, const Overrides& o) {
  json j = o.config.empty() ? json::object() : load_json(o.config);
  if (!j.is_object()) throw CliError{kExitConfig, "config must be a JSON object"};
  j["kind"] = kind;
  auto section = [&](const char* name) -> json& {
    if (!j.contains(name)) j[name] = json::object();
    return j[name];
  };
  if (o.K) section("model")["K"] = *o.K;
  if (o.eta) section("model")["eta"] = *o.eta;
  if (o.D) {
    auto& r = section("reservoir");
    r.erase("n_bar");
    r.erase("gamma");
    r.erase("tau");
    r["D"] = *o.D;
  }
  if (!o.center.empty()) {
    double q = 0.0, p = 0.0;
    char comma = 0;
    std::istringstream is(o.center);
    if (!(is >> q >> comma >> p) || comma != ',' || !is.eof())
      throw CliError{kExitConfig, "--center expects q,p"};
    j["x0"] = {q, p};
  }
  if (o.kicks) j["n_kicks"] = *o.kicks;
  if (o.grid_extent) section("grid")["extent"] = *o.grid_extent;
  if (o.grid_cells) section("grid")["n_cells"] = *o.grid_cells;
  if (!o.out.empty()) j["output_dir"] = o.out;
  if (o.seed) j["seed"] = *o.seed;
  return j;
}

int exit_code(kho_status s) {
  switch (s) {
    case KHO_OK: return 0;
    case KHO_ERR_CONFIG:
    case KHO_ERR_INVALID_ARGUMENT: return kExitConfig;
    case KHO_ERR_IO: return kExitIo;
    default: return kExitFailure;
  }
}

void print_summary(const json& rec) {
  const auto& cfg = rec["config"];
  std::cout << cfg["kind"].get<std::string>() << " -> " << cfg["output_dir"].get<std::string>()
            << "\n";
  if (rec.contains("grid"))
    std::cout << "  grid " << rec["grid"]["nq"] << " x " << rec["grid"]["np"] << "\n";
  if (rec.contains("chi")) std::cout << "  chi " << rec["chi"] << "\n";
  if (rec.contains("peak"))
    std::cout << "  first peak n=" << rec["peak"]["n"] << " D_n=" << rec["peak"]["dn"] << "\n";
  if (rec.contains("metrics"))
    for (const auto& [k, v] : rec["metrics"].items()) std::cout << "  " << k << " " << v << "\n";
  if (rec.contains("runs")) {
    std::size_t failed = 0;
    for (const auto& r : rec["runs"]) failed += r.contains("error");
    std::cout << "  runs " << rec["runs"].size() << " (" << failed << " failed)\n";
  }
  if (rec.value("boundary_flag", false))
    std::cout << "  warning: mass reached the grid boundary\n";
  if (rec.value("resolution_capped", false))
    std::cout << "  warning: automatic resolution hit max_cells\n";
  std::cout << "  wall " << rec["wall_seconds"] << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kicked harmonic oscillator: quantum versus classical phase-space evolution"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"poincare", "poincare"},       {"evolve", "evolve"},
      {"dn", "dn_series"},            {"sweep", "sweep"},
      {"collapse", "collapse"},       {"peaks", "peaks_vs_chi"},
      {"perturb", "perturbative_compare"}};
  const std::vector<std::string> help = {
      "stroboscopic section of the classical map",
      "paired evolution with snapshots",
      "D_n series for one parameter set",
      "Cartesian sweep over K, eta, D",
      "eta-rescaling collapse of D_n curves",
      "first-peak height against chi",
      "first-order expansion against the full pipeline"};

  Overrides o;
  std::string chosen;
  double plot_gamma = 0.5;
  std::string plot_in, plot_out;
  bool plot_signed = false;

  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", o.config, "JSON experiment config");
    sub->add_option("--K", o.K, "kick amplitude");
    sub->add_option("--eta", o.eta, "Lamb-Dicke parameter");
    sub->add_option("--D", o.D, "diffusion per kick period");
    sub->add_option("--center", o.center, "initial state center q,p");
    sub->add_option("--kicks", o.kicks, "number of kicks")->check(CLI::PositiveNumber);
    sub->add_option("--grid-extent", o.grid_extent, "half-width of the grid");
    sub->add_option("--grid-cells", o.grid_cells, "cells per axis (even)");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--workers", o.workers, "parallel runs (overrides KHO_WORKERS)");
    sub->callback([&, name = commands[i].second] { chosen = name; });
  }
  auto* plot = app.add_subcommand("plot", "density plot of a snapshot");
  plot->add_option("snapshot", plot_in, "KHOW snapshot")->required();
  plot->add_option("output", plot_out, "output PGM")->required();
  plot->add_option("--gamma", plot_gamma, "gamma applied to |W|");
  plot->add_flag("--signed", plot_signed, "also write _pos/_neg channels");
  plot->callback([&] { chosen = "plot"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (chosen == "plot") {
    double neg = 0.0;
    const auto s = kho_emit_density_plot(plot_in.c_str(), plot_out.c_str(), plot_gamma,
                                         plot_signed ? 1 : 0, &neg);
    if (s != KHO_OK) {
      std::cerr << "error: " << kho_last_error() << "\n";
      return exit_code(s);
    }
    std::cout << plot_out << " negativity " << neg << "\n";
    return 0;
  }

  try {
    const json cfg = build_config(chosen, o);
    char* record = nullptr;
    const auto s = kho_run_json(cfg.dump().c_str(), o.workers, &record);
    if (s != KHO_OK) {
      std::cerr << "error: " << kho_last_error() << "\n";
      return exit_code(s);
    }
    const json rec = json::parse(record);
    kho_string_free(record);
    print_summary(rec);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  }
  return 0;
}
