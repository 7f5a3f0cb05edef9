#ifndef KHO_HARNESS_HPP
#define KHO_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kho/decoherence.hpp"
#include "kho/grid.hpp"
#include "kho/liouville.hpp"
#include "kho/metrics.hpp"

namespace kho {

enum class ExperimentKind {
  poincare,
  evolve,
  dn_series,
  sweep,
  collapse,
  peaks_vs_chi,
  perturbative_compare
};

const char* to_string(ExperimentKind k) noexcept;
ExperimentKind parse_kind(const std::string& name);

// extent or n_cells left at 0 are sized automatically (see auto_grid).
struct GridSpec {
  double extent = 0.0;
  std::size_t n_cells = 0;
  std::size_t max_cells = 1024;  // cap for the automatic cell count
  bool commensurate = false;     // make_grid (Bessel comb) instead of a square grid
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::dn_series;
  ModelParams model;
  ReservoirParams reservoir;
  PhasePoint x0{0.0, 1.1};
  GridSpec grid;
  std::size_t n_kicks = 60;
  std::vector<double> K_values;
  std::vector<double> eta_values;
  std::vector<double> D_values;
  std::filesystem::path output_dir = "kho_out";
  std::size_t snapshot_every = 0;
  std::uint64_t seed = 1;
  std::size_t workers = 0;  // 0: hardware concurrency

  std::optional<ClassicalScheme> classical_scheme;  // default: by D
  bool density_plots = false;
  double plot_gamma = 0.5;

  // poincare
  std::vector<PhasePoint> seeds;  // explicit seeds; else n_seeds random ones
  std::size_t n_seeds = 20;
  double seed_box = kPi;  // random seeds drawn in [-seed_box, seed_box]^2

  // peak detection and fits
  std::size_t peak_window = 3;
  double peak_prominence = 0.05;
  double chi_fit_lo = 1e-4;
  double chi_fit_hi = 1e-2;
  double alpha_lo = 0.1;
  double alpha_hi = 3.0;

  // Throws Error(config) on violated invariants.
  void validate() const;
};

// Parses a JSON document; unknown keys are rejected. Throws Error(config).
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& c);

struct SnapshotEntry {
  std::size_t n = 0;
  FieldKind kind = FieldKind::quantum;
  std::string file;  // relative to the output directory
};

struct RunRecord {
  ExperimentConfig config;  // the run's own (single K, eta, D) configuration
  std::optional<DnSeries> series;
  std::optional<Peak> peak;
  std::optional<double> chi;  // present iff D > 0
  std::optional<PhaseSpaceGrid> grid;
  double wall_seconds = 0.0;
  bool boundary_flag = false;
  bool resolution_capped = false;
  std::vector<SnapshotEntry> snapshots;
  std::map<std::string, double> metrics;  // kind-specific results
  std::vector<RunRecord> runs;            // child runs of multi-run kinds
  std::string error;                      // non-empty if the run failed

  std::string to_json() const;
};

struct GridChoice {
  PhaseSpaceGrid grid;
  bool capped = false;
};

// Extent covers the initial state, the kick excursion and diffusive spreading
// over n_kicks; the spacing resolves sqrt(2D) for D > 0 and the eta^2 fringe
// scale for D = 0.
GridChoice auto_grid(const GridSpec& spec, PhasePoint x0, const ModelParams& params,
                     double D, std::size_t n_kicks);

EvolutionOptions evolution_options(const ExperimentConfig& c, const PhaseSpaceGrid& grid);

// Executes one experiment and writes its files under config.output_dir,
// including record.json. workers_override > 0 beats every other source.
RunRecord run(const ExperimentConfig& config, std::size_t workers_override = 0);

// Cartesian product K x eta x D of dn_series runs, each in its own
// subdirectory, plus summary.csv. Failed runs carry their error and do not
// stop the sweep. Results are ordered as the product, whatever the workers.
std::vector<RunRecord> sweep(const ExperimentConfig& config,
                             std::size_t workers_override = 0);

// Worker count: override, else KHO_WORKERS, else the configured value, else
// hardware threads.
std::size_t resolve_workers(std::size_t override_count, std::size_t configured);

}  // namespace kho

#endif  // KHO_HARNESS_HPP
