#ifndef KHO_METRICS_HPP
#define KHO_METRICS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kho/grid.hpp"
#include "kho/liouville.hpp"
#include "kho/wigner.hpp"

namespace kho {

// L1 distance between two fields on the same grid.
double dn(const Field& quantum, const Field& classical);

struct EvolutionOptions {
  PhaseSpaceGrid grid;
  ClassicalScheme classical_scheme = ClassicalScheme::semi_lagrangian;
  KickMethod kick_method = KickMethod::automatic;
  double boundary_threshold = 1e-4;
};

// The quantum and classical distributions evolved side by side from the same
// coherent state. Fields are always "immediately before kick n".
class PairedEvolution {
 public:
  PairedEvolution(const EvolutionOptions& options, PhasePoint x0,
                  const ModelParams& params, double D);

  void step();

  std::size_t kicks() const { return quantum_.kick_index(); }
  const Field& quantum() const { return quantum_; }
  const Field& classical() const { return classical_; }
  double separation() const { return dn(quantum_, classical_); }
  double boundary_fraction() const;
  // Largest |factor - 1| over the classical renormalizations so far.
  double max_renormalization_deviation() const { return max_renorm_dev_; }
  double quantum_mass_drift() const;

 private:
  EvolutionOptions options_;
  ModelParams params_;
  double D_;
  QuantumKicker kicker_;
  Field quantum_;
  Field classical_;
  double initial_mass_ = 1.0;
  double max_renorm_dev_ = 0.0;
};

struct DnSample {
  std::size_t n = 0;
  double dn = 0.0;
  bool boundary_flag = false;
};

struct DnSeries {
  ModelParams params;
  double D = 0.0;
  PhasePoint x0;
  std::vector<DnSample> values;
  bool boundary_flag = false;
  double max_boundary_fraction = 0.0;
  double max_renormalization_deviation = 0.0;
  double quantum_mass_drift = 0.0;

  std::vector<double> dn_values() const;
};

// Called with the evolution state before each kick n = 0..n_max.
using EvolutionObserver = std::function<void(const PairedEvolution&)>;

// D_n for n = 0..n_max.
DnSeries dn_series(PhasePoint x0, const ModelParams& params, double D,
                   std::size_t n_max, const EvolutionOptions& options,
                   const EvolutionObserver& observer = {});

struct Peak {
  std::size_t n = 0;
  double value = 0.0;
};

// First local maximum of the moving-average-smoothed series whose
// prominence exceeds prominence * max(series). Throws when none qualifies.
Peak first_peak(std::span<const double> series, std::size_t smooth_window = 3,
                double prominence = 0.05);
Peak first_peak(const DnSeries& s, std::size_t smooth_window = 3,
                double prominence = 0.05);

struct CollapseCurve {
  double eta = 0.0;
  std::vector<double> values;  // sample k taken at n = k
};

struct CollapseResult {
  double alpha = 0.0;
  double objective = 0.0;
  double objective_at_zero = 0.0;
  bool no_rescaling_detected = false;
};

// Mean pairwise RMS distance between curves on the rescaled axis s = n eta^alpha.
double collapse_objective(std::span<const CollapseCurve> curves, double alpha);

// Minimizes collapse_objective over alpha in [alpha_lo, alpha_hi].
CollapseResult collapse_alpha(std::span<const CollapseCurve> curves,
                              double alpha_lo = 0.1, double alpha_hi = 3.0);

struct ChiPeak {
  double chi = 0.0;
  double dn_peak = 0.0;
};

// Least-squares slope of log(dn_peak) against log(chi) over [chi_lo, chi_hi].
double slope_loglog(std::span<const ChiPeak> points, double chi_lo, double chi_hi);

struct ScalingLaw {
  double alpha = 1.0;   // regular-regime exponent
  double lambda = 1.0;  // local expansion coefficient (user supplied)
};

enum class Regime { regular, chaotic };

// regular: tau / eta^alpha; chaotic: (tau / lambda) ln(1 / eta)
double predicted_ts(const ScalingLaw& law, double eta, double tau, Regime regime);

// integral of symbol(q, p) * f
double observable_mean(const Field& f, const std::function<double(double, double)>& symbol);

// Dominant ripple period: lag of the first positive autocorrelation maximum
// at lag >= 2 of the series' first differences. nullopt when there is none.
std::optional<std::size_t> ripple_period(std::span<const double> series,
                                         std::size_t max_lag = 0);

}  // namespace kho

#endif  // KHO_METRICS_HPP
