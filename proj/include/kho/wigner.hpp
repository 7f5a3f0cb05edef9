#ifndef KHO_WIGNER_HPP
#define KHO_WIGNER_HPP

#include <cstddef>
#include <vector>

#include "kho/grid.hpp"

namespace kho {

struct BesselWeight {
  long m = 0;
  double w = 0.0;
};

struct BesselComb {
  std::vector<BesselWeight> weights;  // m = -M..M in order
  double raw_sum = 0.0;               // sum of J_m(a) before renormalization
  long order = 0;                     // M
};

// Weights J_m(a), a = K sin(q) / eta^2, truncated at the smallest order M >= |a|
// whose partial sum is within tol of one (or where the tail has reached
// rounding level), then renormalized to unit sum.
BesselComb bessel_kick_weights(double q, double K, double eta, double tol = 1e-14);

// How the exact kick is evaluated on the grid.
//  comb:      sparse sum over momentum shifts m eta^2; needs eta^2 = s dp.
//  spectral:  the same operator as the phase exp(-i a sin(omega eta^2)) in the
//             p transform; works on any grid.
//  automatic: comb when the grid is commensurate, spectral otherwise.
enum class KickMethod { automatic, comb, spectral };

const char* to_string(KickMethod m) noexcept;

// Exact one-kick Wigner map by the Bessel comb. Throws grid_mismatch when
// eta^2 is not an integer multiple of dp.
Field quantum_kick(const Field& f, double K, double eta);

// Exact one-kick Wigner map evaluated in the p transform domain.
Field quantum_kick_spectral(const Field& f, double K, double eta);

// Harmonic evolution between kicks: rotation by nu_tau done as three shears.
Field quantum_rotate(const Field& f, double nu_tau);

// Stationary-phase (Airy) approximation of the kick propagator.
Field airy_kick(const Field& f, double K, double eta);

// Precomputed per-column combs for repeated kicks on one grid.
class QuantumKicker {
 public:
  QuantumKicker(const PhaseSpaceGrid& grid, double K, double eta,
                KickMethod method = KickMethod::automatic, double tol = 1e-14);

  Field apply(const Field& f) const;
  KickMethod method() const { return method_; }

 private:
  PhaseSpaceGrid grid_;
  double K_;
  double eta_;
  KickMethod method_;
  std::size_t stride_ = 0;
  std::vector<BesselComb> combs_;
};

// One period: kick, rotate, smooth with variance 2D per axis.
Field quantum_step(const Field& f, const ModelParams& params, double D,
                   KickMethod method = KickMethod::automatic);

}  // namespace kho

#endif  // KHO_WIGNER_HPP
