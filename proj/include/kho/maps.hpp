#ifndef KHO_MAPS_HPP
#define KHO_MAPS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "kho/grid.hpp"

namespace kho {

using Jacobian = std::array<std::array<double, 2>, 2>;

// p -> p + K sin q
PhasePoint kick_map(PhasePoint x, double K);
// Clockwise phase-space rotation by nu_tau (harmonic evolution between kicks).
PhasePoint rotate_map(PhasePoint x, double nu_tau);
// One period: kick, then rotate.
PhasePoint strobe_step(PhasePoint x, const ModelParams& params);
// Exact derivative of strobe_step at x.
Jacobian strobe_jacobian(PhasePoint x, const ModelParams& params);

enum class Stability { elliptic, parabolic, hyperbolic };

const char* to_string(Stability s) noexcept;

struct StabilityClass {
  Stability kind = Stability::elliptic;
  double trace = 0.0;
};

StabilityClass classify_trace(double trace);

// Linearization of the period map at the origin: trace = 2 cos(nu_tau) +
// K sin(nu_tau).
StabilityClass classify_origin(double K, double nu_tau);

// K at which the origin turns parabolic (2/sqrt(3) for nu_tau = pi/3).
double critical_kick(double nu_tau);

struct SectionPoint {
  std::size_t seed_id = 0;
  std::size_t iter = 0;
  double q = 0.0;
  double p = 0.0;
};

// Orbit points k = 1..n_iter for each seed, seed-major.
std::vector<SectionPoint> poincare_section(std::span<const PhasePoint> seeds,
                                           std::size_t n_iter,
                                           const ModelParams& params);

struct FixedPoint {
  PhasePoint x;
  StabilityClass stability;
  std::size_t iterations = 0;
};

// Newton search for a period-1 point starting at `guess`.
FixedPoint find_period1_point(PhasePoint guess, const ModelParams& params);

}  // namespace kho

#endif  // KHO_MAPS_HPP
