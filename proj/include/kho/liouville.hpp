#ifndef KHO_LIOUVILLE_HPP
#define KHO_LIOUVILLE_HPP

#include "kho/grid.hpp"

namespace kho {

// How the classical distribution is transported on the grid.
//  semi_lagrangian: backward characteristics with monotone cubic (kick) and
//                   bicubic (rotation) interpolation.
//  spectral:        exact shifts and shears as phase ramps in the transform
//                   domain, the same rotation the quantum path uses.
enum class ClassicalScheme { semi_lagrangian, spectral };

const char* to_string(ClassicalScheme s) noexcept;

// Mass bookkeeping for one classical operation.
struct StepReport {
  double mass_in = 0.0;
  double mass_raw = 0.0;       // after transport and clamping, before renormalizing
  double clamped = 0.0;        // negative mass: removed (semi-Lagrangian) or kept (spectral)
  double renormalization = 1.0;  // factor applied (1 when not renormalized)
};

// out(q, p) = in(q, p - K sin q), monotone cubic along p, clamped and
// renormalized to the input mass.
Field classical_kick_advect(const Field& f, double K, StepReport* report = nullptr);

// out(x) = in(R^-1 x), bicubic; samples outside the domain read 0. Clamped,
// not renormalized.
Field classical_rotate(const Field& f, double nu_tau, StepReport* report = nullptr);

// One period: kick, rotate, smooth with variance 2D per axis, renormalized to
// the input mass with the factor reported. The semi-Lagrangian result is
// clamped to >= 0 first; the spectral one is left linear.
Field classical_step(const Field& f, const ModelParams& params, double D,
                     ClassicalScheme scheme = ClassicalScheme::semi_lagrangian,
                     StepReport* report = nullptr);

// The linear one-period classical propagator (spectral, no clamping or
// renormalization). Valid on signed fields.
Field smoothed_classical_propagate(const Field& f, const ModelParams& params,
                                   double D);

}  // namespace kho

#endif  // KHO_LIOUVILLE_HPP
