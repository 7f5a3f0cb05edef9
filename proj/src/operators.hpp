#ifndef KHO_SRC_OPERATORS_HPP
#define KHO_SRC_OPERATORS_HPP

// Transform-domain building blocks shared by the quantum path, the spectral
// classical path and the first-order machinery. All act in place.

#include "kho/grid.hpp"

namespace kho::detail {

// out(q, p) = in(q - a p, p)
void shear_q(Field& f, double a);
// out(q, p) = in(q, p - b q)
void shear_p(Field& f, double b);
// out(x) = in(R^-1 x), R the clockwise rotation by theta, as three shears.
void rotate_by_shears(Field& f, double theta);
// Convolution with an isotropic Gaussian of variance 2D per axis.
void smooth_gaussian(Field& f, double D);
// out(q, p) = in(q, p - K sin q), as a phase ramp in the p transform.
void kick_shift_spectral(Field& f, double K);

}  // namespace kho::detail

#endif  // KHO_SRC_OPERATORS_HPP
