#include "operators.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "spectral.hpp"

namespace kho::detail {

using spectral::Axis;
using cplx = std::complex<double>;

void shear_q(Field& f, double a) {
  if (a == 0.0) return;
  const auto& g = f.grid();
  spectral::apply_multiplier(f, Axis::q, [&](std::size_t ip, double w) {
    return std::polar(1.0, -w * a * g.p(ip));
  });
}

void shear_p(Field& f, double b) {
  if (b == 0.0) return;
  const auto& g = f.grid();
  spectral::apply_multiplier(f, Axis::p, [&](std::size_t iq, double w) {
    return std::polar(1.0, -w * b * g.q(iq));
  });
}

void rotate_by_shears(Field& f, double theta) {
  const double a = std::tan(0.5 * theta);
  const double b = -std::sin(theta);
  shear_q(f, a);
  shear_p(f, b);
  shear_q(f, a);
}

void smooth_gaussian(Field& f, double D) {
  if (D == 0.0) return;
  auto gauss = [D](std::size_t, double w) { return cplx(std::exp(-D * w * w), 0.0); };
  spectral::apply_multiplier(f, Axis::p, gauss);
  spectral::apply_multiplier(f, Axis::q, gauss);
}

void kick_shift_spectral(Field& f, double K) {
  if (K == 0.0) return;
  const auto& g = f.grid();
  std::vector<double> shift(g.nq());
  for (std::size_t i = 0; i < g.nq(); ++i) shift[i] = K * std::sin(g.q(i));
  spectral::apply_multiplier(f, Axis::p, [&](std::size_t iq, double w) {
    return std::polar(1.0, -w * shift[iq]);
  });
}

}  // namespace kho::detail
