#include "kho/liouville.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "kho/decoherence.hpp"
#include "kho/error.hpp"
#include "operators.hpp"

namespace kho {
namespace {

void require_classical(const Field& f) {
  require(f.kind() == FieldKind::classical, ErrorCode::invalid_argument,
          "classical operation applied to a quantum field");
}

// Clamps negatives to zero; returns the mass added.
double clamp_negative(Field& f) {
  double added = 0.0;
  for (double& v : f.values()) {
    if (v < 0.0) {
      added -= v;
      v = 0.0;
    }
  }
  return added * f.grid().cell_area();
}

// Fritsch-Butland slopes for equally spaced samples; y outside [0, n) is 0.
void monotone_slopes(std::span<const double> y, std::vector<double>& m) {
  const std::size_t n = y.size();
  m.assign(n, 0.0);
  auto at = [&](std::ptrdiff_t k) {
    return k < 0 || k >= static_cast<std::ptrdiff_t>(n) ? 0.0 : y[static_cast<std::size_t>(k)];
  };
  for (std::size_t k = 0; k < n; ++k) {
    const auto ik = static_cast<std::ptrdiff_t>(k);
    const double left = at(ik) - at(ik - 1);
    const double right = at(ik + 1) - at(ik);
    if (left * right > 0.0) m[k] = 2.0 * left * right / (left + right);
  }
}

// Keys cubic convolution weights (a = -1/2) for fractional offset t in [0, 1).
std::array<double, 4> cubic_weights(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {-0.5 * t3 + t2 - 0.5 * t,
          1.5 * t3 - 2.5 * t2 + 1.0,
          -1.5 * t3 + 2.0 * t2 + 0.5 * t,
          0.5 * t3 - 0.5 * t2};
}

}  // namespace

const char* to_string(ClassicalScheme s) noexcept {
  return s == ClassicalScheme::spectral ? "spectral" : "semi_lagrangian";
}

Field classical_kick_advect(const Field& f, double K, StepReport* report) {
  require_classical(f);
  const auto& g = f.grid();
  Field out(g, f.kind(), f.kick_index());
  const double mass_in = integrate(f);
  const auto np = static_cast<std::ptrdiff_t>(g.np());
  std::vector<double> slope;
  for (std::size_t i = 0; i < g.nq(); ++i) {
    auto in = f.row(i);
    auto dst = out.row(i);
    const double shift = K * std::sin(g.q(i)) / g.dp();
    if (shift == 0.0) {
      std::copy(in.begin(), in.end(), dst.begin());
      continue;
    }
    monotone_slopes(in, slope);
    auto y = [&](std::ptrdiff_t k) { return k < 0 || k >= np ? 0.0 : in[static_cast<std::size_t>(k)]; };
    auto m = [&](std::ptrdiff_t k) { return k < 0 || k >= np ? 0.0 : slope[static_cast<std::size_t>(k)]; };
    for (std::ptrdiff_t j = 0; j < np; ++j) {
      const double x = static_cast<double>(j) - shift;
      const double fl = std::floor(x);
      const auto k = static_cast<std::ptrdiff_t>(fl);
      if (k < -1 || k >= np) continue;
      const double t = x - fl;
      const double t2 = t * t;
      const double t3 = t2 * t;
      const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
      const double h10 = t3 - 2.0 * t2 + t;
      const double h01 = -2.0 * t3 + 3.0 * t2;
      const double h11 = t3 - t2;
      dst[static_cast<std::size_t>(j)] =
          h00 * y(k) + h10 * m(k) + h01 * y(k + 1) + h11 * m(k + 1);
    }
  }
  StepReport r;
  r.mass_in = mass_in;
  r.clamped = clamp_negative(out);
  r.mass_raw = integrate(out);
  if (r.mass_raw > 0.0) {
    r.renormalization = mass_in / r.mass_raw;
    for (double& v : out.values()) v *= r.renormalization;
  }
  if (report) *report = r;
  return out;
}

Field classical_rotate(const Field& f, double nu_tau, StepReport* report) {
  require_classical(f);
  const auto& g = f.grid();
  Field out(g, f.kind(), f.kick_index());
  const double c = std::cos(nu_tau);
  const double s = std::sin(nu_tau);
  const auto nq = static_cast<std::ptrdiff_t>(g.nq());
  const auto np = static_cast<std::ptrdiff_t>(g.np());
  const double q0 = 0.5 * static_cast<double>(g.nq());
  const double p0 = 0.5 * static_cast<double>(g.np());
  auto in = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
    if (i < 0 || i >= nq || j < 0 || j >= np) return 0.0;
    return f(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  for (std::ptrdiff_t i = 0; i < nq; ++i) {
    const double q = g.q(static_cast<std::size_t>(i));
    auto dst = out.row(static_cast<std::size_t>(i));
    for (std::ptrdiff_t j = 0; j < np; ++j) {
      const double p = g.p(static_cast<std::size_t>(j));
      const double xq = (c * q - s * p) / g.dq() + q0;
      const double xp = (s * q + c * p) / g.dp() + p0;
      const double fq = std::floor(xq);
      const double fp = std::floor(xp);
      const auto iq = static_cast<std::ptrdiff_t>(fq);
      const auto ip = static_cast<std::ptrdiff_t>(fp);
      if (iq < -2 || iq > nq || ip < -2 || ip > np) continue;
      const auto wq = cubic_weights(xq - fq);
      const auto wp = cubic_weights(xp - fp);
      double acc = 0.0;
      for (std::ptrdiff_t a = 0; a < 4; ++a) {
        double line = 0.0;
        for (std::ptrdiff_t b = 0; b < 4; ++b) {
          line += wp[static_cast<std::size_t>(b)] * in(iq - 1 + a, ip - 1 + b);
        }
        acc += wq[static_cast<std::size_t>(a)] * line;
      }
      dst[static_cast<std::size_t>(j)] = acc;
    }
  }
  StepReport r;
  r.mass_in = integrate(f);
  r.clamped = clamp_negative(out);
  r.mass_raw = integrate(out);
  if (report) *report = r;
  return out;
}

Field classical_step(const Field& f, const ModelParams& params, double D,
                     ClassicalScheme scheme, StepReport* report) {
  require_classical(f);
  require(D >= 0.0 && std::isfinite(D), ErrorCode::invalid_argument,
          "D must be finite and non-negative");
  const double mass_in = integrate(f);
  double factor = 1.0;
  Field out;
  if (scheme == ClassicalScheme::semi_lagrangian) {
    StepReport kick;
    out = classical_kick_advect(f, params.K, &kick);
    factor = kick.renormalization;
    out = classical_rotate(out, params.nu_tau);
    out = diffuse(out, D);
  } else {
    out = f;
    detail::kick_shift_spectral(out, params.K);
    detail::rotate_by_shears(out, params.nu_tau);
    detail::smooth_gaussian(out, D);
  }
  StepReport r;
  r.mass_in = mass_in;
  // The spectral path is linear: clamping would bias D_n far above its
  // O(chi) signal when chi is small. Negative mass is reported, not removed.
  if (scheme == ClassicalScheme::semi_lagrangian) {
    r.clamped = clamp_negative(out);
  } else {
    for (double v : out.values())
      if (v < 0.0) r.clamped -= v;
    r.clamped *= out.grid().cell_area();
  }
  r.mass_raw = integrate(out);
  if (r.mass_raw > 0.0) {
    const double step = mass_in / r.mass_raw;
    for (double& v : out.values()) v *= step;
    factor *= step;
  }
  r.renormalization = factor;
  out.set_kick_index(f.kick_index() + 1);
  if (report) *report = r;
  return out;
}

Field smoothed_classical_propagate(const Field& f, const ModelParams& params,
                                   double D) {
  require(D >= 0.0, ErrorCode::invalid_argument, "D must be non-negative");
  Field out = f;
  detail::kick_shift_spectral(out, params.K);
  detail::rotate_by_shears(out, params.nu_tau);
  detail::smooth_gaussian(out, D);
  out.set_kick_index(f.kick_index() + 1);
  return out;
}

}  // namespace kho
