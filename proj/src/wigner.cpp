#include "kho/wigner.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "kho/decoherence.hpp"
#include "kho/error.hpp"
#include "operators.hpp"
#include "spectral.hpp"

namespace kho {
namespace {

void require_quantum(const Field& f) {
  require(f.kind() == FieldKind::quantum, ErrorCode::invalid_argument,
          "quantum operation applied to a classical field");
}

// J_0(x)..J_top(x) for x > 0 by Miller's backward recurrence, normalized by
// J_0 + 2 sum J_2k = 1 over the full sequence. Stable at orders where
// std::cyl_bessel_j underflows to NaN.
std::vector<double> bessel_sequence(double x, long top) {
  const long start = top + 32 + static_cast<long>(std::sqrt(40.0 * static_cast<double>(top)));
  std::vector<double> j(static_cast<std::size_t>(top) + 1, 0.0);
  double above = 0.0, cur = 1e-300;
  for (long m = start; m > 0; --m) {
    const double below = 2.0 * static_cast<double>(m) / x * cur - above;
    above = cur;
    cur = below;
    if (m - 1 <= top) j[static_cast<std::size_t>(m - 1)] = cur;
    if (m <= top) j[static_cast<std::size_t>(m)] = above;
    if (std::abs(cur) > 1e100) {
      for (auto& v : j) v *= 1e-100;
      cur *= 1e-100;
      above *= 1e-100;
    }
  }
  double norm = j[0];
  for (std::size_t m = 2; m < j.size(); m += 2) norm += 2.0 * j[m];
  const double scale = 1.0 / norm;
  for (auto& v : j) v *= scale;
  return j;
}

}  // namespace

const char* to_string(KickMethod m) noexcept {
  switch (m) {
    case KickMethod::automatic: return "automatic";
    case KickMethod::comb: return "comb";
    case KickMethod::spectral: return "spectral";
  }
  return "unknown";
}

BesselComb bessel_kick_weights(double q, double K, double eta, double tol) {
  require(tol > 0.0, ErrorCode::invalid_argument, "tolerance must be positive");
  require(eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
  const double a = K * std::sin(q) / (eta * eta);
  BesselComb comb;
  if (std::abs(a) < 1e-100) {  // J_1(a) ~ a / 2 is invisible next to J_0
    comb.weights = {{0, 1.0}};
    comb.raw_sum = 1.0;
    return comb;
  }
  const double abs_a = std::abs(a);
  // Past this order the terms are far below rounding of the partial sum.
  const auto top = static_cast<long>(abs_a + 30.0 + 15.0 * std::cbrt(abs_a));
  require(top <= 1000000, ErrorCode::numerical, "Bessel truncation order exceeds 1e6");
  const auto positive = bessel_sequence(abs_a, top);
  double sum = positive[0];
  long M = 0;
  while (M < top) {
    if (static_cast<double>(M) >= abs_a && std::abs(1.0 - sum) <= tol &&
        std::abs(positive[static_cast<std::size_t>(M)]) <= tol)
      break;
    ++M;
    // J_{-m} = (-1)^m J_m
    if (M % 2 == 0) sum += 2.0 * positive[static_cast<std::size_t>(M)];
  }
  comb.order = M;
  comb.raw_sum = sum;
  comb.weights.reserve(static_cast<std::size_t>(2 * M + 1));
  for (long m = -M; m <= M; ++m) {
    const long am = std::abs(m);
    double w = positive[static_cast<std::size_t>(am)];
    // J_{-m}(x) = (-1)^m J_m(x) and J_m(-x) = (-1)^m J_m(x)
    if (am % 2 != 0 && ((m < 0) != (a < 0.0))) w = -w;
    comb.weights.push_back({m, w / sum});
  }
  return comb;
}

QuantumKicker::QuantumKicker(const PhaseSpaceGrid& grid, double K, double eta,
                             KickMethod method, double tol)
    : grid_(grid), K_(K), eta_(eta), method_(method) {
  require(eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
  const auto stride = grid.comb_stride(eta);
  if (method_ == KickMethod::automatic) {
    method_ = stride ? KickMethod::comb : KickMethod::spectral;
  }
  if (method_ == KickMethod::comb) {
    require(stride.has_value(), ErrorCode::grid_mismatch,
            "grid momentum spacing " + std::to_string(grid.dp()) +
                " does not divide eta^2 = " + std::to_string(eta * eta));
    stride_ = *stride;
    combs_.reserve(grid.nq());
    for (std::size_t i = 0; i < grid.nq(); ++i) {
      combs_.push_back(bessel_kick_weights(grid.q(i), K, eta, tol));
    }
  }
}

Field QuantumKicker::apply(const Field& f) const {
  require_quantum(f);
  require(f.grid() == grid_, ErrorCode::grid_mismatch,
          "field grid differs from the kicker grid");
  if (method_ == KickMethod::spectral) return quantum_kick_spectral(f, K_, eta_);

  Field out(grid_, f.kind(), f.kick_index());
  const auto np = static_cast<long>(grid_.np());
  const auto s = static_cast<long>(stride_);
  for (std::size_t i = 0; i < grid_.nq(); ++i) {
    auto in = f.row(i);
    auto dst = out.row(i);
    const auto& comb = combs_[i];
    if (comb.weights.size() == 1) {
      std::copy(in.begin(), in.end(), dst.begin());
      continue;
    }
    for (const auto& [m, w] : comb.weights) {
      // dst[j] += w * in[j - m s], periodic in p
      long offset = (-m * s) % np;
      if (offset < 0) offset += np;
      const auto off = static_cast<std::size_t>(offset);
      const std::size_t n = in.size();
      for (std::size_t j = 0; j < n - off; ++j) dst[j] += w * in[j + off];
      for (std::size_t j = n - off; j < n; ++j) dst[j] += w * in[j + off - n];
    }
  }
  return out;
}

Field quantum_kick(const Field& f, double K, double eta) {
  return QuantumKicker(f.grid(), K, eta, KickMethod::comb).apply(f);
}

Field quantum_kick_spectral(const Field& f, double K, double eta) {
  require_quantum(f);
  require(eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
  Field out = f;
  if (K == 0.0) return out;
  const auto& g = f.grid();
  const double eta2 = eta * eta;
  std::vector<double> amp(g.nq());
  for (std::size_t i = 0; i < g.nq(); ++i) amp[i] = K * std::sin(g.q(i)) / eta2;
  spectral::apply_multiplier(out, spectral::Axis::p, [&](std::size_t iq, double w) {
    return std::polar(1.0, -amp[iq] * std::sin(w * eta2));
  });
  return out;
}

Field quantum_rotate(const Field& f, double nu_tau) {
  require_quantum(f);
  Field out = f;
  detail::rotate_by_shears(out, nu_tau);
  return out;
}

Field airy_kick(const Field& f, double K, double eta) {
  require_quantum(f);
  require(eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
  Field out = f;
  if (K == 0.0) return out;
  const auto& g = f.grid();
  const double eta4 = eta * eta * eta * eta;
  std::vector<double> shift(g.nq());
  std::vector<double> b(g.nq());
  for (std::size_t i = 0; i < g.nq(); ++i) {
    shift[i] = K * std::sin(g.q(i));
    b[i] = 0.5 * eta4 * shift[i];
  }
  // The Airy kernel |b|^{-1/3} Ai(-sign(b) |b|^{-1/3} (p' - p + K sin q)) is
  // the inverse transform of exp(-i omega K sin q + i b omega^3 / 3).
  spectral::apply_multiplier(out, spectral::Axis::p, [&](std::size_t iq, double w) {
    return std::polar(1.0, -w * shift[iq] + b[iq] * w * w * w / 3.0);
  });
  return out;
}

Field quantum_step(const Field& f, const ModelParams& params, double D,
                   KickMethod method) {
  require(D >= 0.0 && std::isfinite(D), ErrorCode::invalid_argument,
          "D must be finite and non-negative");
  QuantumKicker kicker(f.grid(), params.K, params.eta, method);
  Field out = kicker.apply(f);
  detail::rotate_by_shears(out, params.nu_tau);
  detail::smooth_gaussian(out, D);
  out.set_kick_index(f.kick_index() + 1);
  return out;
}

}  // namespace kho
