#include "kho/maps.hpp"

#include <cmath>

#include "kho/error.hpp"

namespace kho {

PhasePoint kick_map(PhasePoint x, double K) {
  return {x.q, x.p + K * std::sin(x.q)};
}

PhasePoint rotate_map(PhasePoint x, double nu_tau) {
  const double c = std::cos(nu_tau);
  const double s = std::sin(nu_tau);
  return {c * x.q + s * x.p, -s * x.q + c * x.p};
}

PhasePoint strobe_step(PhasePoint x, const ModelParams& params) {
  return rotate_map(kick_map(x, params.K), params.nu_tau);
}

Jacobian strobe_jacobian(PhasePoint x, const ModelParams& params) {
  const double c = std::cos(params.nu_tau);
  const double s = std::sin(params.nu_tau);
  const double kc = params.K * std::cos(x.q);
  // R * [[1, 0], [K cos q, 1]]
  return {{{c + s * kc, s}, {-s + c * kc, c}}};
}

const char* to_string(Stability s) noexcept {
  switch (s) {
    case Stability::elliptic: return "elliptic";
    case Stability::parabolic: return "parabolic";
    case Stability::hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

StabilityClass classify_trace(double trace) {
  StabilityClass out;
  out.trace = trace;
  const double excess = std::abs(trace) - 2.0;
  if (std::abs(excess) <= 1e-12) {
    out.kind = Stability::parabolic;
  } else if (excess < 0.0) {
    out.kind = Stability::elliptic;
  } else {
    out.kind = Stability::hyperbolic;
  }
  return out;
}

StabilityClass classify_origin(double K, double nu_tau) {
  return classify_trace(2.0 * std::cos(nu_tau) + K * std::sin(nu_tau));
}

double critical_kick(double nu_tau) {
  const double s = std::sin(nu_tau);
  require(s != 0.0, ErrorCode::invalid_argument,
          "no kick threshold for nu_tau = 0 mod pi");
  return (2.0 - 2.0 * std::cos(nu_tau)) / s;
}

std::vector<SectionPoint> poincare_section(std::span<const PhasePoint> seeds,
                                           std::size_t n_iter,
                                           const ModelParams& params) {
  require(n_iter >= 1, ErrorCode::invalid_argument, "n_iter must be >= 1");
  std::vector<SectionPoint> out;
  out.reserve(seeds.size() * n_iter);
  for (std::size_t id = 0; id < seeds.size(); ++id) {
    PhasePoint x = seeds[id];
    for (std::size_t k = 1; k <= n_iter; ++k) {
      x = strobe_step(x, params);
      out.push_back({id, k, x.q, x.p});
    }
  }
  return out;
}

FixedPoint find_period1_point(PhasePoint guess, const ModelParams& params) {
  require(params.K > 0.0, ErrorCode::invalid_argument,
          "fixed-point search needs K > 0");
  PhasePoint x = guess;
  for (std::size_t it = 0; it < 100; ++it) {
    const PhasePoint fx = strobe_step(x, params);
    const double rq = fx.q - x.q;
    const double rp = fx.p - x.p;
    if (std::hypot(rq, rp) < 1e-10) {
      const Jacobian J = strobe_jacobian(x, params);
      return {x, classify_trace(J[0][0] + J[1][1]), it};
    }
    Jacobian J = strobe_jacobian(x, params);
    J[0][0] -= 1.0;
    J[1][1] -= 1.0;
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    require(std::abs(det) > 1e-300, ErrorCode::numerical,
            "singular Newton system in fixed-point search");
    x.q -= (J[1][1] * rq - J[0][1] * rp) / det;
    x.p -= (-J[1][0] * rq + J[0][0] * rp) / det;
  }
  fail(ErrorCode::numerical, "fixed-point search did not converge in 100 steps");
}

}  // namespace kho
