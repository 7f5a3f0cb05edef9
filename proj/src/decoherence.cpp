#include "kho/decoherence.hpp"

#include <cmath>
#include <complex>

#include "kho/error.hpp"
#include "kho/liouville.hpp"
#include "operators.hpp"
#include "spectral.hpp"

namespace kho {

ReservoirParams ReservoirParams::from_rates(double n_bar, double gamma,
                                            double eta, double tau) {
  ReservoirParams r;
  r.D = n_bar * gamma * eta * eta * tau;
  r.validate();
  return r;
}

void ReservoirParams::validate() const {
  require(std::isfinite(D) && D >= 0.0, ErrorCode::invalid_argument,
          "D must be finite and non-negative");
}

Field diffuse(const Field& f, double D) {
  require(std::isfinite(D) && D >= 0.0, ErrorCode::invalid_argument,
          "D must be finite and non-negative");
  Field out = f;
  detail::smooth_gaussian(out, D);
  return out;
}

double chi(double K, double eta, double D) {
  require(D > 0.0, ErrorCode::invalid_argument, "chi is undefined for D = 0");
  const double eta2 = eta * eta;
  return K * eta2 * eta2 / (D * std::sqrt(D));
}

double f_factor(double y) { return 0.25 * (y - 2.0 * y * y * y / 3.0); }

Field insertion_step(const Field& f, double K, double D, double nu_tau) {
  require(D > 0.0, ErrorCode::invalid_argument,
          "the insertion kernel needs D > 0");
  const auto& g = f.grid();
  Field out(g, FieldKind::classical, f.kick_index());
  std::vector<double> shift(g.nq());
  for (std::size_t i = 0; i < g.nq(); ++i) {
    const double s = std::sin(g.q(i));
    shift[i] = K * s;
    auto src = f.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < g.np(); ++j) dst[j] = s * src[j];
  }
  // Transform of f(-dp / 2 sqrt D) exp(-dp^2 / 4D) / sqrt(4 pi D) is
  // (i D^{3/2} omega^3 / 6) exp(-D omega^2); the kick is a phase ramp.
  const double d32 = D * std::sqrt(D);
  spectral::apply_multiplier(out, spectral::Axis::p, [&](std::size_t iq, double w) {
    const std::complex<double> kernel(0.0, d32 * w * w * w / 6.0 * std::exp(-D * w * w));
    return kernel * std::polar(1.0, -w * shift[iq]);
  });
  spectral::apply_multiplier(out, spectral::Axis::q, [D](std::size_t, double w) {
    return std::complex<double>(std::exp(-D * w * w), 0.0);
  });
  detail::rotate_by_shears(out, nu_tau);
  return out;
}

FirstOrderExpansion::FirstOrderExpansion(Field initial, const ModelParams& params,
                                         double D)
    : params_(params), D_(D), zeroth_(std::move(initial)),
      first_(zeroth_.grid(), FieldKind::classical, zeroth_.kick_index()) {
  require(D > 0.0, ErrorCode::invalid_argument,
          "first-order expansion needs D > 0");
  zeroth_.set_kind(FieldKind::classical);
}

void FirstOrderExpansion::advance() {
  Field inserted = insertion_step(zeroth_, params_.K, D_, params_.nu_tau);
  Field carried = smoothed_classical_propagate(first_, params_, D_);
  first_ = linear_combination(1.0, carried, 1.0, inserted);
  zeroth_ = smoothed_classical_propagate(zeroth_, params_, D_);
  ++kicks_;
  first_.set_kick_index(zeroth_.kick_index());
}

Field gj_sum(const Field& W0, std::size_t n, const ModelParams& params, double D) {
  FirstOrderExpansion expansion(W0, params, D);
  for (std::size_t k = 0; k <= n; ++k) expansion.advance();
  return expansion.first();
}

std::vector<double> dn_perturbative(const Field& W0, std::size_t n_max,
                                    const ModelParams& params, double D) {
  const double c = chi(params.K, params.eta, D);
  FirstOrderExpansion expansion(W0, params, D);
  std::vector<double> out;
  out.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    expansion.advance();
    out.push_back(c * l1_norm(expansion.first()));
  }
  return out;
}

}  // namespace kho
