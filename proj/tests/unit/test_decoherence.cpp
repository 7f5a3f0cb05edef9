#include <doctest.h>

#include <cmath>
#include <random>

#include "kho/decoherence.hpp"
#include "kho/error.hpp"
#include "kho/metrics.hpp"

using namespace kho;

namespace {

double l1(const Field& a, const Field& b) { return l1_norm(linear_combination(1.0, a, -1.0, b)); }

ModelParams model(double K, double eta) {
  ModelParams m;
  m.K = K;
  m.eta = eta;
  return m;
}

double sig2(double x) {
  const int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double scale = std::pow(10.0, e - 1);
  return std::round(x / scale) * scale;
}

}  // namespace

TEST_CASE("diffuse") {
  const auto g = make_square_grid(4.0, 256);
  const auto f = coherent_state(g, {0.3, -0.2}, 0.25, FieldKind::classical);
  CHECK(l1(diffuse(f, 0.0), f) == 0.0);
  for (double D : {1e-3, 1e-2, 1e-1}) {
    CAPTURE(D);
    const auto d = diffuse(f, D);
    const auto a = moments(f), b = moments(d);
    CHECK(b.var_q - a.var_q == doctest::Approx(2 * D).epsilon(0.005).scale(0));
    CHECK(b.var_p - a.var_p == doctest::Approx(2 * D).epsilon(0.005).scale(0));
    CHECK(std::abs(integrate(d) - integrate(f)) <= 1e-12);
  }
  CHECK_THROWS_AS(diffuse(f, -1e-3), Error);
}

TEST_CASE("reservoir parameters") {
  const auto r = ReservoirParams::from_rates(2.0, 0.01, 0.25, 1.5);
  CHECK(r.D == doctest::Approx(2.0 * 0.01 * 0.0625 * 1.5).epsilon(1e-9).scale(0));
  ReservoirParams bad;
  bad.D = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("chi") {
  CHECK(sig2(chi(0.5, 0.25, 0.1)) == doctest::Approx(6.2e-2).epsilon(1e-9).scale(0));
  CHECK(sig2(chi(1.5, 0.03125, 0.1)) == doctest::Approx(4.5e-5).epsilon(1e-9).scale(0));
  CHECK(sig2(chi(0.5, 0.03125, 0.1)) == doctest::Approx(1.5e-5).epsilon(1e-9).scale(0));
  CHECK(sig2(chi(0.5, 0.0625, 0.01)) == doctest::Approx(7.6e-3).epsilon(1e-9).scale(0));
  CHECK(chi(0.0, 0.25, 0.1) == 0.0);
  CHECK_THROWS_AS(chi(0.5, 0.25, 0.0), Error);
}

TEST_CASE("f factor") {
  CHECK(f_factor(0.0) == 0.0);
  CHECK(f_factor(1.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-9).scale(0));
  double best = 0.0;
  for (int k = -50000; k <= 50000; ++k) {
    const double y = k * 1e-4;
    best = std::max(best, std::abs(f_factor(y) * std::exp(-y * y)));
  }
  CHECK(best == doctest::Approx(0.0811).epsilon(0.0005 / 0.0811).scale(0));
  CHECK(best <= 0.0815);
}

TEST_CASE("insertion step is mass free") {
  const auto g = make_square_grid(4.0, 128);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 10; ++t) {
    Field f(g, FieldKind::classical);
    for (double& v : f.values()) v = n01(rng);
    CHECK(std::abs(integrate(insertion_step(f, 0.5, 0.01, kPi / 3))) <= 1e-8);
  }

  Field columns(g, FieldKind::classical);
  for (std::size_t j = 0; j < g.np(); ++j) columns(g.nq() / 2, j) = 1.0;
  const auto z = insertion_step(columns, 0.5, 0.01, kPi / 3);
  CHECK(l1_norm(z) < 1e-12);

  const auto c = coherent_state(g, {0.0, 1.1}, 0.25, FieldKind::classical);
  const auto s = insertion_step(c, 0.5, 0.01, kPi / 3);
  double peak = 0.0;
  for (double v : s.values()) peak = std::max(peak, std::abs(v));
  CHECK(peak > 1e-3);
}

TEST_CASE("accumulated first-order correction") {
  const auto g = make_square_grid(4.0, 256);
  const auto w0 = coherent_state(g, {0.0, 1.1}, 0.25, FieldKind::classical);
  const auto m = model(0.5, 0.25);
  CHECK(std::abs(integrate(gj_sum(w0, 0, m, 0.1))) <= 1e-7);
  CHECK(std::abs(integrate(gj_sum(w0, 7, m, 0.1))) <= 1e-7);

  FirstOrderExpansion e(w0, m, 0.1);
  for (int n = 0; n < 8; ++n) e.advance();
  CHECK(l1(e.first(), gj_sum(w0, 7, m, 0.1)) < 1e-12);

  const auto series = dn_perturbative(w0, 8, m, 0.1);
  REQUIRE(series.size() == 8);
  CHECK(series[7] == doctest::Approx(chi(0.5, 0.25, 0.1) * l1_norm(e.first())).epsilon(1e-12).scale(0));

  for (double v : dn_perturbative(w0, 5, model(0.0, 0.25), 0.1)) CHECK(v == 0.0);
}

TEST_CASE("perturbative series is linear in chi as K vanishes") {
  const auto g = make_square_grid(4.0, 256);
  const auto w0 = coherent_state(g, {0.0, 1.1}, 0.25, FieldKind::classical);
  const auto a = dn_perturbative(w0, 5, model(1e-3, 0.25), 0.1);
  const auto b = dn_perturbative(w0, 5, model(2e-3, 0.25), 0.1);
  for (std::size_t n = 0; n < 5; ++n)
    CHECK(b[n] / chi(2e-3, 0.25, 0.1) ==
          doctest::Approx(a[n] / chi(1e-3, 0.25, 0.1)).epsilon(0.01).scale(0));
}

TEST_CASE("first-order correction tracks the full pipelines") {
  // chi ~ 6e-2: ten kicks from (0, 1.1)
  const auto params = model(0.5, 0.25);
  const double D = 0.1;
  EvolutionOptions opt;
  opt.grid = make_square_grid(4.5, 256);
  opt.classical_scheme = ClassicalScheme::spectral;
  const auto full = dn_series({0.0, 1.1}, params, D, 10, opt);
  const auto w0 = coherent_state(opt.grid, {0.0, 1.1}, 0.25, FieldKind::classical);
  const double approx = chi(0.5, 0.25, D) * l1_norm(gj_sum(w0, 9, params, D));
  CHECK(approx == doctest::Approx(full.values[10].dn).epsilon(0.3).scale(0));
}

TEST_CASE("observable differences follow the first-order correction") {
  // chi = 7.6e-3
  const auto params = model(0.5, 0.0625);
  const double D = 0.01;
  EvolutionOptions opt;
  opt.grid = make_square_grid(3.0, 384);
  opt.classical_scheme = ClassicalScheme::spectral;
  const PhasePoint x0{0.0, 1.1};
  PairedEvolution ev(opt, x0, params, D);
  const std::size_t n = 10;
  for (std::size_t k = 0; k < n; ++k) ev.step();
  const auto w0 = coherent_state(opt.grid, x0, params.eta, FieldKind::classical);
  const auto g = gj_sum(w0, n - 1, params, D);
  const double c = chi(params.K, params.eta, D);
  const std::function<double(double, double)> obs[] = {
      [](double q, double) { return q; },
      [](double, double p) { return p; },
      [](double q, double p) { return q * q + p * p; }};
  for (const auto& o : obs) {
    const double full = observable_mean(ev.quantum(), o) - observable_mean(ev.classical(), o);
    const double pert = c * observable_mean(g, o);
    CHECK(std::abs(full - pert) <= 0.35 * std::abs(pert));
  }
}
