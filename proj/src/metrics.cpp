#include "kho/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kho/decoherence.hpp"
#include "kho/error.hpp"
#include "operators.hpp"

namespace kho {

double dn(const Field& quantum, const Field& classical) {
  require_same_grid(quantum, classical);
  auto a = quantum.values();
  auto b = classical.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
  return sum * quantum.grid().cell_area();
}

PairedEvolution::PairedEvolution(const EvolutionOptions& options, PhasePoint x0,
                                 const ModelParams& params, double D)
    : options_(options), params_(params), D_(D),
      kicker_(options.grid, params.K, params.eta, options.kick_method),
      quantum_(coherent_state(options.grid, x0, params.eta, FieldKind::quantum)),
      classical_(coherent_state(options.grid, x0, params.eta, FieldKind::classical)) {
  params.validate();
  require(std::isfinite(D) && D >= 0.0, ErrorCode::invalid_argument,
          "D must be finite and non-negative");
  initial_mass_ = integrate(quantum_);
}

void PairedEvolution::step() {
  const std::size_t n = quantum_.kick_index();
  Field q = kicker_.apply(quantum_);
  detail::rotate_by_shears(q, params_.nu_tau);
  detail::smooth_gaussian(q, D_);
  q.set_kick_index(n + 1);
  quantum_ = std::move(q);

  StepReport report;
  classical_ = classical_step(classical_, params_, D_, options_.classical_scheme, &report);
  max_renorm_dev_ = std::max(max_renorm_dev_, std::abs(report.renormalization - 1.0));
}

double PairedEvolution::boundary_fraction() const {
  return std::max(boundary_mass_fraction(quantum_), boundary_mass_fraction(classical_));
}

double PairedEvolution::quantum_mass_drift() const {
  return integrate(quantum_) - initial_mass_;
}

std::vector<double> DnSeries::dn_values() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& s : values) out.push_back(s.dn);
  return out;
}

DnSeries dn_series(PhasePoint x0, const ModelParams& params, double D,
                   std::size_t n_max, const EvolutionOptions& options,
                   const EvolutionObserver& observer) {
  PairedEvolution evo(options, x0, params, D);
  DnSeries series;
  series.params = params;
  series.D = D;
  series.x0 = x0;
  series.values.reserve(n_max + 1);
  for (std::size_t n = 0;; ++n) {
    const double frac = evo.boundary_fraction();
    const bool flag = frac > options.boundary_threshold;
    series.values.push_back({n, evo.separation(), flag});
    series.boundary_flag = series.boundary_flag || flag;
    series.max_boundary_fraction = std::max(series.max_boundary_fraction, frac);
    if (observer) observer(evo);
    if (n == n_max) break;
    evo.step();
  }
  series.max_renormalization_deviation = evo.max_renormalization_deviation();
  series.quantum_mass_drift = evo.quantum_mass_drift();
  return series;
}

Peak first_peak(std::span<const double> series, std::size_t smooth_window,
                double prominence) {
  require(series.size() >= 3, ErrorCode::invalid_argument,
          "peak search needs at least 3 samples");
  require(smooth_window >= 1 && smooth_window % 2 == 1, ErrorCode::invalid_argument,
          "smoothing window must be odd");
  const std::size_t n = series.size();
  const std::size_t half = smooth_window / 2;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += series[k];
    s[i] = acc / static_cast<double>(hi - lo + 1);
  }
  const double threshold = prominence * *std::max_element(series.begin(), series.end());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(s[i] > s[i - 1] && s[i] >= s[i + 1])) continue;
    // Walk outwards until the series rises above the candidate.
    double left_min = s[i];
    for (std::size_t k = i; k-- > 0;) {
      if (s[k] > s[i]) break;
      left_min = std::min(left_min, s[k]);
    }
    double right_min = s[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      if (s[k] > s[i]) break;
      right_min = std::min(right_min, s[k]);
    }
    const double prom = s[i] - std::max(left_min, right_min);
    if (prom > threshold) return {i, series[i]};
  }
  fail(ErrorCode::numerical, "no peak");
}

Peak first_peak(const DnSeries& s, std::size_t smooth_window, double prominence) {
  const auto v = s.dn_values();
  Peak p = first_peak(v, smooth_window, prominence);
  p.n = s.values[p.n].n;
  return p;
}

namespace {

double sample_linear(const std::vector<double>& v, double x) {
  if (x <= 0.0) return v.front();
  const double last = static_cast<double>(v.size() - 1);
  if (x >= last) return v.back();
  const auto i = static_cast<std::size_t>(x);
  const double t = x - static_cast<double>(i);
  return (1.0 - t) * v[i] + t * v[i + 1];
}

}  // namespace

double collapse_objective(std::span<const CollapseCurve> curves, double alpha) {
  constexpr std::size_t kSamples = 256;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      const auto& ca = curves[a];
      const auto& cb = curves[b];
      const double sa = std::pow(ca.eta, alpha);
      const double sb = std::pow(cb.eta, alpha);
      // Both start at s = 0; overlap ends at the shorter rescaled support.
      const double s_end = std::min(static_cast<double>(ca.values.size() - 1) * sa,
                                    static_cast<double>(cb.values.size() - 1) * sb);
      if (s_end <= 0.0) continue;
      double acc = 0.0;
      for (std::size_t k = 0; k < kSamples; ++k) {
        const double s = s_end * static_cast<double>(k) / static_cast<double>(kSamples - 1);
        const double d = sample_linear(ca.values, s / sa) - sample_linear(cb.values, s / sb);
        acc += d * d;
      }
      total += std::sqrt(acc / kSamples);
      ++pairs;
    }
  }
  return pairs ? total / static_cast<double>(pairs) : 0.0;
}

CollapseResult collapse_alpha(std::span<const CollapseCurve> curves, double alpha_lo,
                              double alpha_hi) {
  require(curves.size() >= 2, ErrorCode::invalid_argument,
          "collapse needs at least two curves");
  for (std::size_t a = 0; a < curves.size(); ++a) {
    require(curves[a].values.size() >= 2 && curves[a].eta > 0.0 && curves[a].eta < 1.0,
            ErrorCode::invalid_argument, "collapse curves need eta in (0,1) and >= 2 samples");
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      require(curves[a].eta != curves[b].eta, ErrorCode::invalid_argument,
              "collapse curves need distinct eta");
    }
  }
  require(alpha_lo < alpha_hi, ErrorCode::invalid_argument, "empty alpha range");

  // Coarse scan for the basin, then golden-section refinement.
  constexpr std::size_t kScan = 59;
  double best_alpha = alpha_lo;
  double best = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  const double step = (alpha_hi - alpha_lo) / static_cast<double>(kScan - 1);
  for (std::size_t k = 0; k < kScan; ++k) {
    const double a = alpha_lo + step * static_cast<double>(k);
    const double obj = collapse_objective(curves, a);
    worst = std::max(worst, obj);
    if (obj < best) {
      best = obj;
      best_alpha = a;
    }
  }
  require(worst > 0.0, ErrorCode::invalid_argument,
          "degenerate collapse input: curves identical for every alpha");

  double lo = std::max(alpha_lo, best_alpha - step);
  double hi = std::min(alpha_hi, best_alpha + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = collapse_objective(curves, x1);
  double f2 = collapse_objective(curves, x2);
  while (hi - lo > 1e-3) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = collapse_objective(curves, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = collapse_objective(curves, x2);
    }
  }
  CollapseResult r;
  r.alpha = f1 < f2 ? x1 : x2;
  r.objective = std::min(f1, f2);
  if (best < r.objective) {
    r.alpha = best_alpha;
    r.objective = best;
  }
  r.objective_at_zero = collapse_objective(curves, 0.0);
  r.no_rescaling_detected = r.alpha <= alpha_lo + 1e-2;
  return r;
}

double slope_loglog(std::span<const ChiPeak> points, double chi_lo, double chi_hi) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& pt : points) {
    if (pt.chi >= chi_lo && pt.chi <= chi_hi && pt.chi > 0.0 && pt.dn_peak > 0.0) {
      xy.emplace_back(std::log(pt.chi), std::log(pt.dn_peak));
    }
  }
  require(xy.size() >= 3, ErrorCode::invalid_argument,
          "slope fit needs at least 3 points in range");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  require(sxx > 0.0, ErrorCode::invalid_argument, "slope fit needs distinct chi values");
  return sxy / sxx;
}

double predicted_ts(const ScalingLaw& law, double eta, double tau, Regime regime) {
  require(eta > 0.0 && eta < 1.0, ErrorCode::invalid_argument, "eta must lie in (0, 1)");
  if (regime == Regime::regular) return tau / std::pow(eta, law.alpha);
  require(law.lambda > 0.0, ErrorCode::invalid_argument, "lambda must be positive");
  return tau / law.lambda * std::log(1.0 / eta);
}

double observable_mean(const Field& f, const std::function<double(double, double)>& symbol) {
  const auto& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.nq(); ++i) {
    const double q = g.q(i);
    auto row = f.row(i);
    for (std::size_t j = 0; j < g.np(); ++j) acc += symbol(q, g.p(j)) * row[j];
  }
  return acc * g.cell_area();
}

std::optional<std::size_t> ripple_period(std::span<const double> series,
                                         std::size_t max_lag) {
  if (series.size() < 9) return std::nullopt;
  // First differences strip the slow growth that would otherwise dominate.
  const std::size_t n = series.size() - 1;
  if (max_lag == 0 || max_lag >= n / 2) max_lag = n / 2;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = series[i + 1] - series[i];
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) /
                      static_cast<double>(n);
  for (double& v : x) v -= mean;
  double c0 = 0.0;
  for (double v : x) c0 += v * v;
  if (c0 == 0.0) return std::nullopt;
  std::vector<double> acf(max_lag + 2, 0.0);
  for (std::size_t lag = 0; lag < acf.size() && lag < n; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += x[i] * x[i + lag];
    acf[lag] = c / c0;
  }
  for (std::size_t lag = 2; lag + 1 < acf.size(); ++lag) {
    if (acf[lag] > acf[lag - 1] && acf[lag] >= acf[lag + 1] && acf[lag] > 0.0) return lag;
  }
  return std::nullopt;
}

}  // namespace kho
