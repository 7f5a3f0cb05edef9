#include "spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "kho/error.hpp"

namespace kho::spectral {
namespace {

// FFTW's planner is not re-entrant; plans are built once under this lock and
// then executed concurrently through the new-array interface. FFTW_ESTIMATE
// keeps the chosen algorithm, and so every output bit, reproducible.
struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, int, int, int, bool>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_plan get_plan(int n, int howmany, int stride, int dist, bool forward) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  const auto key = std::make_tuple(n, howmany, stride, dist, forward);
  if (auto it = c.plans.find(key); it != c.plans.end()) return it->second;

  const int bins = n / 2 + 1;
  // Real data: element i of line l at l*dist + i*stride.
  // Spectrum: for contiguous lines (stride 1) bins are contiguous per line,
  // otherwise lines are interleaved with the same stride pattern.
  const int cstride = stride == 1 ? 1 : howmany;
  const int cdist = stride == 1 ? bins : 1;
  const std::size_t real_size = static_cast<std::size_t>(n) * howmany;
  const std::size_t cplx_size = static_cast<std::size_t>(bins) * howmany;
  double* r = fftw_alloc_real(real_size);
  fftw_complex* cbuf = fftw_alloc_complex(cplx_size);
  fftw_plan plan;
  if (forward) {
    plan = fftw_plan_many_dft_r2c(1, &n, howmany, r, nullptr, stride, dist,
                                  cbuf, nullptr, cstride, cdist, FFTW_ESTIMATE);
  } else {
    plan = fftw_plan_many_dft_c2r(1, &n, howmany, cbuf, nullptr, cstride, cdist,
                                  r, nullptr, stride, dist, FFTW_ESTIMATE);
  }
  fftw_free(r);
  fftw_free(cbuf);
  require(plan != nullptr, ErrorCode::numerical, "FFTW planning failed");
  c.plans.emplace(key, plan);
  return plan;
}

}  // namespace

LineTransform::LineTransform(const PhaseSpaceGrid& grid, Axis axis)
    : axis_(axis) {
  if (axis == Axis::p) {
    n_ = grid.np();
    lines_ = grid.nq();
    dk_ = 2.0 * kPi / (static_cast<double>(n_) * grid.dp());
  } else {
    n_ = grid.nq();
    lines_ = grid.np();
    dk_ = 2.0 * kPi / (static_cast<double>(n_) * grid.dq());
  }
  real_ = fftw_alloc_real(n_ * lines_);
  spectrum_ = reinterpret_cast<std::complex<double>*>(
      fftw_alloc_complex(bins() * lines_));
  require(real_ != nullptr && spectrum_ != nullptr, ErrorCode::numerical,
          "FFTW allocation failed");
  const int n = static_cast<int>(n_);
  const int howmany = static_cast<int>(lines_);
  const int stride = axis == Axis::p ? 1 : howmany;
  const int dist = axis == Axis::p ? n : 1;
  forward_plan_ = get_plan(n, howmany, stride, dist, true);
  inverse_plan_ = get_plan(n, howmany, stride, dist, false);
}

LineTransform::~LineTransform() {
  fftw_free(real_);
  fftw_free(spectrum_);
}

void LineTransform::forward(std::span<const double> values) {
  std::copy(values.begin(), values.end(), real_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), real_,
                       reinterpret_cast<fftw_complex*>(spectrum_));
}

void LineTransform::inverse(std::span<double> values) {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spectrum_), real_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = real_[k] * scale;
}

}  // namespace kho::spectral
