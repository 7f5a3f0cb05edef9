#ifndef KHO_SRC_SPECTRAL_HPP
#define KHO_SRC_SPECTRAL_HPP

// Batched real-to-complex transforms along one axis of a phase-space field.
// Operators that act diagonally in the conjugate variable (shifts, shears,
// Gaussian smoothing, kick phases) are all expressed as a multiplier applied
// between forward() and inverse().

#include <complex>
#include <cstddef>
#include <span>

#include "kho/grid.hpp"

namespace kho::spectral {

enum class Axis { q, p };

class LineTransform {
 public:
  LineTransform(const PhaseSpaceGrid& grid, Axis axis);
  ~LineTransform();
  LineTransform(const LineTransform&) = delete;
  LineTransform& operator=(const LineTransform&) = delete;

  std::size_t lines() const { return lines_; }
  std::size_t length() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }
  // Angular frequency of bin k (k < bins()).
  double omega(std::size_t k) const { return dk_ * static_cast<double>(k); }
  bool is_nyquist(std::size_t k) const { return n_ % 2 == 0 && k == n_ / 2; }

  std::complex<double>& at(std::size_t line, std::size_t k) {
    return spectrum_[axis_ == Axis::p ? line * bins() + k : k * lines_ + line];
  }

  void forward(std::span<const double> values);
  // Writes the normalized inverse transform into `values`.
  void inverse(std::span<double> values);

 private:
  Axis axis_;
  std::size_t n_ = 0;
  std::size_t lines_ = 0;
  double dk_ = 0.0;
  double* real_ = nullptr;
  std::complex<double>* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Multiplies the transform of every line along `axis` by
// mult(line, omega). At the Nyquist bin only the real part is kept so that the
// result stays real.
template <typename Multiplier>
void apply_multiplier(Field& f, Axis axis, Multiplier&& mult) {
  LineTransform t(f.grid(), axis);
  t.forward(f.values());
  for (std::size_t line = 0; line < t.lines(); ++line) {
    for (std::size_t k = 0; k < t.bins(); ++k) {
      std::complex<double> m = mult(line, t.omega(k));
      if (t.is_nyquist(k)) m = std::complex<double>(m.real(), 0.0);
      t.at(line, k) *= m;
    }
  }
  t.inverse(f.values());
}

}  // namespace kho::spectral

#endif  // KHO_SRC_SPECTRAL_HPP
