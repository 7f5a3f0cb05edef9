#ifndef KHO_GRID_HPP
#define KHO_GRID_HPP

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace kho {

inline constexpr double kPi = std::numbers::pi;

// A point (q, p) of the dimensionless phase space.
struct PhasePoint {
  double q = 0.0;
  double p = 0.0;

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

// Uniform, origin-symmetric periodic lattice. Node i sits at q = (i - nq/2) dq,
// so the origin is always a node and the domain is [-nq dq/2, nq dq/2).
class PhaseSpaceGrid {
 public:
  PhaseSpaceGrid() = default;
  PhaseSpaceGrid(std::size_t nq, std::size_t np, double q_max, double p_max);

  static PhaseSpaceGrid from_spacing(std::size_t nq, std::size_t np, double dq,
                                     double dp);

  std::size_t nq() const { return nq_; }
  std::size_t np() const { return np_; }
  std::size_t size() const { return nq_ * np_; }
  double dq() const { return dq_; }
  double dp() const { return dp_; }
  double q_max() const { return 0.5 * static_cast<double>(nq_) * dq_; }
  double p_max() const { return 0.5 * static_cast<double>(np_) * dp_; }
  double q_min() const { return -q_max(); }
  double p_min() const { return -p_max(); }
  double cell_area() const { return dq_ * dp_; }

  double q(std::size_t i) const {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(nq_)) * dq_;
  }
  double p(std::size_t j) const {
    return (static_cast<double>(j) - 0.5 * static_cast<double>(np_)) * dp_;
  }
  std::size_t index(std::size_t iq, std::size_t ip) const {
    return iq * np_ + ip;
  }

  // Integer s with eta^2 == s * dp (to rounding), if one exists.
  std::optional<std::size_t> comb_stride(double eta) const;

  // Same shape; spacings equal to 1e-12 relative.
  friend bool operator==(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b);

 private:
  std::size_t nq_ = 0;
  std::size_t np_ = 0;
  double dq_ = 0.0;
  double dp_ = 0.0;
};

enum class FieldKind { quantum, classical };

const char* to_string(FieldKind kind) noexcept;

// A real distribution sampled on a grid. Operations never mutate their
// inputs; they build and return new fields.
class Field {
 public:
  Field() = default;
  Field(PhaseSpaceGrid grid, FieldKind kind, std::size_t kick_index = 0);
  Field(PhaseSpaceGrid grid, FieldKind kind, std::vector<double> values,
        std::size_t kick_index = 0);

  const PhaseSpaceGrid& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  std::size_t kick_index() const { return kick_index_; }
  void set_kick_index(std::size_t n) { kick_index_ = n; }
  void set_kind(FieldKind kind) { kind_ = kind; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator()(std::size_t iq, std::size_t ip) const {
    return values_[grid_.index(iq, ip)];
  }
  double& operator()(std::size_t iq, std::size_t ip) {
    return values_[grid_.index(iq, ip)];
  }

  // Row iq (fixed q) as a contiguous span over p.
  std::span<const double> row(std::size_t iq) const {
    return std::span<const double>(values_).subspan(iq * grid_.np(), grid_.np());
  }
  std::span<double> row(std::size_t iq) {
    return std::span<double>(values_).subspan(iq * grid_.np(), grid_.np());
  }

 private:
  PhaseSpaceGrid grid_;
  FieldKind kind_ = FieldKind::quantum;
  std::size_t kick_index_ = 0;
  std::vector<double> values_;
};

// K: kick amplitude. nu_tau: rotation angle per period. eta: Lamb-Dicke
// parameter, hbar_eff = 2 eta^2.
struct ModelParams {
  double K = 0.5;
  double nu_tau = kPi / 3.0;
  double eta = 0.25;

  void validate() const;
  double hbar_eff() const { return 2.0 * eta * eta; }
};

// Symmetric grid on [-extent, extent] in q with n_cells nodes. The momentum
// spacing is lowered to eta^2 / s for the smallest integer s making it no
// larger than the q spacing, and np grows until the p range covers extent.
PhaseSpaceGrid make_grid(double extent, std::size_t n_cells, double eta);

// nq = np = n_cells on [-extent, extent]^2, no commensurability constraint.
PhaseSpaceGrid make_square_grid(double extent, std::size_t n_cells);

// Unit-mass Gaussian of width eta per axis (minimum-uncertainty state).
Field coherent_state(const PhaseSpaceGrid& grid, PhasePoint center, double eta,
                     FieldKind kind = FieldKind::quantum);

// Riemann sum over the grid.
double integrate(const Field& f);
double l1_norm(const Field& f);

// a*f + b*g on a shared grid; result takes f's kind and kick index.
Field linear_combination(double a, const Field& f, double b, const Field& g);
Field scaled(const Field& f, double a);

// Fraction of the absolute mass found within `cells` nodes of any edge.
double boundary_mass_fraction(const Field& f, std::size_t cells = 5);

struct Moments {
  double mass = 0.0;
  double mean_q = 0.0;
  double mean_p = 0.0;
  double var_q = 0.0;
  double var_p = 0.0;
};

Moments moments(const Field& f);

void require_same_grid(const Field& a, const Field& b);

}  // namespace kho

#endif  // KHO_GRID_HPP
