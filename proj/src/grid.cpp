#include "kho/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kho/error.hpp"

namespace kho {

PhaseSpaceGrid::PhaseSpaceGrid(std::size_t nq, std::size_t np, double q_max,
                               double p_max)
    : nq_(nq), np_(np) {
  require(nq > 0 && np > 0, ErrorCode::invalid_argument,
          "grid needs at least one cell per axis");
  require(q_max > 0.0 && p_max > 0.0 && std::isfinite(q_max) &&
              std::isfinite(p_max),
          ErrorCode::invalid_argument, "grid extent must be positive and finite");
  dq_ = 2.0 * q_max / static_cast<double>(nq);
  dp_ = 2.0 * p_max / static_cast<double>(np);
}

PhaseSpaceGrid PhaseSpaceGrid::from_spacing(std::size_t nq, std::size_t np,
                                            double dq, double dp) {
  require(nq > 0 && np > 0, ErrorCode::invalid_argument,
          "grid needs at least one cell per axis");
  require(dq > 0.0 && dp > 0.0, ErrorCode::invalid_argument,
          "grid spacing must be positive");
  PhaseSpaceGrid g;
  g.nq_ = nq;
  g.np_ = np;
  g.dq_ = dq;
  g.dp_ = dp;
  return g;
}

std::optional<std::size_t> PhaseSpaceGrid::comb_stride(double eta) const {
  const double ratio = eta * eta / dp_;
  const double s = std::round(ratio);
  if (s < 1.0 || std::abs(ratio - s) > 1e-9 * s) return std::nullopt;
  return static_cast<std::size_t>(s);
}

bool operator==(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b) {
  auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
  };
  return a.nq_ == b.nq_ && a.np_ == b.np_ && close(a.dq_, b.dq_) &&
         close(a.dp_, b.dp_);
}

const char* to_string(FieldKind kind) noexcept {
  return kind == FieldKind::quantum ? "quantum" : "classical";
}

Field::Field(PhaseSpaceGrid grid, FieldKind kind, std::size_t kick_index)
    : grid_(grid), kind_(kind), kick_index_(kick_index),
      values_(grid.size(), 0.0) {}

Field::Field(PhaseSpaceGrid grid, FieldKind kind, std::vector<double> values,
             std::size_t kick_index)
    : grid_(grid), kind_(kind), kick_index_(kick_index),
      values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorCode::invalid_argument,
          "field value count does not match grid");
}

void ModelParams::validate() const {
  require(std::isfinite(K) && K >= 0.0, ErrorCode::invalid_argument,
          "K must be finite and non-negative");
  require(eta > 0.0 && eta <= 1.0, ErrorCode::invalid_argument,
          "eta must lie in (0, 1]");
  require(nu_tau > 0.0 && nu_tau < 2.0 * kPi, ErrorCode::invalid_argument,
          "nu_tau must lie in (0, 2 pi)");
}

PhaseSpaceGrid make_grid(double extent, std::size_t n_cells, double eta) {
  require(extent > 0.0 && std::isfinite(extent), ErrorCode::invalid_argument,
          "extent must be positive");
  require(n_cells >= 2 && n_cells % 2 == 0, ErrorCode::invalid_argument,
          "n_cells must be even");
  require(eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
  require(extent >= 4.0 * eta, ErrorCode::invalid_argument,
          "extent " + std::to_string(extent) + " < 4 eta; the initial state "
          "would not fit");

  const double dq = 2.0 * extent / static_cast<double>(n_cells);
  const double eta2 = eta * eta;
  const double stride = std::ceil(eta2 / dq * (1.0 - 1e-12));
  require(stride <= 1e6, ErrorCode::invalid_argument,
          "eta^2 / dp would exceed 1e6");
  const double s = std::max(1.0, stride);
  const double dp = eta2 / s;
  auto half = static_cast<std::size_t>(std::ceil(extent / dp * (1.0 - 1e-12)));
  return PhaseSpaceGrid::from_spacing(n_cells, 2 * half, dq, dp);
}

PhaseSpaceGrid make_square_grid(double extent, std::size_t n_cells) {
  require(n_cells >= 2 && n_cells % 2 == 0, ErrorCode::invalid_argument,
          "n_cells must be even");
  return PhaseSpaceGrid(n_cells, n_cells, extent, extent);
}

Field coherent_state(const PhaseSpaceGrid& grid, PhasePoint center, double eta,
                     FieldKind kind) {
  require(eta > 0.0, ErrorCode::invalid_argument, "eta must be positive");
  const double margin = 4.0 * eta;
  require(grid.q_max() - std::abs(center.q) >= margin &&
              grid.p_max() - std::abs(center.p) >= margin,
          ErrorCode::invalid_argument,
          "coherent state center lies within 4 eta of the grid boundary");

  Field f(grid, kind);
  const double inv = 1.0 / (2.0 * eta * eta);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.nq(); ++i) {
    const double dq = grid.q(i) - center.q;
    const double gq = std::exp(-dq * dq * inv);
    auto row = f.row(i);
    for (std::size_t j = 0; j < grid.np(); ++j) {
      const double dp = grid.p(j) - center.p;
      row[j] = gq * std::exp(-dp * dp * inv);
      sum += row[j];
    }
  }
  const double norm = 1.0 / (sum * grid.cell_area());
  for (double& v : f.values()) v *= norm;
  return f;
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_area();
}

double l1_norm(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += std::abs(v);
  return sum * f.grid().cell_area();
}

void require_same_grid(const Field& a, const Field& b) {
  require(a.grid() == b.grid(), ErrorCode::grid_mismatch,
          "fields live on different grids");
}

Field linear_combination(double a, const Field& f, double b, const Field& g) {
  require_same_grid(f, g);
  Field out(f.grid(), f.kind(), f.kick_index());
  auto o = out.values();
  auto x = f.values();
  auto y = g.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = a * x[k] + b * y[k];
  return out;
}

Field scaled(const Field& f, double a) {
  Field out = f;
  for (double& v : out.values()) v *= a;
  return out;
}

double boundary_mass_fraction(const Field& f, std::size_t cells) {
  const auto& g = f.grid();
  double edge = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.nq(); ++i) {
    const bool q_edge = i < cells || i + cells >= g.nq();
    auto row = f.row(i);
    for (std::size_t j = 0; j < g.np(); ++j) {
      const double a = std::abs(row[j]);
      total += a;
      if (q_edge || j < cells || j + cells >= g.np()) edge += a;
    }
  }
  return total > 0.0 ? edge / total : 0.0;
}

Moments moments(const Field& f) {
  const auto& g = f.grid();
  double m0 = 0.0, mq = 0.0, mp = 0.0, mqq = 0.0, mpp = 0.0;
  for (std::size_t i = 0; i < g.nq(); ++i) {
    const double q = g.q(i);
    auto row = f.row(i);
    for (std::size_t j = 0; j < g.np(); ++j) {
      const double p = g.p(j);
      const double v = row[j];
      m0 += v;
      mq += v * q;
      mp += v * p;
      mqq += v * q * q;
      mpp += v * p * p;
    }
  }
  Moments m;
  m.mass = m0 * g.cell_area();
  if (m0 == 0.0) return m;
  m.mean_q = mq / m0;
  m.mean_p = mp / m0;
  m.var_q = mqq / m0 - m.mean_q * m.mean_q;
  m.var_p = mpp / m0 - m.mean_p * m.mean_p;
  return m;
}

}  // namespace kho
