#ifndef KHO_DECOHERENCE_HPP
#define KHO_DECOHERENCE_HPP

#include <cstddef>
#include <vector>

#include "kho/grid.hpp"

namespace kho {

// Purely diffusive reservoir. D is the diffusion accumulated over one kick
// period, D = n_bar * Gamma * eta^2 * tau.
struct ReservoirParams {
  double D = 0.0;

  static ReservoirParams from_rates(double n_bar, double gamma, double eta,
                                    double tau);
  void validate() const;
};

// Convolution with the isotropic Gaussian of variance 2D per axis. D = 0 is
// the identity. Mass and sign structure are preserved (no clamping).
Field diffuse(const Field& f, double D);

// K eta^4 / D^{3/2}
double chi(double K, double eta, double D);

// (y - 2 y^3 / 3) / 4
double f_factor(double y);

// The first-order insertion kernel applied to f: multiply by sin q, kick,
// smooth in p with the signed kernel f(y) exp(-y^2) (y = dp / 2 sqrt(D)) and
// in q with the plain Gaussian, then rotate. Returns a signed, mass-free field.
Field insertion_step(const Field& f, double K, double D, double nu_tau);

// Forward accumulation of the first-order correction. After n advance() calls,
// zeroth() is the smoothed classical field and first() = sum over insertion
// positions j < n of G_j (so W_n = zeroth + chi * first + O(chi^2)).
class FirstOrderExpansion {
 public:
  FirstOrderExpansion(Field initial, const ModelParams& params, double D);

  void advance();
  std::size_t kicks() const { return kicks_; }
  const Field& zeroth() const { return zeroth_; }
  const Field& first() const { return first_; }

 private:
  ModelParams params_;
  double D_;
  std::size_t kicks_ = 0;
  Field zeroth_;
  Field first_;
};

// sum_{j=0}^{n} G_j: the accumulated correction after n + 1 kicks.
Field gj_sum(const Field& W0, std::size_t n, const ModelParams& params, double D);

// chi * integral |first()| after n kicks, for n = 1..n_max.
std::vector<double> dn_perturbative(const Field& W0, std::size_t n_max,
                                    const ModelParams& params, double D);

}  // namespace kho

#endif  // KHO_DECOHERENCE_HPP
