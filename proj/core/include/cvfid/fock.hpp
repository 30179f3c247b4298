#pragma once

// Teleportation of Fock states, exactly, with the poly-Gauss engine.

#include <optional>

#include "cvfid/polygauss.hpp"
#include "cvfid/protocols.hpp"

namespace cvfid {

// Joint Wigner function of channel and Fock input after the basis change and
// feedback, with the measured pair and conjugates integrated out: the output
// W_out(x1, p1) averaged over measurement outcomes.
PolyGauss fock_teleport_output(int n_photons, double n, double k, double g);

FidelityResult fock_teleport_fidelity(int n_photons, double n, double k, double g);

// Fock input displaced by classical variables of spread v_c, verified by the
// inverse displacement; the classical variables are integrated out, leaving
// W_out(x1, p1). v_c must be > 0 (a zero-width spread is the undisplaced case).
PolyGauss displaced_fock_teleport_output(int n_photons, double n, double k, double g, double v_c);

// v_c == 0 reduces to fock_teleport_fidelity.
FidelityResult displaced_fock_teleport_fidelity(int n_photons, double n, double k, double g, double v_c);

// Unit-gain teleportation adds isotropic Gaussian noise of covariance 2*delta,
// and the Fock-state overlap reduces to the radial integral
//   Int_0^inf exp(-(1+delta) u) L_N(u)^2 du
//     = sum_j C(N, j)^2 delta^(2(N-j)) / (1+delta)^(2N+1),
// a sum of positive terms that stays accurate for large N.
double fock_unit_gain_fidelity(int n_photons, double delta);

// Thermal-like ensemble p_N = (1 - lambda) lambda^N of Fock inputs at unit gain.
struct FockEnsembleParams {
  double lambda = 0.0;
  double delta = 1.0;
  int n_max = 1;
  // Truncation tail allowed; larger tails raise ValidationError.
  std::optional<double> tolerance;

  static double lambda_from_mean_photons(double mean_photons);
  void validate() const;
};

struct EnsembleResult {
  FidelityResult truncated_sum;  // sum_{N <= n_max} p_N F_N
  double closed_form = 0.0;
  // Upper bound on the omitted terms: sum_{N > n_max} p_N F_N <= lambda^(n_max + 1).
  double tail_bound = 0.0;
};

double fock_ensemble_closed_form(double lambda, double delta);

// Smallest n_max >= 1 whose tail bound is below `tail`.
int ensemble_order_for_tail(double lambda, double tail);

EnsembleResult fock_ensemble_fidelity(const FockEnsembleParams& params);

}  // namespace cvfid
