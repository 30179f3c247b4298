#include "cvfid/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace cvfid {

namespace {

FidelityResult checked(double value, std::map<std::string, double> params) {
  if (!std::isfinite(value) || value < -1e-12 || value > 1.0 + 1e-9) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    throw NumericalError(std::string("fock fidelity out of range: ") + buf);
  }
  return FidelityResult{value, Method::polygauss, std::move(params), std::nullopt};
}

Labels teleport_labels() {
  return concat(concat(quantum_mode(vars::x1, vars::p1, "1"), quantum_mode(vars::x2, vars::p2, "2")),
                quantum_mode(vars::x3, vars::p3, "3"));
}

const std::vector<std::string>& measured_and_conjugates() {
  static const std::vector<std::string> names{vars::x_plus, vars::p_plus, vars::x_minus, vars::p_minus};
  return names;
}

// Basis change and feedback applied to a joint function whose labels start
// with teleport_labels() and may continue with extra (classical) variables.
PolyGauss run_channel(PolyGauss w, const Labels& labels, double g) {
  const auto basis = teleport_basis_change(labels);
  w = substitute_linear(w, basis);
  w = substitute_linear(w, teleport_feedback(basis.outputs(), g));
  return integrate_out(w, measured_and_conjugates());
}

}  // namespace

PolyGauss fock_teleport_output(int n_photons, double n, double k, double g) {
  TeleportationParams{n, k, 0.0, g}.validate();
  const PolyGauss joint = product(from_gaussian(epr_covariance(n, k)),
                                  fock_wigner(n_photons, vars::x3, vars::p3));
  return run_channel(joint, teleport_labels(), g);
}

FidelityResult fock_teleport_fidelity(int n_photons, double n, double k, double g) {
  const double f = overlap(fock_wigner(n_photons, vars::x1, vars::p1), fock_teleport_output(n_photons, n, k, g));
  return checked(f, {{"N", n_photons}, {"n", n}, {"k", k}, {"gain", g}});
}

PolyGauss displaced_fock_teleport_output(int n_photons, double n, double k, double g, double v_c) {
  TeleportationParams{n, k, v_c, g}.validate();
  if (!(v_c > 0.0)) throw ValidationError("displaced Fock input needs v_c > 0");
  const Labels classical = classical_pair(vars::x_cl, vars::p_cl, "cl");
  const GaussianState spread(classical, Eigen::Vector2d::Zero(), Eigen::Vector2d(v_c, v_c).asDiagonal());
  const Labels labels = concat(teleport_labels(), classical);

  PolyGauss w = product(product(from_gaussian(epr_covariance(n, k)), fock_wigner(n_photons, vars::x3, vars::p3)),
                        from_gaussian(spread));
  w = substitute_linear(w, classical_displacement(labels, vars::x3, vars::p3));
  w = run_channel(w, labels, g);

  const Labels remaining = concat(quantum_mode(vars::x1, vars::p1, "1"), classical);
  w = substitute_linear(w, classical_displacement(remaining, vars::x1, vars::p1, -1.0));
  return integrate_out(w, {vars::x_cl, vars::p_cl});
}

FidelityResult displaced_fock_teleport_fidelity(int n_photons, double n, double k, double g, double v_c) {
  std::map<std::string, double> params{{"N", n_photons}, {"n", n}, {"k", k}, {"gain", g}, {"vc", v_c}};
  if (v_c == 0.0) {
    auto r = fock_teleport_fidelity(n_photons, n, k, g);
    r.params = std::move(params);
    return r;
  }
  const double f = overlap(fock_wigner(n_photons, vars::x1, vars::p1),
                           displaced_fock_teleport_output(n_photons, n, k, g, v_c));
  return checked(f, std::move(params));
}

double fock_unit_gain_fidelity(int n_photons, double delta) {
  if (n_photons < 0) throw ValidationError("photon number must be >= 0");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be finite and >= 0");
  if (delta == 0.0) return 1.0;
  const int n = n_photons;
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  const double log_norm = (2.0 * n + 1.0) * std::log1p(delta);
  for (int j = 0; j <= n; ++j) {
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    logs[static_cast<std::size_t>(j)] = 2.0 * log_binom + 2.0 * (n - j) * std::log(delta) - log_norm;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - top);
  return std::exp(top) * sum;
}

double FockEnsembleParams::lambda_from_mean_photons(double mean_photons) {
  if (!(mean_photons >= 0.0)) throw ValidationError("mean photon number must be >= 0");
  return mean_photons == 0.0 ? 0.0 : std::exp(-1.0 / mean_photons);
}

void FockEnsembleParams::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in [0, 1)");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ValidationError("delta must be finite and >= 0");
  if (n_max < 1) throw ValidationError("nmax must be >= 1");
}

double fock_ensemble_closed_form(double lambda, double delta) {
  FockEnsembleParams{lambda, delta, 1, std::nullopt}.validate();
  // Everything divided by s^2 so large delta does not overflow.
  const double s = std::max(1.0, delta);
  const double a = (1.0 + delta) / s;
  const double b = (1.0 - delta) / s;
  const double c = 1.0 / (s * s) + (delta / s) * (delta / s);
  return (1.0 - lambda) / (s * std::sqrt(a * a - 2.0 * lambda * c + lambda * lambda * b * b));
}

int ensemble_order_for_tail(double lambda, double tail) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in [0, 1)");
  if (!(tail > 0.0 && tail < 1.0)) throw ValidationError("tail must lie in (0, 1)");
  if (lambda == 0.0) return 1;
  const int m = static_cast<int>(std::ceil(std::log(tail) / std::log(lambda))) - 1;
  int order = std::max(1, m);
  while (std::pow(lambda, order + 1) >= tail) ++order;
  return order;
}

EnsembleResult fock_ensemble_fidelity(const FockEnsembleParams& params) {
  params.validate();
  const double tail = std::pow(params.lambda, params.n_max + 1);
  if (params.tolerance && tail > *params.tolerance) {
    throw ValidationError("truncation tail " + std::to_string(tail) + " above tolerance " +
                          std::to_string(*params.tolerance) + "; raise nmax");
  }
  double sum = 0.0;
  double weight = 1.0 - params.lambda;
  for (int n = 0; n <= params.n_max; ++n) {
    sum += weight * fock_unit_gain_fidelity(n, params.delta);
    weight *= params.lambda;
  }
  EnsembleResult out;
  out.truncated_sum = checked(sum, {{"lambda", params.lambda}, {"delta", params.delta},
                                    {"nmax", static_cast<double>(params.n_max)}});
  out.closed_form = fock_ensemble_closed_form(params.lambda, params.delta);
  out.tail_bound = tail;
  return out;
}

}  // namespace cvfid
