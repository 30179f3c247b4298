#pragma once

// Teleportation of an unknown coherent state through a symmetric EPR channel,
// and light-to-atom quantum memory, as covariance-matrix pipelines plus their
// closed-form fidelities and optimal feedback gains.

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>

#include "cvfid/gaussian.hpp"

namespace cvfid {

enum class Method { analytic, covariance_pipeline, polygauss, monte_carlo };

std::string to_string(Method m);

struct FidelityResult {
  double value = 0.0;
  Method method = Method::analytic;
  std::map<std::string, double> params;
  std::optional<double> std_error;  // Monte Carlo only
};

// Channel: symmetric two-mode state with covariance
//   [[n, 0, k, 0], [0, n, 0, -k], [k, 0, n, 0], [0, -k, 0, n]].
// Input: vacuum displaced by classical variables of spread v_c.
struct TeleportationParams {
  double n = 1.0;
  double k = 0.0;
  double v_c = 0.0;
  double g = 0.0;

  // EPR variance Var(x1 - x2) = Var(p1 + p2) in units of the vacuum.
  double delta() const { return n - k; }
  // Throws ValidationError naming the violated constraint.
  void validate() const;
  std::map<std::string, double> as_map() const;
};

struct MemoryParams {
  double kappa = 1.0;
  double r = 1.0;  // atomic squeezing, atomic covariance diag(1/r, r)
  double v_c = 0.0;
  double g = 0.0;

  void validate() const;
  std::map<std::string, double> as_map() const;
};

// Variable names used by the pipelines.
namespace vars {
inline constexpr const char* x1 = "x1";
inline constexpr const char* p1 = "p1";
inline constexpr const char* x2 = "x2";
inline constexpr const char* p2 = "p2";
inline constexpr const char* x3 = "x3";
inline constexpr const char* p3 = "p3";
inline constexpr const char* x_plus = "x+";
inline constexpr const char* p_plus = "p+";
inline constexpr const char* x_minus = "x-";
inline constexpr const char* p_minus = "p-";
inline constexpr const char* x_cl = "x_cl";
inline constexpr const char* p_cl = "p_cl";
inline constexpr const char* x_atom = "xA";
inline constexpr const char* p_atom = "pA";
inline constexpr const char* x_light = "xL";
inline constexpr const char* p_light = "pL";
}  // namespace vars

// --- teleportation building blocks ---------------------------------------

// Two-mode channel state over (x1, p1, x2, p2), zero mean.
GaussianState epr_covariance(double n, double k);

// Quantum mode (x, p) displaced by classical (x_cl, p_cl) scaled by `sign`.
LinearMap classical_displacement(const Labels& labels, std::string_view x, std::string_view p,
                                 double sign = 1.0);

// (x2, p2, x3, p3) -> (x+, p+, x-, p-) with x+- = (x2 +- x3)/sqrt2, p+- = (p2 +- p3)/sqrt2;
// other variables untouched.
LinearMap teleport_basis_change(const Labels& labels);

// Outcome-linear feedback x1 -> x1 - g sqrt2 x-, p1 -> p1 + g sqrt2 p+.
LinearMap teleport_feedback(const Labels& labels, double g);

// Joint state over (x1, p1, x2, p2, x3, p3, x_cl, p_cl) after the input has been displaced.
GaussianState teleport_joint_state(const TeleportationParams& params);

// Conditional state over (x1, p1, x_cl, p_cl) for measured p+ = eta and x- = xi,
// with the feedback of gain params.g applied.
GaussianState teleport_conditioned_state(const TeleportationParams& params, double eta, double xi);

// Output covariance of mode 1 after verification, averaged over measurement outcomes.
Eigen::Matrix2d teleport_output_covariance(const TeleportationParams& params);

FidelityResult teleport_pipeline(const TeleportationParams& params);

// Closed form, valid at the optimal gain.
double teleport_fidelity_analytic(double n, double k, double v_c);
double optimal_gain_teleport(double n, double k, double v_c);

// --- quantum memory --------------------------------------------------------

// Atom-light interaction x_A -> x_A + kappa p_L, x_L -> x_L + kappa p_A.
LinearMap memory_interaction(const Labels& labels, double kappa);

// State over (xA, pA, xL, pL, x_cl, p_cl) after the light has been displaced
// by the classical variables and has interacted with the atoms.
GaussianState memory_joint_state(const MemoryParams& params);

// Conditional state over (xA, pA, x_cl, p_cl) for measured x_L = xi with the
// feedback p_A -> p_A - g xi applied.
GaussianState memory_conditioned_state(const MemoryParams& params, double xi);

Eigen::Matrix2d memory_output_covariance(const MemoryParams& params);

FidelityResult memory_pipeline(const MemoryParams& params);

double memory_fidelity_analytic(double kappa, double v_c, double r = 1.0);
double optimal_gain_memory(double kappa, double v_c, double r = 1.0);

}  // namespace cvfid
