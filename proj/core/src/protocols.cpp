#include "cvfid/protocols.hpp"

#include <cmath>
#include <numbers>

namespace cvfid {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite");
}

FidelityResult make_result(double value, Method method, std::map<std::string, double> params) {
  if (!std::isfinite(value) || value < -1e-12 || value > 1.0 + 1e-9) {
    throw NumericalError("fidelity out of range: " + std::to_string(value));
  }
  return FidelityResult{value, method, std::move(params), std::nullopt};
}

// Mode-1 (or atomic) output covariance averaged over outcomes. The conditioned
// covariance is outcome independent; the conditioned mean is linear in the
// outcomes, and its spread over the outcome distribution adds
// R (pi B pi) R^T with R the gain carried through the verification map.
Eigen::Matrix2d outcome_averaged_output(const GaussianState& before_measurement,
                                        const MeasurementSpec& spec,
                                        const LinearMap& verification) {
  const MeasurementUpdate update(before_measurement, spec);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.measured.size()));
  const GaussianState verified = apply_map(update.apply(before_measurement, zero), verification);
  const Eigen::MatrixXd response = verification.matrix() * update.gain();
  const Eigen::MatrixXd spread =
      response.topRows(2) * update.projected_block_cov() * response.topRows(2).transpose();
  Eigen::Matrix2d gamma = verified.cov().topLeftCorner(2, 2) + spread;
  return 0.5 * (gamma + gamma.transpose());
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::analytic: return "analytic";
    case Method::covariance_pipeline: return "covariance-pipeline";
    case Method::polygauss: return "polygauss";
    case Method::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

void TeleportationParams::validate() const {
  require_finite(n, "n");
  require_finite(k, "k");
  require_finite(v_c, "v_c");
  require_finite(g, "gain");
  if (n < 1.0) throw ValidationError("n < 1");
  if (std::abs(k) >= n) throw ValidationError("|k| >= n");
  if (n * n - k * k < 1.0 - 1e-12) throw ValidationError("n^2 - k^2 < 1");
  if (v_c < 0.0) throw ValidationError("v_c < 0");
  if (g < 0.0) throw ValidationError("gain < 0");
}

std::map<std::string, double> TeleportationParams::as_map() const {
  return {{"n", n}, {"k", k}, {"vc", v_c}, {"gain", g}};
}

void MemoryParams::validate() const {
  require_finite(kappa, "kappa");
  require_finite(r, "r");
  require_finite(v_c, "v_c");
  require_finite(g, "gain");
  if (kappa < 0.0) throw ValidationError("kappa < 0");
  if (r < 1.0) throw ValidationError("squeezing r < 1");
  if (v_c < 0.0) throw ValidationError("v_c < 0");
}

std::map<std::string, double> MemoryParams::as_map() const {
  return {{"kappa", kappa}, {"r", r}, {"vc", v_c}, {"gain", g}};
}

// --- teleportation -----------------------------------------------------------

GaussianState epr_covariance(double n, double k) {
  TeleportationParams{n, k, 0.0, 0.0}.validate();
  Eigen::Matrix4d cov;
  cov << n, 0, k, 0,
         0, n, 0, -k,
         k, 0, n, 0,
         0, -k, 0, n;
  return GaussianState(concat(quantum_mode(vars::x1, vars::p1, "1"), quantum_mode(vars::x2, vars::p2, "2")),
                       Eigen::VectorXd::Zero(4), cov);
}

LinearMap classical_displacement(const Labels& labels, std::string_view x, std::string_view p,
                                 double sign) {
  auto map = LinearMap::identity(labels, sign > 0 ? "classical displacement"
                                                  : "inverse classical displacement");
  map.add(x, vars::x_cl, sign).add(p, vars::p_cl, sign).mark_physical();
  return map;
}

LinearMap teleport_basis_change(const Labels& labels) {
  Labels out = labels;
  const auto i2x = index_of(labels, vars::x2), i2p = index_of(labels, vars::p2);
  const auto i3x = index_of(labels, vars::x3), i3p = index_of(labels, vars::p3);
  out[i2x] = {vars::x_plus, VariableKind::quantum, "+", QuadratureRole::position};
  out[i2p] = {vars::p_plus, VariableKind::quantum, "+", QuadratureRole::momentum};
  out[i3x] = {vars::x_minus, VariableKind::quantum, "-", QuadratureRole::position};
  out[i3p] = {vars::p_minus, VariableKind::quantum, "-", QuadratureRole::momentum};

  auto map = LinearMap::identity(labels, "50/50 basis change of modes 2,3");
  map.rename_outputs(out);
  const double h = std::numbers::sqrt2 / 2.0;
  map.set(vars::x_plus, vars::x2, h).set(vars::x_plus, vars::x3, h);
  map.set(vars::p_plus, vars::p2, h).set(vars::p_plus, vars::p3, h);
  map.set(vars::x_minus, vars::x2, h).set(vars::x_minus, vars::x3, -h);
  map.set(vars::p_minus, vars::p2, h).set(vars::p_minus, vars::p3, -h);
  return map.mark_physical();
}

LinearMap teleport_feedback(const Labels& labels, double g) {
  auto map = LinearMap::identity(labels, "teleportation feedback");
  map.add(vars::x1, vars::x_minus, -g * std::numbers::sqrt2);
  map.add(vars::p1, vars::p_plus, g * std::numbers::sqrt2);
  return map;
}

GaussianState teleport_joint_state(const TeleportationParams& params) {
  params.validate();
  const Labels input_labels =
      concat(quantum_mode(vars::x3, vars::p3, "3"), classical_pair(vars::x_cl, vars::p_cl, "cl"));
  const GaussianState input(input_labels, Eigen::VectorXd::Zero(4),
                            Eigen::Vector4d(1, 1, params.v_c, params.v_c).asDiagonal());
  const auto displaced = apply_map(input, classical_displacement(input_labels, vars::x3, vars::p3));
  return direct_sum(epr_covariance(params.n, params.k), displaced);
}

namespace {

const MeasurementSpec& teleport_measurement() {
  static const MeasurementSpec spec{{vars::p_plus, vars::x_minus}};
  return spec;
}

GaussianState teleport_before_measurement(const TeleportationParams& params) {
  auto state = teleport_joint_state(params);
  state = apply_map(state, teleport_basis_change(state.labels()));
  return apply_map(state, teleport_feedback(state.labels(), params.g));
}

}  // namespace

GaussianState teleport_conditioned_state(const TeleportationParams& params, double eta, double xi) {
  return condition_on_measurement(teleport_before_measurement(params), teleport_measurement(),
                                  Eigen::Vector2d(eta, xi));
}

Eigen::Matrix2d teleport_output_covariance(const TeleportationParams& params) {
  const auto state = teleport_before_measurement(params);
  const Labels remaining = MeasurementUpdate(state, teleport_measurement()).remaining_labels();
  return outcome_averaged_output(state, teleport_measurement(),
                                 classical_displacement(remaining, vars::x1, vars::p1, -1.0));
}

FidelityResult teleport_pipeline(const TeleportationParams& params) {
  return make_result(fidelity_vs_vacuum(teleport_output_covariance(params)),
                     Method::covariance_pipeline, params.as_map());
}

double teleport_fidelity_analytic(double n, double k, double v_c) {
  TeleportationParams{n, k, v_c, 0.0}.validate();
  return 2.0 * (1.0 + n + v_c) / (1.0 + 2.0 * n + n * n - k * k + 2.0 * v_c * (1.0 + n - k));
}

double optimal_gain_teleport(double n, double k, double v_c) {
  TeleportationParams{n, k, v_c, 0.0}.validate();
  return (k + v_c) / (1.0 + n + v_c);
}

// --- quantum memory ------------------------------------------------------------

LinearMap memory_interaction(const Labels& labels, double kappa) {
  auto map = LinearMap::identity(labels, "QND atom-light interaction");
  map.add(vars::x_atom, vars::p_light, kappa).add(vars::x_light, vars::p_atom, kappa);
  return map.mark_physical();
}

GaussianState memory_joint_state(const MemoryParams& params) {
  params.validate();
  const Labels labels = concat(concat(quantum_mode(vars::x_atom, vars::p_atom, "A"),
                                      quantum_mode(vars::x_light, vars::p_light, "L")),
                               classical_pair(vars::x_cl, vars::p_cl, "cl"));
  Eigen::VectorXd diag(6);
  diag << 1.0 / params.r, params.r, 1.0, 1.0, params.v_c, params.v_c;
  GaussianState state(labels, Eigen::VectorXd::Zero(6), diag.asDiagonal());
  state = apply_map(state, classical_displacement(labels, vars::x_light, vars::p_light));
  return apply_map(state, memory_interaction(labels, params.kappa));
}

namespace {

const MeasurementSpec& memory_measurement() {
  static const MeasurementSpec spec{{vars::x_light}};
  return spec;
}

GaussianState memory_before_measurement(const MemoryParams& params) {
  const auto state = memory_joint_state(params);
  auto feedback = LinearMap::identity(state.labels(), "memory feedback");
  feedback.add(vars::p_atom, vars::x_light, -params.g);
  return apply_map(state, feedback);
}

// Stored x_A should carry p_cl and p_A should carry -x_cl.
LinearMap memory_verification(const Labels& labels) {
  auto map = LinearMap::identity(labels, "memory verification");
  map.add(vars::x_atom, vars::p_cl, -1.0).add(vars::p_atom, vars::x_cl, 1.0);
  return map.mark_physical();
}

}  // namespace

GaussianState memory_conditioned_state(const MemoryParams& params, double xi) {
  return condition_on_measurement(memory_before_measurement(params), memory_measurement(),
                                  Eigen::VectorXd::Constant(1, xi));
}

Eigen::Matrix2d memory_output_covariance(const MemoryParams& params) {
  const auto state = memory_before_measurement(params);
  const Labels remaining = MeasurementUpdate(state, memory_measurement()).remaining_labels();
  return outcome_averaged_output(state, memory_measurement(), memory_verification(remaining));
}

FidelityResult memory_pipeline(const MemoryParams& params) {
  return make_result(fidelity_vs_vacuum(memory_output_covariance(params)),
                     Method::covariance_pipeline, params.as_map());
}

double memory_fidelity_analytic(double kappa, double v_c, double r) {
  MemoryParams{kappa, r, v_c, 0.0}.validate();
  const double k2 = kappa * kappa;
  const double common = r + r * v_c * k2 - 2.0 * r * v_c * kappa + r * v_c + k2 * r;
  const double d1 = common + 2.0 * v_c + 1.0;
  const double d2 = common + 1.0;
  return 2.0 * std::sqrt(r * (1.0 + k2 * r + v_c) / (d1 * d2));
}

double optimal_gain_memory(double kappa, double v_c, double r) {
  MemoryParams{kappa, r, v_c, 0.0}.validate();
  return (kappa * r + v_c) / (1.0 + kappa * kappa * r + v_c);
}

}  // namespace cvfid
