#include "cvfid/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <set>

namespace cvfid {

namespace {

constexpr double kPsdTolerance = 1e-10;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void require_same_names(const Labels& expected, const Labels& got, const char* what) {
  if (expected.size() != got.size()) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(expected.size()) + " vs " +
                          std::to_string(got.size()) + ")");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].name != got[i].name) {
      throw ValidationError(std::string(what) + ": variable order mismatch at position " +
                            std::to_string(i) + " ('" + expected[i].name + "' vs '" +
                            got[i].name + "')");
    }
  }
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  }
  return out;
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out(i) = v(rows[i]);
  return out;
}

}  // namespace

Labels quantum_mode(std::string x_name, std::string p_name, std::string mode) {
  return {{std::move(x_name), VariableKind::quantum, mode, QuadratureRole::position},
          {std::move(p_name), VariableKind::quantum, mode, QuadratureRole::momentum}};
}

Labels classical_pair(std::string x_name, std::string p_name, std::string mode) {
  return {{std::move(x_name), VariableKind::classical, mode, QuadratureRole::position},
          {std::move(p_name), VariableKind::classical, mode, QuadratureRole::momentum}};
}

Labels concat(const Labels& a, const Labels& b) {
  Labels out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<std::string> names_of(const Labels& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.name);
  return out;
}

void validate_labels(const Labels& labels) {
  std::set<std::string> names;
  std::map<std::string, std::pair<int, int>> quantum_modes;
  for (const auto& l : labels) {
    if (l.name.empty()) throw ValidationError("variable with empty name");
    if (!names.insert(l.name).second) {
      throw ValidationError("duplicate variable name '" + l.name + "'");
    }
    if (l.kind == VariableKind::quantum) {
      auto& counts = quantum_modes[l.mode];
      (l.role == QuadratureRole::position ? counts.first : counts.second) += 1;
    }
  }
  for (const auto& [mode, counts] : quantum_modes) {
    if (counts.first != 1 || counts.second != 1) {
      throw ValidationError("quantum mode '" + mode +
                            "' must have exactly one position and one momentum variable");
    }
  }
}

std::size_t index_of(const Labels& labels, std::string_view name) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].name == name) return i;
  }
  throw ValidationError("unknown variable '" + std::string(name) + "'");
}

Eigen::MatrixXd symplectic_form(const Labels& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& li = labels[i];
    if (li.kind != VariableKind::quantum || li.role != QuadratureRole::position) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& lj = labels[j];
      if (lj.kind == VariableKind::quantum && lj.mode == li.mode &&
          lj.role == QuadratureRole::momentum) {
        omega(i, j) = 1.0;
        omega(j, i) = -1.0;
      }
    }
  }
  return omega;
}

// ---------------------------------------------------------------------------

GaussianState::GaussianState(Labels labels, Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : labels_(std::move(labels)), mean_(std::move(mean)), cov_(std::move(cov)) {
  validate_labels(labels_);
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (mean_.size() != n || cov_.rows() != n || cov_.cols() != n) {
    throw ValidationError("GaussianState: dimension mismatch between labels, mean and covariance");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw NumericalError("GaussianState: non-finite mean or covariance");
  }
  cov_ = symmetrized(cov_);
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (lo < -kPsdTolerance * scale) {
      throw ValidationError("GaussianState: covariance is not positive semidefinite (min eigenvalue " +
                            std::to_string(lo) + ")");
    }
  }
}

std::size_t GaussianState::index_of(std::string_view name) const {
  return cvfid::index_of(labels_, name);
}

double GaussianState::physicality_margin() const {
  std::vector<std::size_t> q;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].kind == VariableKind::quantum) q.push_back(i);
  }
  if (q.empty()) return 0.0;
  Labels ql;
  for (auto i : q) ql.push_back(labels_[i]);
  const Eigen::MatrixXd omega = symplectic_form(ql);
  const Eigen::MatrixXcd h =
      select(cov_, q, q).cast<std::complex<double>>() + std::complex<double>(0, 1) * omega;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------

LinearMap::LinearMap(Labels inputs, Labels outputs, Eigen::MatrixXd matrix,
                     std::string description, bool physical)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      matrix_(std::move(matrix)),
      description_(std::move(description)),
      physical_(physical) {
  validate_labels(inputs_);
  validate_labels(outputs_);
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  if (matrix_.rows() != n || matrix_.cols() != n ||
      outputs_.size() != inputs_.size()) {
    throw ValidationError("LinearMap: matrix must be square and match the variable lists");
  }
}

LinearMap LinearMap::identity(const Labels& labels, std::string description) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  return LinearMap(labels, labels, Eigen::MatrixXd::Identity(n, n), std::move(description));
}

LinearMap& LinearMap::add(std::string_view target, std::string_view source, double coeff) {
  matrix_(cvfid::index_of(outputs_, target), cvfid::index_of(inputs_, source)) += coeff;
  return *this;
}

LinearMap& LinearMap::set(std::string_view target, std::string_view source, double value) {
  matrix_(cvfid::index_of(outputs_, target), cvfid::index_of(inputs_, source)) = value;
  return *this;
}

LinearMap& LinearMap::mark_physical(bool physical) {
  physical_ = physical;
  return *this;
}

LinearMap& LinearMap::rename_outputs(Labels outputs) {
  validate_labels(outputs);
  if (outputs.size() != outputs_.size()) {
    throw ValidationError("LinearMap::rename_outputs: dimension mismatch");
  }
  outputs_ = std::move(outputs);
  return *this;
}

LinearMap LinearMap::inverse() const {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(matrix_);
  if (!lu.isInvertible()) {
    throw ValidationError("LinearMap '" + description_ + "' is singular");
  }
  return LinearMap(outputs_, inputs_, lu.inverse(), description_ + "^-1", physical_);
}

LinearMap LinearMap::then(const LinearMap& next) const {
  require_same_names(outputs_, next.inputs_, "LinearMap::then");
  return LinearMap(inputs_, next.outputs_, next.matrix_ * matrix_,
                   description_ + "; " + next.description_, physical_ && next.physical_);
}

bool LinearMap::preserves_symplectic_form(double tol) const {
  const Eigen::MatrixXd lhs = matrix_ * symplectic_form(inputs_) * matrix_.transpose();
  return (lhs - symplectic_form(outputs_)).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------

GaussianState vacuum_plus_classical(std::size_t quantum_pairs, double v_c) {
  if (!(v_c >= 0.0) || !std::isfinite(v_c)) {
    throw ValidationError("classical variance v_c must be finite and >= 0");
  }
  Labels labels;
  for (std::size_t i = 1; i <= quantum_pairs; ++i) {
    const auto s = std::to_string(i);
    labels = concat(labels, quantum_mode("x" + s, "p" + s, s));
  }
  labels = concat(labels, classical_pair("x_cl", "p_cl", "cl"));
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(n);
  diag.tail(2).setConstant(v_c);
  return GaussianState(std::move(labels), Eigen::VectorXd::Zero(n), diag.asDiagonal());
}

GaussianState apply_map(const GaussianState& state, const LinearMap& map) {
  require_same_names(map.inputs(), state.labels(), "apply_map");
  const auto& s = map.matrix();
  return GaussianState(map.outputs(), s * state.mean(), symmetrized(s * state.cov() * s.transpose()));
}

GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::VectorXd mean(na + nb);
  mean << a.mean(), b.mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  return GaussianState(concat(a.labels(), b.labels()), std::move(mean), std::move(cov));
}

GaussianState marginal(const GaussianState& state, std::span<const std::string> keep) {
  if (keep.empty()) throw ValidationError("marginal: keep set must be non-empty");
  std::vector<std::size_t> idx;
  Labels labels;
  for (const auto& name : keep) {
    const auto i = state.index_of(name);
    idx.push_back(i);
    labels.push_back(state.labels()[i]);
  }
  return GaussianState(std::move(labels), select(state.mean(), idx), select(state.cov(), idx, idx));
}

GaussianState marginal(const GaussianState& state, std::initializer_list<std::string> keep) {
  return marginal(state, std::span<const std::string>(keep.begin(), keep.size()));
}

// ---------------------------------------------------------------------------

MeasurementUpdate::MeasurementUpdate(const GaussianState& state, const MeasurementSpec& spec) {
  const auto& labels = state.labels();
  if (spec.measured.empty()) throw ValidationError("measurement: nothing measured");

  std::set<std::string> modes;
  std::vector<std::size_t> measured_idx;
  for (const auto& name : spec.measured) {
    const auto i = state.index_of(name);
    if (labels[i].kind != VariableKind::quantum) {
      throw ValidationError("measurement: variable '" + name + "' is classical");
    }
    if (!modes.insert(labels[i].mode).second) {
      throw ValidationError("measurement: '" + name +
                            "' and its conjugate cannot both be measured");
    }
    measured_idx.push_back(i);
  }

  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool in_block = labels[i].kind == VariableKind::quantum && modes.count(labels[i].mode) > 0;
    (in_block ? block_ : remaining_).push_back(i);
  }
  for (auto i : block_) block_labels_.push_back(labels[i]);
  for (auto i : remaining_) remaining_labels_.push_back(labels[i]);
  for (auto m : measured_idx) {
    measured_in_block_.push_back(static_cast<std::size_t>(
        std::find(block_.begin(), block_.end(), m) - block_.begin()));
  }

  const auto nb = static_cast<Eigen::Index>(block_.size());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(nb, nb);
  for (auto j : measured_in_block_) pi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;

  const Eigen::MatrixXd a = select(state.cov(), remaining_, remaining_);
  const Eigen::MatrixXd b = select(state.cov(), block_, block_);
  const Eigen::MatrixXd c = select(state.cov(), remaining_, block_);

  projected_block_cov_ = pi * b * pi;
  const Eigen::MatrixXd pinv = pseudo_inverse(projected_block_cov_);
  gain_ = c * pinv * pi;
  conditioned_cov_ = symmetrized(a - c * pinv * c.transpose());
}

Eigen::VectorXd MeasurementUpdate::conditioned_mean(const Eigen::VectorXd& prior_mean,
                                                    const Eigen::VectorXd& outcomes) const {
  if (static_cast<std::size_t>(outcomes.size()) != measured_in_block_.size()) {
    throw ValidationError("measurement: expected " + std::to_string(measured_in_block_.size()) +
                          " outcomes, got " + std::to_string(outcomes.size()));
  }
  const Eigen::VectorXd prior_block = select(prior_mean, block_);
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(prior_block.size());
  for (std::size_t k = 0; k < measured_in_block_.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(measured_in_block_[k]);
    residual(j) = outcomes(static_cast<Eigen::Index>(k)) - prior_block(j);
  }
  return select(prior_mean, remaining_) + gain_ * residual;
}

GaussianState MeasurementUpdate::apply(const GaussianState& state,
                                       const Eigen::VectorXd& outcomes) const {
  return GaussianState(remaining_labels_, conditioned_mean(state.mean(), outcomes), conditioned_cov_);
}

GaussianState condition_on_measurement(const GaussianState& state, const MeasurementSpec& spec,
                                       const Eigen::VectorXd& outcomes) {
  return MeasurementUpdate(state, spec).apply(state, outcomes);
}

// ---------------------------------------------------------------------------

namespace {

Eigen::Matrix2d shifted_checked(const Eigen::Matrix2d& gamma, const char* what) {
  if (!gamma.allFinite()) throw NumericalError(std::string(what) + ": non-finite covariance");
  if (std::abs(gamma(0, 1) - gamma(1, 0)) > 1e-9 * std::max(1.0, gamma.cwiseAbs().maxCoeff())) {
    throw ValidationError(std::string(what) + ": covariance is not symmetric");
  }
  const Eigen::Matrix2d sym = 0.5 * (gamma + gamma.transpose());
  Eigen::LLT<Eigen::Matrix2d> llt(sym);
  if (llt.info() != Eigen::Success || sym.determinant() <= 0.0) {
    throw ValidationError(std::string(what) + ": covariance is not positive definite");
  }
  return sym + Eigen::Matrix2d::Identity();
}

}  // namespace

double fidelity_vs_vacuum(const Eigen::Matrix2d& gamma_out) {
  const Eigen::Matrix2d shifted = shifted_checked(gamma_out, "fidelity_vs_vacuum");
  return 2.0 / std::sqrt(shifted.determinant());
}

double fidelity_vs_coherent(const Eigen::Matrix2d& gamma, const Eigen::Vector2d& offset) {
  const Eigen::Matrix2d shifted = shifted_checked(gamma, "fidelity_vs_coherent");
  if (!offset.allFinite()) throw NumericalError("fidelity_vs_coherent: non-finite offset");
  const double quad = offset.dot(shifted.inverse() * offset);
  return 2.0 / std::sqrt(shifted.determinant()) * std::exp(-quad);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols()) throw ValidationError("pseudo_inverse: matrix must be square");
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(m));
  const Eigen::VectorXd& w = eig.eigenvalues();
  const double cutoff = rel_tol * w.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w(i)) > cutoff && w(i) != 0.0) inv(i) = 1.0 / w(i);
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  return v * inv.asDiagonal() * v.transpose();
}

}  // namespace cvfid
