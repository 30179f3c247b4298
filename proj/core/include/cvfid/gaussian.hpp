#pragma once

// Gaussian states over mixed quantum/classical variables.
//
// Quadrature convention: covariance entries are gamma_ij = 2 Re<dy_i dy_j>, so
// the vacuum has covariance equal to the identity and a coherent state has
// identity covariance with a displaced mean. A classical variable with
// variance s^2 carries the diagonal entry 2 s^2; the classical displacement
// spread v_c used throughout the library is that diagonal entry.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvfid/errors.hpp"

namespace cvfid {

enum class VariableKind { quantum, classical };
enum class QuadratureRole { position, momentum };

// One real argument of a (hybrid) Wigner function. Variables sharing a `mode`
// form a conjugate (position, momentum) pair.
struct VariableLabel {
  std::string name;
  VariableKind kind = VariableKind::quantum;
  std::string mode;
  QuadratureRole role = QuadratureRole::position;

  bool operator==(const VariableLabel&) const = default;
};

using Labels = std::vector<VariableLabel>;

// Labels (x_<mode>, p_<mode>) style helpers; names are given explicitly.
Labels quantum_mode(std::string x_name, std::string p_name, std::string mode);
Labels classical_pair(std::string x_name, std::string p_name, std::string mode);
Labels concat(const Labels& a, const Labels& b);
std::vector<std::string> names_of(const Labels& labels);

// Throws ValidationError unless names are unique and every quantum mode has
// exactly one position and one momentum variable.
void validate_labels(const Labels& labels);

// Degenerate symplectic form: +1 at (x, p), -1 at (p, x) for each quantum
// mode, zero on classical rows and columns.
Eigen::MatrixXd symplectic_form(const Labels& labels);

std::size_t index_of(const Labels& labels, std::string_view name);

class GaussianState {
 public:
  // Symmetrizes `cov`; rejects shape mismatches and covariances with an
  // eigenvalue below -1e-10.
  GaussianState(Labels labels, Eigen::VectorXd mean, Eigen::MatrixXd cov);

  const Labels& labels() const { return labels_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  std::size_t size() const { return labels_.size(); }

  std::size_t index_of(std::string_view name) const;

  // Smallest eigenvalue of cov + i*Omega restricted to the quantum variables.
  // Negative values flag a state violating the uncertainty relation. Hybrid
  // states are still representable, so this is a diagnostic, not a check.
  double physicality_margin() const;
  bool is_physical(double tol = 1e-10) const { return physicality_margin() >= -tol; }

 private:
  Labels labels_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

// Real square matrix acting on the variables `inputs` and producing variables
// `outputs` (the same list unless the map is a change of basis).
class LinearMap {
 public:
  LinearMap(Labels inputs, Labels outputs, Eigen::MatrixXd matrix,
            std::string description = {}, bool physical = false);

  static LinearMap identity(const Labels& labels, std::string description = {});

  // Row `target` picks up `coeff` times variable `source`: target -> target + coeff*source.
  LinearMap& add(std::string_view target, std::string_view source, double coeff);
  LinearMap& set(std::string_view target, std::string_view source, double value);
  LinearMap& mark_physical(bool physical = true);
  LinearMap& rename_outputs(Labels outputs);

  const Labels& inputs() const { return inputs_; }
  const Labels& outputs() const { return outputs_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const std::string& description() const { return description_; }
  bool physical() const { return physical_; }

  // Inverse map, from outputs back to inputs. Throws ValidationError if singular.
  LinearMap inverse() const;
  // `next` applied after this map.
  LinearMap then(const LinearMap& next) const;

  // S Omega S^T == Omega within tol, with Omega the degenerate symplectic form.
  bool preserves_symplectic_form(double tol = 1e-10) const;

 private:
  Labels inputs_;
  Labels outputs_;
  Eigen::MatrixXd matrix_;
  std::string description_;
  bool physical_ = false;
};

// Homodyne-type measurement: the listed quantum variables are read out, and
// their conjugates become completely undetermined. The block B of the update
// formula is every variable of the measured modes, in state order, with the
// projector pi selecting the measured ones.
struct MeasurementSpec {
  std::vector<std::string> measured;
};

GaussianState vacuum_plus_classical(std::size_t quantum_pairs, double v_c);

GaussianState apply_map(const GaussianState& state, const LinearMap& map);

// Block-diagonal joint state.
GaussianState direct_sum(const GaussianState& a, const GaussianState& b);

// Restriction to `keep` in the given order.
GaussianState marginal(const GaussianState& state, std::span<const std::string> keep);
GaussianState marginal(const GaussianState& state, std::initializer_list<std::string> keep);

// Precomputed measurement update for a fixed covariance: A' = A - C (pi B pi)^- C^T
// and gain K = C (pi B pi)^- pi, so a conditioned mean is m_A + K (o - m_B).
class MeasurementUpdate {
 public:
  MeasurementUpdate(const GaussianState& state, const MeasurementSpec& spec);

  const Labels& remaining_labels() const { return remaining_labels_; }
  const Labels& block_labels() const { return block_labels_; }
  const std::vector<std::size_t>& remaining_indices() const { return remaining_; }
  const std::vector<std::size_t>& block_indices() const { return block_; }
  // Positions inside the block of each measured variable, in spec order.
  const std::vector<std::size_t>& measured_in_block() const { return measured_in_block_; }

  const Eigen::MatrixXd& conditioned_cov() const { return conditioned_cov_; }
  const Eigen::MatrixXd& gain() const { return gain_; }
  // pi B pi: covariance of the block with unmeasured entries zeroed.
  const Eigen::MatrixXd& projected_block_cov() const { return projected_block_cov_; }

  // Conditioned mean of the remaining variables given a full prior mean and
  // the measured values (spec order).
  Eigen::VectorXd conditioned_mean(const Eigen::VectorXd& prior_mean,
                                   const Eigen::VectorXd& outcomes) const;

  GaussianState apply(const GaussianState& state, const Eigen::VectorXd& outcomes) const;

 private:
  Labels remaining_labels_;
  Labels block_labels_;
  std::vector<std::size_t> remaining_;
  std::vector<std::size_t> block_;
  std::vector<std::size_t> measured_in_block_;
  Eigen::MatrixXd conditioned_cov_;
  Eigen::MatrixXd gain_;
  Eigen::MatrixXd projected_block_cov_;
};

GaussianState condition_on_measurement(const GaussianState& state, const MeasurementSpec& spec,
                                       const Eigen::VectorXd& outcomes);

// Overlap 2*pi*Int W_vac W_out of a zero-mean single-mode state with the vacuum:
// 2 sqrt(det(gamma_res)/det(gamma_out)) with gamma_res = (gamma_out^-1 + I)^-1.
double fidelity_vs_vacuum(const Eigen::Matrix2d& gamma_out);

// Overlap with a coherent state offset by `offset` from the state's mean:
// 2/sqrt(det(gamma+I)) * exp(-offset^T (gamma+I)^-1 offset).
double fidelity_vs_coherent(const Eigen::Matrix2d& gamma, const Eigen::Vector2d& offset);

// Eigendecomposition-based Moore-Penrose pseudoinverse of a symmetric matrix.
// Eigenvalues below rel_tol * max|eigenvalue| are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

}  // namespace cvfid
