#pragma once

// Functions of the form P(v) * exp(-v^T M v + b^T v + c) with P a sparse
// polynomial. The family is closed under products, invertible linear changes
// of variables, partial evaluation and Gaussian integration, which makes it an
// exact representation for Fock-state Wigner functions pushed through
// Gaussian protocols.

#include <Eigen/Dense>

#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvfid/gaussian.hpp"
#include "cvfid/polynomial.hpp"

namespace cvfid {

class PolyGauss {
 public:
  PolyGauss(std::vector<std::string> labels, Polynomial poly, Eigen::MatrixXd quad,
            Eigen::VectorXd lin, double constant);

  // Function of no variables with value `value` (> 0 for the log-scale constant,
  // sign carried by the polynomial).
  static PolyGauss scalar(double value);

  const std::vector<std::string>& labels() const { return labels_; }
  const Polynomial& poly() const { return poly_; }
  const Eigen::MatrixXd& quad() const { return quad_; }
  const Eigen::VectorXd& lin() const { return lin_; }
  double constant() const { return constant_; }
  std::size_t size() const { return labels_.size(); }

  std::size_t index_of(std::string_view name) const;

  double value_at(std::span<const double> point) const;
  // Value of a function with no variables left.
  double scalar_value() const;

  // M symmetric, dimensions consistent, no explicit zero coefficients.
  void check_invariants() const;

 private:
  std::vector<std::string> labels_;
  Polynomial poly_;
  Eigen::MatrixXd quad_;
  Eigen::VectorXd lin_;
  double constant_;
};

// Wigner function of a Gaussian state with positive definite covariance.
PolyGauss from_gaussian(const GaussianState& state);

// Fock-state Wigner function ((-1)^N / pi) L_N(2(x^2 + p^2)) exp(-x^2 - p^2).
PolyGauss fock_wigner(int n_photons, std::string x = "x", std::string p = "p");

// Pointwise product. Shared labels must appear in the same relative order.
PolyGauss product(const PolyGauss& a, const PolyGauss& b);

// W'(v) = W(S^-1 v) |det S^-1|, with S's inputs matching W's labels.
PolyGauss substitute_linear(const PolyGauss& w, const LinearMap& map);

// Exact integration over the named variables, greedily ordered by the largest
// diagonal entry of M.
PolyGauss integrate_out(const PolyGauss& w, std::span<const std::string> names);
PolyGauss integrate_out(const PolyGauss& w, std::initializer_list<std::string> names);
// Same, in exactly the given order.
PolyGauss integrate_out_in_order(const PolyGauss& w, std::span<const std::string> names);

// Integral over all variables.
double integral(const PolyGauss& w);

// Partial evaluation at label = value; the result keeps its weight (unnormalized).
PolyGauss evaluate_at(const PolyGauss& w, std::string_view label, double value);

// 2 pi Int W1 W2 over a shared pair of variables.
double overlap(const PolyGauss& a, const PolyGauss& b);

}  // namespace cvfid
