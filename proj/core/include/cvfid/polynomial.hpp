#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace cvfid {

inline constexpr std::size_t kMaxVariables = 12;
inline constexpr unsigned kMaxExponent = 255;

using Exponents = std::array<std::uint8_t, kMaxVariables>;

// Sparse real polynomial in up to kMaxVariables variables.
class Polynomial {
 public:
  using Terms = std::map<Exponents, double>;

  explicit Polynomial(std::size_t num_variables = 0);

  static Polynomial constant(std::size_t num_variables, double value);
  // c0 + sum_i coeffs[i] v_i
  static Polynomial affine(double c0, std::span<const double> coeffs);

  std::size_t num_variables() const { return num_variables_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const Exponents& e, double coeff);
  double coefficient(const Exponents& e) const;
  double constant_term() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator*=(double s);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  // this += coeff * x^e * q
  void add_scaled_product(const Exponents& e, double coeff, const Polynomial& q);

  double evaluate(std::span<const double> point) const;
  unsigned total_degree() const;
  unsigned degree_in(std::size_t var) const;
  double max_abs_coefficient() const;

  // Drops terms with |c| * prod scale_i^e_i below rel_tol times the largest
  // such weighted magnitude; also drops exact zeros.
  void prune(double rel_tol, std::span<const double> scales);
  // Same with an arbitrary per-power weight: weights[i][e] stands in for the
  // size of v_i^e (the table must cover every exponent present).
  void prune_weighted(double rel_tol, const std::vector<std::vector<double>>& weights);
  void prune_zeros();

  // Old variable v_i becomes sum_j r(i, j) w_j.
  Polynomial compose_linear(const Eigen::MatrixXd& r) const;

  // Variable `var` fixed to `value` and removed (higher variables shift down).
  Polynomial evaluate_variable(std::size_t var, double value) const;
  // Removes a variable that no term depends on.
  Polynomial drop_variable(std::size_t var) const;
  // Embeds into a larger variable set: old variable i becomes new variable position[i].
  Polynomial embed(std::size_t num_variables, std::span<const std::size_t> position) const;

 private:
  std::size_t num_variables_;
  Terms terms_;
};

}  // namespace cvfid
