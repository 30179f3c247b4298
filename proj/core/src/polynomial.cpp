#include "cvfid/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cvfid/errors.hpp"

namespace cvfid {

namespace {

Exponents add_exponents(const Exponents& a, const Exponents& b) {
  Exponents out{};
  for (std::size_t i = 0; i < kMaxVariables; ++i) {
    const unsigned s = unsigned{a[i]} + unsigned{b[i]};
    if (s > kMaxExponent) throw NumericalError("polynomial exponent overflow");
    out[i] = static_cast<std::uint8_t>(s);
  }
  return out;
}

}  // namespace

Polynomial::Polynomial(std::size_t num_variables) : num_variables_(num_variables) {
  if (num_variables > kMaxVariables) {
    throw ValidationError("polynomial: at most " + std::to_string(kMaxVariables) + " variables");
  }
}

Polynomial Polynomial::constant(std::size_t num_variables, double value) {
  Polynomial p(num_variables);
  p.add_term(Exponents{}, value);
  return p;
}

Polynomial Polynomial::affine(double c0, std::span<const double> coeffs) {
  Polynomial p(coeffs.size());
  p.add_term(Exponents{}, c0);
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    Exponents e{};
    e[i] = 1;
    p.add_term(e, coeffs[i]);
  }
  return p;
}

void Polynomial::add_term(const Exponents& e, double coeff) {
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::coefficient(const Exponents& e) const {
  const auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const { return coefficient(Exponents{}); }

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.num_variables_ != num_variables_) throw ValidationError("polynomial: variable count mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.num_variables_ != b.num_variables_) throw ValidationError("polynomial: variable count mismatch");
  Polynomial out(a.num_variables_);
  for (const auto& [ea, ca] : a.terms_) out.add_scaled_product(ea, ca, b);
  return out;
}

void Polynomial::add_scaled_product(const Exponents& e, double coeff, const Polynomial& q) {
  if (coeff == 0.0) return;
  for (const auto& [eq, cq] : q.terms_) add_term(add_exponents(e, eq), coeff * cq);
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (point.size() != num_variables_) throw ValidationError("polynomial: point dimension mismatch");
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < num_variables_; ++i) {
      for (unsigned k = 0; k < e[i]; ++k) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

unsigned Polynomial::total_degree() const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_) {
    unsigned s = 0;
    for (auto x : e) s += x;
    d = std::max(d, s);
  }
  return d;
}

unsigned Polynomial::degree_in(std::size_t var) const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_) d = std::max<unsigned>(d, e[var]);
  return d;
}

double Polynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void Polynomial::prune(double rel_tol, std::span<const double> scales) {
  if (scales.size() != num_variables_) throw ValidationError("polynomial: scale dimension mismatch");
  std::vector<std::vector<double>> weights(num_variables_);
  for (std::size_t i = 0; i < num_variables_; ++i) {
    const unsigned top = degree_in(i);
    weights[i].resize(top + 1);
    for (unsigned e = 0; e <= top; ++e) weights[i][e] = std::pow(scales[i], e);
  }
  prune_weighted(rel_tol, weights);
}

void Polynomial::prune_weighted(double rel_tol, const std::vector<std::vector<double>>& weights) {
  if (weights.size() != num_variables_) throw ValidationError("polynomial: weight dimension mismatch");
  auto weighted = [&](const Exponents& e, double c) {
    double w = std::abs(c);
    for (std::size_t i = 0; i < num_variables_; ++i) {
      if (e[i] >= weights[i].size()) throw ValidationError("polynomial: weight table too short");
      w *= weights[i][e[i]];
    }
    return w;
  };
  double largest = 0.0;
  for (const auto& [e, c] : terms_) largest = std::max(largest, weighted(e, c));
  const double cutoff = rel_tol * largest;
  std::erase_if(terms_, [&](const auto& kv) {
    return kv.second == 0.0 || weighted(kv.first, kv.second) < cutoff;
  });
}

void Polynomial::prune_zeros() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
}

Polynomial Polynomial::compose_linear(const Eigen::MatrixXd& r) const {
  const auto n = static_cast<Eigen::Index>(num_variables_);
  if (r.rows() != n || r.cols() != n) throw ValidationError("polynomial: substitution dimension mismatch");

  // powers[i][k] = (sum_j r(i, j) w_j)^k, built lazily.
  std::vector<std::vector<Polynomial>> powers(num_variables_);
  auto power = [&](std::size_t i, unsigned k) -> const Polynomial& {
    auto& cache = powers[i];
    if (cache.empty()) {
      cache.push_back(Polynomial::constant(num_variables_, 1.0));
      std::vector<double> row(num_variables_);
      for (std::size_t j = 0; j < num_variables_; ++j) {
        row[j] = r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      cache.push_back(Polynomial::affine(0.0, row));
    }
    while (cache.size() <= k) cache.push_back(cache.back() * cache[1]);
    return cache[k];
  };

  Polynomial out(num_variables_);
  for (const auto& [e, c] : terms_) {
    Polynomial term = Polynomial::constant(num_variables_, c);
    for (std::size_t i = 0; i < num_variables_; ++i) {
      if (e[i] > 0) term = term * power(i, e[i]);
    }
    out += term;
  }
  return out;
}

Polynomial Polynomial::evaluate_variable(std::size_t var, double value) const {
  if (var >= num_variables_) throw ValidationError("polynomial: variable index out of range");
  Polynomial out(num_variables_ - 1);
  for (const auto& [e, c] : terms_) {
    Exponents reduced{};
    for (std::size_t i = 0, j = 0; i < num_variables_; ++i) {
      if (i != var) reduced[j++] = e[i];
    }
    out.add_term(reduced, c * std::pow(value, e[var]));
  }
  return out;
}

Polynomial Polynomial::drop_variable(std::size_t var) const {
  if (degree_in(var) != 0) throw ValidationError("polynomial: cannot drop a variable still in use");
  return evaluate_variable(var, 1.0);
}

Polynomial Polynomial::embed(std::size_t num_variables, std::span<const std::size_t> position) const {
  if (position.size() != num_variables_) throw ValidationError("polynomial: embedding dimension mismatch");
  Polynomial out(num_variables);
  for (const auto& [e, c] : terms_) {
    Exponents moved{};
    for (std::size_t i = 0; i < num_variables_; ++i) {
      if (position[i] >= num_variables) throw ValidationError("polynomial: embedding index out of range");
      moved[position[i]] = e[i];
    }
    out.add_term(moved, c);
  }
  return out;
}

}  // namespace cvfid
