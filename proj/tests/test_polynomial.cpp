#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cvfid/polynomial.hpp"

using namespace cvfid;

namespace {

Exponents ex(std::initializer_list<int> e) {
  Exponents out{};
  std::size_t i = 0;
  for (int v : e) out[i++] = static_cast<std::uint8_t>(v);
  return out;
}

Polynomial random_poly(std::size_t vars, int terms, int max_deg, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::normal_distribution<double> coeff;
  Polynomial p(vars);
  for (int t = 0; t < terms; ++t) {
    Exponents e{};
    for (std::size_t v = 0; v < vars; ++v) e[v] = static_cast<std::uint8_t>(deg(rng));
    p.add_term(e, coeff(rng));
  }
  return p;
}

}  // namespace

TEST(Polynomial, BasicArithmetic) {
  Polynomial p(2);
  p.add_term(ex({1, 0}), 2.0);
  p.add_term(ex({0, 1}), -1.0);
  p.add_term(ex({0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(p.constant_term(), 0.5);
  EXPECT_EQ(p.total_degree(), 1u);
  const double pt[] = {1.5, -2.0};
  EXPECT_DOUBLE_EQ(p.evaluate(pt), 2.0 * 1.5 + 2.0 + 0.5);

  const Polynomial sq = p * p;
  EXPECT_DOUBLE_EQ(sq.evaluate(pt), std::pow(p.evaluate(pt), 2));
  EXPECT_DOUBLE_EQ(sq.coefficient(ex({1, 1})), -4.0);
  EXPECT_EQ(sq.degree_in(0), 2u);

  Polynomial cancel = p;
  Polynomial neg = p;
  neg *= -1.0;
  cancel += neg;
  EXPECT_TRUE(cancel.empty());
}

TEST(Polynomial, AffineAndScaledProduct) {
  const std::vector<double> c{1.0, -2.0, 0.0};
  const Polynomial a = Polynomial::affine(3.0, c);
  EXPECT_EQ(a.terms().size(), 3u);  // zero coefficient dropped
  Polynomial acc(3);
  acc.add_scaled_product(ex({0, 0, 2}), 0.5, a);
  const double pt[] = {0.3, 0.7, -1.2};
  EXPECT_NEAR(acc.evaluate(pt), 0.5 * 1.44 * a.evaluate(pt), 1e-15);
}

TEST(Polynomial, ExponentOverflowRejected) {
  Polynomial p(1);
  p.add_term(ex({200}), 1.0);
  EXPECT_THROW(p * p, std::exception);
}

TEST(Polynomial, ComposeLinearAgreesPointwise) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const Polynomial p = random_poly(n, 6, 3, rng);
    Eigen::MatrixXd r(n, n);
    for (auto& v : r.reshaped()) v = normal(rng);
    const Polynomial q = p.compose_linear(r);
    std::vector<double> w(n);
    for (auto& v : w) v = normal(rng);
    const Eigen::VectorXd old = r * Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(n));
    const double expected = p.evaluate(std::span<const double>(old.data(), n));
    EXPECT_NEAR(q.evaluate(w), expected, 1e-9 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Polynomial, EvaluateVariableDropAndEmbed) {
  std::mt19937_64 rng(8);
  const Polynomial p = random_poly(3, 8, 3, rng);
  const Polynomial q = p.evaluate_variable(1, 0.75);
  EXPECT_EQ(q.num_variables(), 2u);
  const double full[] = {0.2, 0.75, -0.6};
  const double part[] = {0.2, -0.6};
  EXPECT_NEAR(q.evaluate(part), p.evaluate(full), 1e-12);

  const std::size_t pos[] = {0, 2, 4};
  const Polynomial e = p.embed(5, pos);
  const double wide[] = {0.2, 9.0, 0.75, -3.0, -0.6};
  EXPECT_NEAR(e.evaluate(wide), p.evaluate(full), 1e-12);
  const Polynomial back = e.drop_variable(3).drop_variable(1);
  EXPECT_NEAR(back.evaluate(full), p.evaluate(full), 1e-12);
  EXPECT_THROW(e.drop_variable(0), std::exception);
}

TEST(Polynomial, ScaleWeightedPruning) {
  Polynomial p(2);
  p.add_term(ex({0, 0}), 1.0);
  p.add_term(ex({2, 0}), 1e-15);   // negligible at unit scale
  p.add_term(ex({0, 4}), 1e-15);   // but not when p spans ~1e2
  const double scales[] = {1.0, 100.0};
  p.prune(1e-14, scales);
  EXPECT_EQ(p.coefficient(ex({2, 0})), 0.0);
  EXPECT_EQ(p.coefficient(ex({0, 4})), 1e-15);
  EXPECT_EQ(p.terms().size(), 2u);
}
