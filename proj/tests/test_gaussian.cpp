#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cvfid/gaussian.hpp"
#include "oracles.hpp"

using namespace cvfid;

namespace {

constexpr int kInstances = 1000;

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

LinearMap displacement_map() {
  const auto labels = vacuum_plus_classical(1, 0.0).labels();
  return LinearMap::identity(labels).add("x1", "x_cl", 1.0).add("p1", "p_cl", 1.0).mark_physical();
}

}  // namespace

TEST(VacuumPlusClassical, KnownVacuumHasZeroClassicalBlock) {
  const auto s = vacuum_plus_classical(1, 0.0);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_TRUE(s.cov().isApprox(Eigen::Vector4d(1, 1, 0, 0).asDiagonal().toDenseMatrix()));
  EXPECT_TRUE(s.mean().isZero());
}

TEST(VacuumPlusClassical, ClassicalBlockCarriesSpread) {
  const auto s = vacuum_plus_classical(1, 5.0);
  EXPECT_EQ(s.cov(), Eigen::Vector4d(1, 1, 5, 5).asDiagonal().toDenseMatrix());
  EXPECT_EQ(s.labels()[2].kind, VariableKind::classical);
}

TEST(VacuumPlusClassical, TwoPairs) {
  const auto s = vacuum_plus_classical(2, 1.0);
  EXPECT_EQ(s.cov(), Eigen::MatrixXd::Identity(6, 6));
}

TEST(VacuumPlusClassical, RejectsNegativeSpread) {
  EXPECT_THROW(vacuum_plus_classical(1, -1.0), ValidationError);
}

TEST(Labels, QuantumModesNeedBothQuadratures) {
  Labels half{{"x", VariableKind::quantum, "a", QuadratureRole::position}};
  EXPECT_THROW(validate_labels(half), ValidationError);
  EXPECT_THROW(validate_labels(concat(quantum_mode("x", "p", "a"), quantum_mode("x", "q", "b"))),
               ValidationError);
}

TEST(GaussianStateCtor, SymmetrizesAndRejectsNegativeEigenvalues) {
  Eigen::Matrix2d c;
  c << 1.0, 0.2 + 1e-13, 0.2, 1.0;
  const GaussianState s(quantum_mode("x", "p", "a"), Eigen::Vector2d::Zero(), c);
  EXPECT_EQ(s.cov()(0, 1), s.cov()(1, 0));
  EXPECT_THROW(GaussianState(quantum_mode("x", "p", "a"), Eigen::Vector2d::Zero(),
                             Eigen::Vector2d(1.0, -1e-6).asDiagonal().toDenseMatrix()),
               ValidationError);
  EXPECT_THROW(GaussianState(quantum_mode("x", "p", "a"), Eigen::Vector3d::Zero(), c), ValidationError);
}

TEST(GaussianStateCtor, PhysicalityIsDiagnosticOnly) {
  // Squeezed below the uncertainty bound: representable, flagged.
  const GaussianState s(quantum_mode("x", "p", "a"), Eigen::Vector2d::Zero(),
                        Eigen::Vector2d(0.5, 0.5).asDiagonal().toDenseMatrix());
  EXPECT_FALSE(s.is_physical());
  EXPECT_NEAR(s.physicality_margin(), -0.5, 1e-12);
  EXPECT_TRUE(vacuum_plus_classical(2, 0.0).is_physical());
}

TEST(ApplyMap, IdentityLeavesStateUnchanged) {
  std::mt19937_64 rng(11);
  const auto s = oracle::random_physical_state(2, 1, rng);
  const auto t = apply_map(s, LinearMap::identity(s.labels()));
  EXPECT_EQ(t.cov(), s.cov());
  EXPECT_EQ(t.mean(), s.mean());
}

TEST(ApplyMap, ClassicalDisplacementByHand) {
  // x1 -> x1 + x_cl: Var(x1) = 1 + v, Cov(x1, x_cl) = v.
  const double v = 3.5;
  const auto s = apply_map(vacuum_plus_classical(1, v), displacement_map());
  EXPECT_DOUBLE_EQ(s.cov()(0, 0), 1.0 + v);
  EXPECT_DOUBLE_EQ(s.cov()(1, 1), 1.0 + v);
  EXPECT_DOUBLE_EQ(s.cov()(0, 2), v);
  EXPECT_DOUBLE_EQ(s.cov()(1, 3), v);
  EXPECT_DOUBLE_EQ(s.cov()(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(s.cov()(2, 2), v);
}

TEST(ApplyMap, BasisChangeIsOrthogonal) {
  std::mt19937_64 rng(12);
  const auto s = oracle::random_physical_state(2, 0, rng);
  const double h = std::numbers::sqrt2 / 2.0;
  auto t = LinearMap::identity(s.labels());
  t.set("x0", "x0", h).set("x0", "x1", h).set("x1", "x0", h).set("x1", "x1", -h);
  t.set("p0", "p0", h).set("p0", "p1", h).set("p1", "p0", h).set("p1", "p1", -h);
  EXPECT_TRUE((t.matrix() * t.matrix().transpose()).isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-15));
  const auto back = apply_map(apply_map(s, t), t);  // this T is its own inverse
  EXPECT_LT((back.cov() - s.cov()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyMap, RejectsMismatchedVariables) {
  const auto s = vacuum_plus_classical(1, 1.0);
  EXPECT_THROW(apply_map(s, LinearMap::identity(vacuum_plus_classical(2, 1.0).labels())), ValidationError);
}

TEST(Conditioning, ScalarSchurComplement) {
  // A = (x0, p0); measured x1 with variance b, cross covariance column c.
  const double b = 2.5;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(4, 4) * 3.0;
  cov(2, 2) = b;
  cov(0, 2) = cov(2, 0) = 0.7;
  cov(1, 2) = cov(2, 1) = -0.4;
  const GaussianState s(oracle::mode_labels(2), Eigen::VectorXd::Zero(4), cov);
  const double xi = 1.3;
  const auto c = condition_on_measurement(s, MeasurementSpec{{"x1"}}, Eigen::VectorXd::Constant(1, xi));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.labels()[0].name, "x0");
  const Eigen::Vector2d col(0.7, -0.4);
  EXPECT_NEAR((c.mean() - col * xi / b).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  const Eigen::Matrix2d expected = 3.0 * Eigen::Matrix2d::Identity() - col * col.transpose() / b;
  EXPECT_NEAR((c.cov() - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Conditioning, RejectsBadInput) {
  const auto s = vacuum_plus_classical(2, 1.0);
  EXPECT_THROW(condition_on_measurement(s, MeasurementSpec{{"x2"}}, Eigen::VectorXd::Zero(2)), ValidationError);
  EXPECT_THROW(condition_on_measurement(s, MeasurementSpec{{"nope"}}, Eigen::VectorXd::Zero(1)), ValidationError);
  EXPECT_THROW(condition_on_measurement(s, MeasurementSpec{{"x_cl"}}, Eigen::VectorXd::Zero(1)), ValidationError);
  EXPECT_THROW(condition_on_measurement(s, MeasurementSpec{{"x2", "p2"}}, Eigen::VectorXd::Zero(2)),
               ValidationError);
}

TEST(Conditioning, GeneralMeanReducesToZeroPriorForm) {
  std::mt19937_64 rng(13);
  const auto s = oracle::random_physical_state(3, 1, rng);
  const MeasurementUpdate u(s, MeasurementSpec{{"p1", "x2"}});
  const Eigen::Vector2d o(0.3, -1.1);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.size()));
  const Eigen::VectorXd m0 = u.conditioned_mean(zero, o);
  // Shifting all priors by d shifts the outcome-relative reference: m_A + K(o - m_B).
  const Eigen::VectorXd d = s.mean();
  const Eigen::VectorXd m = u.conditioned_mean(d, o);
  Eigen::VectorXd m_a(static_cast<Eigen::Index>(u.remaining_indices().size()));
  for (std::size_t i = 0; i < u.remaining_indices().size(); ++i)
    m_a(static_cast<Eigen::Index>(i)) = d(static_cast<Eigen::Index>(u.remaining_indices()[i]));
  Eigen::Vector2d m_b(d(static_cast<Eigen::Index>(s.index_of("p1"))), d(static_cast<Eigen::Index>(s.index_of("x2"))));
  const Eigen::VectorXd expected = m_a + u.conditioned_mean(zero, o - m_b);
  EXPECT_LT((m - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(m0.size(), 4);
}

TEST(Marginal, Restriction) {
  const auto s = vacuum_plus_classical(1, 5.0);
  EXPECT_EQ(marginal(s, {"x1", "p1", "x_cl", "p_cl"}).cov(), s.cov());
  EXPECT_EQ(marginal(s, {"x1", "p1"}).cov(), Eigen::Matrix2d::Identity().eval());
  EXPECT_THROW(marginal(s, {"x9"}), ValidationError);
}

TEST(FidelityVsVacuum, Examples) {
  EXPECT_DOUBLE_EQ(fidelity_vs_vacuum(Eigen::Matrix2d::Identity()), 1.0);
  EXPECT_NEAR(fidelity_vs_vacuum(2.0 * Eigen::Matrix2d::Identity()), 2.0 / 3.0, 1e-15);
  EXPECT_THROW(fidelity_vs_vacuum(Eigen::Vector2d(1.0, -0.1).asDiagonal()), ValidationError);
}

TEST(FidelityVsVacuum, DiagonalMatchesGridOverlap) {
  for (auto [a, b] : {std::pair{1.5, 0.7}, std::pair{3.0, 0.4}, std::pair{0.9, 2.2}}) {
    const double closed = 2.0 / std::sqrt((a + 1.0) * (b + 1.0));
    EXPECT_NEAR(fidelity_vs_vacuum(Eigen::Vector2d(a, b).asDiagonal()), closed, 1e-14);
    // 2 pi Int W_vac W_out, density variances a/2 and b/2.
    const double grid = 2.0 * std::numbers::pi * oracle::grid_integrate([&](double x, double p) {
      const double vac = std::exp(-x * x - p * p) / std::numbers::pi;
      const double out = std::exp(-x * x / a - p * p / b) / (std::numbers::pi * std::sqrt(a * b));
      return vac * out;
    });
    EXPECT_NEAR(grid, closed, 1e-6);
  }
}

TEST(FidelityVsCoherent, Examples) {
  EXPECT_DOUBLE_EQ(fidelity_vs_coherent(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()), 1.0);
  for (double d : {0.3, 1.0, 2.2}) {
    const double f = fidelity_vs_coherent(Eigen::Matrix2d::Identity(), Eigen::Vector2d(d, 0.0));
    EXPECT_NEAR(f, std::exp(-d * d / 2.0), 1e-15);
    const double grid = 2.0 * std::numbers::pi * oracle::grid_integrate([&](double x, double p) {
      return std::exp(-x * x - p * p) * std::exp(-(x - d) * (x - d) - p * p) / (std::numbers::pi * std::numbers::pi);
    });
    EXPECT_NEAR(grid, f, 1e-6);
  }
  std::mt19937_64 rng(14);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix2d g = oracle::random_psd(2, rng, 2, 0.05);
    EXPECT_DOUBLE_EQ(fidelity_vs_coherent(g, Eigen::Vector2d::Zero()), fidelity_vs_vacuum(g));
  }
}

TEST(FidelityVsCoherent, CorrelatedOffsetMatchesGrid) {
  Eigen::Matrix2d g;
  g << 1.8, 0.5, 0.5, 1.2;
  const Eigen::Vector2d d(0.6, -0.9);
  const Eigen::Matrix2d inv = g.inverse();
  const double norm = 1.0 / (std::numbers::pi * std::sqrt(g.determinant()));
  const double grid = 2.0 * std::numbers::pi * oracle::grid_integrate([&](double x, double p) {
    const Eigen::Vector2d v(x, p);
    const Eigen::Vector2d w = v - d;
    return std::exp(-v.squaredNorm()) / std::numbers::pi * norm * std::exp(-w.dot(inv * w));
  });
  EXPECT_NEAR(fidelity_vs_coherent(g, d), grid, 1e-6);
}

TEST(PseudoInverse, Examples) {
  const Eigen::MatrixXd d = Eigen::Vector4d(2, 0, 3, 0).asDiagonal();
  const Eigen::MatrixXd expected = Eigen::Vector4d(0.5, 0, 1.0 / 3.0, 0).asDiagonal();
  EXPECT_LT((pseudo_inverse(d) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(pseudo_inverse(Eigen::MatrixXd::Zero(3, 3)).isZero());

  std::mt19937_64 rng(15);
  const Eigen::MatrixXd m = oracle::random_psd(5, rng, 5, 0.5);
  EXPECT_LT((pseudo_inverse(m) * m - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-10);
}

TEST(PseudoInverse, PenroseConditions) {
  std::mt19937_64 rng(16);
  const Eigen::VectorXd u = oracle::random_matrix(4, 1, rng);
  const Eigen::MatrixXd a = u * u.transpose();
  const Eigen::MatrixXd p = pseudo_inverse(a);
  EXPECT_LT((p - a / std::pow(u.squaredNorm(), 2)).cwiseAbs().maxCoeff(), 1e-12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    const Eigen::MatrixXd m = oracle::random_psd(n, rng, 1 + trial % n);
    const Eigen::MatrixXd x = pseudo_inverse(m);
    const double scale = std::max(1.0, m.norm() * x.norm());
    EXPECT_LT((m * x * m - m).norm(), 1e-9 * scale * m.norm());
    EXPECT_LT((x * m * x - x).norm(), 1e-9 * scale * x.norm());
    EXPECT_LT(((m * x).transpose() - m * x).norm(), 1e-9 * scale);
    EXPECT_LT(((x * m).transpose() - x * m).norm(), 1e-9 * scale);
  }
}

// --- properties over random instances ---------------------------------------

TEST(GaussianProperties, ConditioningNeverIncreasesUncertainty) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> modes(2, 4);
  int failures = 0;
  for (int i = 0; i < kInstances; ++i) {
    const int m = modes(rng);
    const auto s = oracle::random_physical_state(m, i % 2, rng);
    const std::string target = (i % 3 == 0) ? "p1" : "x1";
    const MeasurementUpdate u(s, MeasurementSpec{{target}});
    Eigen::MatrixXd a(u.remaining_indices().size(), u.remaining_indices().size());
    for (std::size_t r = 0; r < u.remaining_indices().size(); ++r)
      for (std::size_t c = 0; c < u.remaining_indices().size(); ++c)
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            s.cov()(static_cast<Eigen::Index>(u.remaining_indices()[r]),
                    static_cast<Eigen::Index>(u.remaining_indices()[c]));
    if (min_eigenvalue(a - u.conditioned_cov()) < -1e-10) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(GaussianProperties, ConditionedCovarianceIgnoresOutcome) {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> normal(0.0, 3.0);
  int failures = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto s = oracle::random_physical_state(3, 1, rng);
    const MeasurementSpec spec{{"x1", "p2"}};
    const auto a = condition_on_measurement(s, spec, Eigen::Vector2d(normal(rng), normal(rng)));
    const auto b = condition_on_measurement(s, spec, Eigen::Vector2d(normal(rng), normal(rng)));
    if (a.cov() != b.cov()) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(GaussianProperties, AgreesWithTextbookSchurComplement) {
  std::mt19937_64 rng(103);
  int failures = 0;
  for (int i = 0; i < kInstances; ++i) {
    const int modes = 2 + i % 3, classical = i % 2;
    const auto labels = oracle::mode_labels(modes, classical);
    const int n = static_cast<int>(labels.size());
    // Random PSD, full rank so the measured sub-block is invertible.
    const Eigen::MatrixXd cov = oracle::random_psd(n, rng, n, 0.05);
    const GaussianState s(labels, Eigen::VectorXd::Zero(n), cov);
    const std::vector<std::string> measured = (i % 2 == 0) ? std::vector<std::string>{"x0"}
                                                           : std::vector<std::string>{"x0", "p1"};
    const MeasurementUpdate u(s, MeasurementSpec{measured});
    std::vector<Eigen::Index> kept, meas;
    for (auto r : u.remaining_indices()) kept.push_back(static_cast<Eigen::Index>(r));
    for (const auto& name : measured) meas.push_back(static_cast<Eigen::Index>(s.index_of(name)));
    const auto ka = static_cast<Eigen::Index>(kept.size()), km = static_cast<Eigen::Index>(meas.size());
    Eigen::MatrixXd a(ka, ka), c(ka, km), b(km, km);
    for (Eigen::Index r = 0; r < ka; ++r) {
      for (Eigen::Index q = 0; q < ka; ++q) a(r, q) = cov(kept[r], kept[q]);
      for (Eigen::Index q = 0; q < km; ++q) c(r, q) = cov(kept[r], meas[q]);
    }
    for (Eigen::Index r = 0; r < km; ++r)
      for (Eigen::Index q = 0; q < km; ++q) b(r, q) = cov(meas[r], meas[q]);
    const Eigen::MatrixXd textbook = a - c * b.inverse() * c.transpose();
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((textbook - u.conditioned_cov()).cwiseAbs().maxCoeff() > 1e-9 * scale) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(GaussianProperties, MapThenInverseRestoresState) {
  std::mt19937_64 rng(104);
  int failures = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto s = oracle::random_physical_state(2, 1, rng);
    const auto n = static_cast<int>(s.size());
    Eigen::MatrixXd m = oracle::random_matrix(n, n, rng) * 0.4 + Eigen::MatrixXd::Identity(n, n);
    const LinearMap map(s.labels(), s.labels(), m, "random");
    const auto back = apply_map(apply_map(s, map), map.inverse());
    const double scale = std::max(1.0, s.cov().cwiseAbs().maxCoeff()) * m.norm() * m.inverse().norm();
    if ((back.cov() - s.cov()).cwiseAbs().maxCoeff() > 1e-10 * scale ||
        (back.mean() - s.mean()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(GaussianProperties, PhysicalMapsPreserveSymplecticForm) {
  std::mt19937_64 rng(105);
  int failures = 0;
  for (int i = 0; i < kInstances; ++i) {
    const int modes = 1 + i % 4;
    const auto labels = oracle::mode_labels(modes, 1);
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    m.topLeftCorner(2 * modes, 2 * modes) = oracle::random_symplectic(modes, rng);
    // Displacements by classical variables act trivially on the form.
    m.topRightCorner(2 * modes, 2) = oracle::random_matrix(2 * modes, 2, rng);
    LinearMap map(labels, labels, m, "random physical", true);
    if (!map.preserves_symplectic_form(1e-10)) ++failures;
    // Composition with the inverse stays physical.
    if (!map.then(map.inverse()).preserves_symplectic_form(1e-9)) ++failures;
    // Physical states stay physical.
    const auto s = oracle::random_physical_state(modes, 1, rng);
    if (!apply_map(s, map).is_physical(1e-8)) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(GaussianProperties, NonSymplecticMapDetected) {
  const auto labels = oracle::mode_labels(1);
  LinearMap map(labels, labels, Eigen::Vector2d(2.0, 1.0).asDiagonal().toDenseMatrix());
  EXPECT_FALSE(map.preserves_symplectic_form());
}

TEST(GaussianProperties, VacuumFidelityBoundedByOne) {
  std::mt19937_64 rng(106);
  int failures = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto s = oracle::random_physical_state(1, 0, rng);
    const double f = fidelity_vs_vacuum(s.cov());
    const bool is_vacuum = (s.cov() - Eigen::Matrix2d::Identity()).norm() < 1e-9;
    if (f > 1.0 + 1e-12 || (f > 1.0 - 1e-12 && !is_vacuum)) ++failures;
  }
  EXPECT_EQ(failures, 0);
}
