#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "cvfid/fock.hpp"
#include "cvfid/optimize.hpp"
#include "cvfid/protocols.hpp"

using namespace cvfid;

TEST(Optimize, Parabola) {
  const auto r = optimize_gain([](double g) { return 1.0 - (g - 0.37) * (g - 0.37); });
  EXPECT_NEAR(r.gain, 0.37, 1e-7);
  EXPECT_NEAR(r.fidelity, 1.0, 1e-14);
  EXPECT_GT(r.evaluations, 16);
}

TEST(Optimize, EdgeMaximum) {
  const auto lo = optimize_gain([](double g) { return -g; });
  EXPECT_NEAR(lo.gain, 0.0, 1e-7);
  const auto hi = optimize_gain([](double g) { return g; }, GainSearchOptions{0.0, 1.5});
  EXPECT_NEAR(hi.gain, 1.5, 1e-7);
}

TEST(Optimize, CoarseScanPicksGlobalBracket) {
  // Two bumps; the taller one is near 1.6. A bare golden search from [0, 2] lands on the left bump.
  auto f = [](double g) { return 0.5 * std::exp(-40 * (g - 0.3) * (g - 0.3)) + std::exp(-40 * (g - 1.6) * (g - 1.6)); };
  EXPECT_NEAR(optimize_gain(f).gain, 1.6, 1e-4);
}

TEST(Optimize, Errors) {
  EXPECT_THROW(optimize_gain([](double) { return std::numeric_limits<double>::quiet_NaN(); }), NumericalError);
  EXPECT_THROW(optimize_gain([](double g) { return g; }, GainSearchOptions{1.0, 0.5}), ValidationError);
}

TEST(Optimize, TeleportGainMatchesClosedForm) {
  const double n = 2.0, k = std::sqrt(3.0), v = 1.0;
  const auto r = optimize_gain([&](double g) { return teleport_pipeline({n, k, v, g}).value; });
  EXPECT_NEAR(r.gain, optimal_gain_teleport(n, k, v), 1e-6);
  EXPECT_NEAR(r.fidelity, teleport_fidelity_analytic(n, k, v), 1e-12);
}

TEST(Optimize, MemoryGainMatchesClosedForm) {
  const auto r = optimize_gain([](double g) { return memory_pipeline({1.0, 1.0, 3.0, g}).value; });
  EXPECT_NEAR(r.gain, optimal_gain_memory(1.0, 3.0), 1e-6);
}

TEST(Optimize, FockSinglePhotonThroughVacuumChannel) {
  const auto r = optimize_gain([](double g) { return fock_teleport_fidelity(1, 1.0, 0.0, g).value; });
  EXPECT_NEAR(r.gain, 1.0 / std::numbers::sqrt2, 1e-4);
  EXPECT_NEAR(r.fidelity, 8.0 / 27.0, 1e-9);
}
