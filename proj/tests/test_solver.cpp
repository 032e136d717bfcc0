#include <gtest/gtest.h>

#include <numbers>

#include "finsler/sampling.hpp"
#include "finsler/solver.hpp"
#include "finsler/catalog.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

struct Instance {
  HomogeneousFunction phi;
  Vec x, y;
};

// Random phi from the real families with |x| inside 0.8 of its radius estimate.
std::vector<Instance> instances(std::size_t count, std::uint64_t seed) {
  SeededSampler rng(seed);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    HomogeneousFunction phi = HomogeneousFunction::euclidean(2);
    switch (i % 5) {
      case 0: break;
      case 1: phi = HomogeneousFunction::scaled(2, rng.uniform(-2.0, 2.0)); break;
      case 2: phi = HomogeneousFunction::randers({rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)}); break;
      case 3: phi = HomogeneousFunction::dsr_a(1, 1); break;
      case 4: phi = HomogeneousFunction::dsr_b(1, 1); break;
    }
    const double r = radius_estimate(phi);
    Vec x = rng.in_ball(2, 0.8 * std::min(r, 10.0));
    Vec y = rng.direction(2);
    const double s = rng.uniform(0.3, 3.0);
    for (double& c : y) c *= s;
    out.push_back({phi, x, y});
  }
  return out;
}

}  // namespace

TEST(SolveReal, Basics) {
  EXPECT_EQ(solve_real(HomogeneousFunction::zero(2), Vec{0.3, 0.1}, Vec{1.0, 2.0}).value, 0.0);
  const auto r = solve_real(HomogeneousFunction::euclidean(1), Vec{0.5}, Vec{1.0});
  EXPECT_NEAR(r.value, 2.0, 1e-14);
  EXPECT_TRUE(r.converged);
}

TEST(SolveReal, ScaledClosedForm) {
  const Vec x{0.3, 0.1}, y{1.0, 2.0};
  const auto r = solve_real(HomogeneousFunction::scaled(2, 0.7), x, y);
  EXPECT_NEAR(r.value, oracle::scaled_root(0.7, x, y), 1e-10);
  EXPECT_NEAR(solve_real(HomogeneousFunction::scaled(2, -0.7), x, y).value, oracle::scaled_root(-0.7, x, y), 1e-10);
}

TEST(SolveReal, MatchesBisectionOracle) {
  for (const auto& in : instances(100, 21)) {
    const auto r = solve_real(in.phi, in.x, in.y);
    EXPECT_LE(r.residual, 1e-12);
    const auto phi = [&](const Vec& v) { return oracle::norm(v) == 0.0 ? 0.0 : in.phi.eval_real(v); };
    const double T = 4.0 * (oracle::norm(in.y) + 1.0) * (1.0 + 2.0 * radius_estimate(in.phi));
    EXPECT_NEAR(r.value, oracle::fixed_point_bisection(phi, in.x, in.y, T), 1e-10 * (1.0 + std::abs(r.value)));
  }
}

TEST(SolveReal, UniqueRootOnDenseScan) {
  for (const auto& in : instances(100, 22)) {
    const auto phi = [&](const Vec& v) { return oracle::norm(v) == 0.0 ? 0.0 : in.phi.eval_real(v); };
    const double T = 4.0 * (oracle::norm(in.y) + 1.0) * 10.0;
    EXPECT_EQ(oracle::count_sign_changes(phi, in.x, in.y, T, 20000), 1) << in.phi.describe();
  }
}

TEST(SolveReal, RejectsBadConfig) {
  SolverConfig cfg;
  cfg.tolerance = -1.0;
  EXPECT_THROW(solve_real(HomogeneousFunction::euclidean(1), Vec{0.1}, Vec{1.0}, cfg), std::invalid_argument);
}

TEST(SolveComplex, ExplicitAtOrigin) {
  const auto r = solve_complex(HomogeneousFunction::zero(2), HomogeneousFunction::euclidean(2), Vec{0.0, 0.0},
                               Vec{3.0, 4.0});
  EXPECT_NEAR(std::abs(r.value - Complex(0.0, 5.0)), 0.0, 1e-14);
}

TEST(SolveComplex, SphereMetric) {
  const auto r = solve_complex(HomogeneousFunction::zero(2), HomogeneousFunction::euclidean(2), Vec{0.5, 0.0},
                               Vec{0.0, 1.0});
  EXPECT_NEAR(r.value.imag(), 1.0 / std::sqrt(1.25), 1e-12);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(SolveComplex, BryantPair) {
  const double a = std::numbers::pi / 6;
  const auto pair = HomogeneousFunction::bryant_pair(2, a);
  const Vec x{0.2, 0.1}, y{1.0, 0.0};
  const auto r = solve_complex(pair, HomogeneousFunction::zero(2), x, y);
  EXPECT_NEAR(r.value.imag(), oracle::bryant_abcd(a, x, y), 1e-9);
}

TEST(SolveComplex, PicardAgreesWithNestedScalarSolve) {
  SeededSampler rng(8);
  const auto phi = HomogeneousFunction::dsr_a(1, 1), psi = HomogeneousFunction::dsr_b(1, 1);
  const double r = radius_estimate_complex(phi, psi);
  for (int i = 0; i < 20; ++i) {
    const Vec x = rng.in_ball(2, 0.8 * r), y = rng.direction(2);
    const auto a = solve_complex(phi, psi, x, y);
    const auto b = solve_complex_nested(phi, psi, x, y);
    EXPECT_LE(a.residual, 1e-12);
    EXPECT_NEAR(std::abs(a.value - b.value), 0.0, 1e-10);
  }
}

TEST(ImplicitDerivatives, ZeroAndOrigin) {
  const Vec y{3.0, 4.0};
  const auto z = implicit_derivatives(HomogeneousFunction::zero(2), solve_real(HomogeneousFunction::zero(2),
                                                                               Vec{0.1, 0.2}, y),
                                      Vec{0.1, 0.2}, y);
  EXPECT_EQ(oracle::norm(z.p_y), 0.0);
  EXPECT_EQ(oracle::norm(z.p_x), 0.0);
  const auto e = HomogeneousFunction::euclidean(2);
  const auto d = implicit_derivatives(e, solve_real(e, Vec{0.0, 0.0}, y), Vec{0.0, 0.0}, y);
  EXPECT_NEAR(d.p_y[0], 0.6, 1e-15);
  EXPECT_NEAR(d.p_x[1], 5.0 * 0.8, 1e-14);
}

TEST(ImplicitDerivatives, MatchDifferences) {
  const auto e = HomogeneousFunction::euclidean(2);
  const Vec x{0.3, 0.0}, y{1.0, 1.0};
  const auto d = implicit_derivatives(e, solve_real(e, x, y), x, y);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(d.p_y[k], oracle::central_diff([&](const Vec& v) { return solve_real(e, x, v).value; }, y, k, 1e-6),
                1e-6);
    EXPECT_NEAR(d.p_x[k], oracle::central_diff([&](const Vec& v) { return solve_real(e, v, y).value; }, x, k, 1e-6),
                1e-6);
  }
}

TEST(ImplicitDerivatives, ComplexMatchDifferences) {
  const auto phi = HomogeneousFunction::scaled(2, 0.3), psi = HomogeneousFunction::euclidean(2);
  const Vec x{0.2, -0.1}, y{0.4, 0.9};
  const auto d = complex_implicit_derivatives(phi, psi, solve_complex(phi, psi, x, y), x);
  for (std::size_t k = 0; k < 2; ++k) {
    const double fx = oracle::central_diff([&](const Vec& v) { return solve_complex(phi, psi, v, y).value.imag(); },
                                           x, k, 1e-6);
    const double fy = oracle::central_diff([&](const Vec& v) { return solve_complex(phi, psi, x, v).value.imag(); },
                                           y, k, 1e-6);
    EXPECT_NEAR(d.psi_x[k].imag(), fx, 1e-7);
    EXPECT_NEAR(d.psi_y[k].imag(), fy, 1e-7);
  }
}

TEST(Radius, Estimates) {
  EXPECT_EQ(radius_estimate(HomogeneousFunction::zero(2)), unbounded_radius);
  EXPECT_NEAR(radius_estimate(HomogeneousFunction::euclidean(2)), 0.5, 1e-12);
  EXPECT_NEAR(radius_estimate(HomogeneousFunction::scaled(2, 2.0)), 0.25, 1e-12);
}

TEST(SolverProperties, MasterEquationHoldsExactly) {
  for (const auto& in : instances(50, 23)) {
    const auto d = implicit_derivatives(in.phi, solve_real(in.phi, in.x, in.y), in.x, in.y);
    const double p = solve_real(in.phi, in.x, in.y).value;
    for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(d.p_x[k], p * d.p_y[k], 1e-10 * (1.0 + std::abs(d.p_x[k])));
  }
}

TEST(SolverProperties, HomogeneousInY) {
  for (const auto& in : instances(50, 24)) {
    const double p = solve_real(in.phi, in.x, in.y).value;
    for (double l : {0.5, 3.0}) {
      Vec ly = in.y;
      for (double& c : ly) c *= l;
      EXPECT_NEAR(solve_real(in.phi, in.x, ly).value, l * p, 1e-12 * (1.0 + std::abs(l * p)));
    }
  }
}
