#include <gtest/gtest.h>

#include <numbers>

#include "finsler/construct.hpp"
#include "finsler/sampling.hpp"
#include "finsler/verify.hpp"
#include "oracles.hpp"

using namespace finsler;
using HF = HomogeneousFunction;

namespace {

// Points well inside a metric's domain.
std::vector<SamplePoint> interior(const MetricEvaluator& m, std::size_t count, std::uint64_t seed,
                                  double cap = 0.5) {
  return sample_points(m.dimension(), std::min(cap, 0.9 * m.domain_radius()), count, seed);
}

void expect_same_metric(const MetricEvaluator& a, const std::function<double(const Vec&, const Vec&)>& b,
                        std::size_t count, double rel_tol, double cap = 0.5) {
  for (const auto& p : interior(a, count, 99, cap)) {
    const double fa = a.eval(p.x, p.y), fb = b(p.x, p.y);
    EXPECT_LE(std::abs(fa - fb), rel_tol * std::abs(fb)) << a.name() << " at |x| = " << oracle::norm(p.x);
  }
}

}  // namespace

TEST(BuildK0, EuclideanIsFlat) {
  const auto m = build_k0(HF::euclidean(2), HF::zero(2));
  EXPECT_NEAR(m.eval(Vec{0.4, 0.4}, Vec{1.0, 2.0}), std::sqrt(5.0), 1e-14);
  EXPECT_EQ(*m.projective_factor_exact(Vec{0.4, 0.4}, Vec{1.0, 2.0}), 0.0);
  EXPECT_EQ(m.intended_curvature(), 0.0);
}

TEST(BuildK0, BerwaldMetric) {
  const auto m = build_k0(HF::euclidean(2), HF::euclidean(2));
  EXPECT_NEAR(m.eval(Vec{0.3, 0.0}, Vec{0.0, 1.0}), oracle::berwald(Vec{0.3, 0.0}, Vec{0.0, 1.0}), 1e-10);
  expect_same_metric(m, oracle::berwald, 100, 1e-10);
}

TEST(BuildK0, OneDimensionalProjectiveFactor) {
  const auto m = build_k0(HF::euclidean(1), HF::euclidean(1));
  // P = |1 + 0.3 P|.
  EXPECT_NEAR(*m.projective_factor_exact(Vec{0.3}, Vec{1.0}), 1.0 / 0.7, 1e-14);
}

TEST(BuildK0, SphericallySymmetric) {
  expect_same_metric(build_k0(HF::euclidean(2), HF::scaled(2, 0.3)),
                     [](const Vec& x, const Vec& y) { return oracle::sph_k0(0.3, x, y); }, 20, 1e-10);
  expect_same_metric(build_k0(HF::euclidean(2), HF::scaled(2, -0.3)),
                     [](const Vec& x, const Vec& y) { return oracle::sph_k0(-0.3, x, y); }, 20, 1e-10);
}

TEST(BuildKneg1, HyperbolicSpace) {
  expect_same_metric(build_kneg1(HF::euclidean(2), HF::zero(2)),
                     [](const Vec& x, const Vec& y) { return oracle::space_form(-1.0, x, y); }, 20, 1e-10);
}

TEST(BuildKneg1, ScaledFunk) {
  expect_same_metric(build_kneg1(HF::euclidean(2), HF::euclidean(2)), oracle::kneg1_euclid_euclid, 20, 1e-10);
}

TEST(BuildKneg1, SphericallySymmetric) {
  expect_same_metric(build_kneg1(HF::euclidean(2), HF::scaled(2, 0.3)),
                     [](const Vec& x, const Vec& y) { return oracle::sph_kneg1(0.3, x, y); }, 20, 1e-9);
}

TEST(BuildKpos1, Sphere) {
  const auto m = build_kpos1(HF::euclidean(2), HF::zero(2));
  expect_same_metric(m, [](const Vec& x, const Vec& y) { return oracle::space_form(1.0, x, y); }, 20, 1e-10);
  EXPECT_NEAR(*m.projective_factor_exact(Vec{0.0, 0.0}, Vec{1.0, 2.0}), 0.0, 1e-15);
}

TEST(BuildKpos1, Bryant) {
  const double a = std::numbers::pi / 6;
  const auto m = build_kpos1(HF::bryant_pair(2, a), HF::zero(2));
  expect_same_metric(m, [a](const Vec& x, const Vec& y) { return oracle::bryant_abcd(a, x, y); }, 20, 1e-8, 0.3);
}

TEST(BuildKpos1, SphericallySymmetric) {
  expect_same_metric(build_kpos1(HF::euclidean(2), HF::scaled(2, 0.3)),
                     [](const Vec& x, const Vec& y) { return oracle::sph_kpos1(0.3, x, y); }, 20, 1e-9);
}

TEST(BuildKpos1, DoubleSquareRoots) {
  const auto m = build_kpos1(HF::dsr_b(1, 1), HF::dsr_a(1, 1));
  const auto e = CatalogEntry::dsr_new(1, 1);
  expect_same_metric(m, [&](const Vec& x, const Vec& y) { return eval_catalog(e, x, y); }, 10, 1e-7);
}

TEST(Builders, OriginRecovery) {
  const std::vector<std::pair<HF, HF>> pairs = {
      {HF::euclidean(2), HF::zero(2)},
      {HF::euclidean(2), HF::euclidean(2)},
      {HF::euclidean(2), HF::scaled(2, -0.4)},
      {HF::randers({0.2, 0.1}), HF::randers({-0.3, 0.2})},
      {HF::dsr_b(1, 1), HF::dsr_a(1, 1)},
  };
  SeededSampler rng(12);
  for (const auto& [psi, phi] : pairs) {
    for (const auto& m : {build_k0(psi, phi), build_kneg1(psi, phi), build_kpos1(psi, phi)}) {
      for (int i = 0; i < 10; ++i) {
        const Vec y = rng.direction(2), x0{0.0, 0.0};
        EXPECT_NEAR(m.eval(x0, y), psi.eval_real(y), 1e-10) << m.name();
        EXPECT_NEAR(projective_factor(m, x0, y), phi.eval_real(y), 1e-10) << m.name();
      }
    }
  }
}

TEST(Builders, ExactProjectiveFactorMatchesDifferences) {
  for (const auto& m : {build_k0(HF::euclidean(2), HF::randers({0.3, -0.2})),
                        build_kneg1(HF::euclidean(2), HF::scaled(2, 0.4)),
                        build_kpos1(HF::dsr_b(1, 1), HF::dsr_a(1, 1))}) {
    for (const auto& p : interior(m, 20, 5)) {
      EXPECT_NEAR(*m.projective_factor_exact(p.x, p.y), projective_factor_numeric(m, p.x, p.y), 1e-6) << m.name();
    }
  }
}

TEST(Builders, ExactJetMatchesDifferences) {
  const auto m = build_kneg1(HF::euclidean(2), HF::scaled(2, 0.4));
  for (const auto& p : interior(m, 10, 6)) {
    const auto j = *m.projective_jet_exact(p.x, p.y);
    for (std::size_t k = 0; k < 2; ++k) {
      const double fx = oracle::central_diff([&](const Vec& v) { return *m.projective_factor_exact(v, p.y); }, p.x, k, 1e-6);
      const double fy = oracle::central_diff([&](const Vec& v) { return *m.projective_factor_exact(p.x, v); }, p.y, k, 1e-6);
      EXPECT_NEAR(j.p_x[k], fx, 1e-7);
      EXPECT_NEAR(j.p_y[k], fy, 1e-7);
    }
  }
}

TEST(Builders, DomainAndValidation) {
  const auto m = build_k0(HF::euclidean(2), HF::euclidean(2));
  EXPECT_NEAR(m.domain_radius(), 0.4, 1e-12);
  EXPECT_THROW(m.eval(Vec{0.5, 0.0}, Vec{1.0, 0.0}), DomainError);
  EXPECT_EQ(m.eval(Vec{0.1, 0.0}, Vec{0.0, 0.0}), 0.0);
  EXPECT_THROW(build_k0(HF::bryant_pair(2, 0.5), HF::zero(2)), std::invalid_argument);
  EXPECT_THROW(build_k0(HF::euclidean(2), HF::euclidean(3)), std::invalid_argument);
  EXPECT_FALSE(build_k0(HF::randers({0.9, 1.2}), HF::zero(2)).origin_norm_is_minkowski());
  EXPECT_TRUE(build_k0(HF::randers({0.3, 0.2}), HF::zero(2)).origin_norm_is_minkowski());
}

TEST(Builders, Names) {
  EXPECT_EQ(build_k0(HF::euclidean(2), HF::euclidean(2)).name(), "construct:0:euclidean:euclidean");
  EXPECT_EQ(build_kneg1(HF::euclidean(2), HF::scaled(2, 0.3)).name(), "construct:-1:euclidean:scaled:0.3");
  EXPECT_EQ(MetricEvaluator::from_catalog(CatalogEntry::funk(2)).name(), "catalog:funk");
  EXPECT_EQ(MetricEvaluator::broken(2).name(), "test:broken");
}

TEST(Builders, BranchValuesSolveTheirEquations) {
  const auto psi = HF::euclidean(2), phi = HF::scaled(2, 0.3);
  const auto m = build_kneg1(psi, phi);
  for (const auto& p : interior(m, 10, 7)) {
    const auto [plus, minus] = m.branch_values(p.x, p.y);
    EXPECT_NEAR(plus, oracle::scaled_root(1.3, p.x, p.y), 1e-12);
    EXPECT_NEAR(minus, oracle::scaled_root(-0.7, p.x, p.y), 1e-12);
  }
}
