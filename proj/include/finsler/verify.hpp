#pragma once

// Numerical differential geometry on any MetricEvaluator: finite-difference
// jets, residuals of the projective-flatness and constant-curvature
// identities, strong convexity, geodesic coefficients and geodesics.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "finsler/construct.hpp"
#include "finsler/numdiff.hpp"
#include "finsler/parallel.hpp"
#include "finsler/report.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

using numdiff::Stencil;

struct JetData {
  double F = 0.0;
  Vec F_x, F_y;
  Eigen::MatrixXd F_xy;  ///< (l, k) = d^2 F / dx^l dy^k
  Eigen::MatrixXd F_yy;
  double h_first_x = 0.0, h_first_y = 0.0, h_second_x = 0.0, h_second_y = 0.0;
};

namespace detail {

struct Steps {
  double first_x, first_y, second_x, second_y;
};

inline Steps steps_for(std::span<const double> x, std::span<const double> y, Stencil s) {
  const double sx = std::max(1.0, norm(x));
  const double sy = norm(y);
  return {numdiff::first_step(s) * sx, numdiff::first_step(s) * sy, numdiff::second_step(s) * sx,
          numdiff::second_step(s) * sy};
}

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace detail

/// Finite-difference jet of F at (x, y). First derivatives use steps
/// eps^(1/5) (fourth-order stencil) or eps^(1/3) (second order); second
/// derivatives use eps^(1/6) or eps^(1/4). x-steps scale with max(1, |x|),
/// y-steps with |y|.
inline JetData jet(const MetricEvaluator& m, std::span<const double> x, std::span<const double> y,
                   Stencil s = Stencil::central4) {
  const std::size_t n = m.dimension();
  require_dimension(n, x.size(), "jet(x)");
  require_dimension(n, y.size(), "jet(y)");
  if (is_zero(y)) throw DomainError("jet: y = 0");
  const auto st = detail::steps_for(x, y, s);
  JetData j;
  j.h_first_x = st.first_x;
  j.h_first_y = st.first_y;
  j.h_second_x = st.second_x;
  j.h_second_y = st.second_y;
  j.F = m.eval(x, y);
  j.F_x = numdiff::gradient([&](const Vec& xv) { return m.eval(xv, y); }, x, st.first_x, s);
  j.F_y = numdiff::gradient([&](const Vec& yv) { return m.eval(x, yv); }, y, st.first_y, s);
  j.F_xy.resize(n, n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      j.F_xy(l, k) = numdiff::derivative(
          [&](double a) {
            const Vec xa = numdiff::bump(x, l, a);
            return numdiff::derivative([&](double b) { return m.eval(xa, numdiff::bump(y, k, b)); },
                                       st.second_y, s);
          },
          st.second_x, s);
  j.F_yy = numdiff::hessian([&](const Vec& yv) { return m.eval(x, yv); }, y, st.second_y, s);
  return j;
}

/// max_k |F_{x^k} - F_{x^l y^k} y^l| / (1 + |F_x|).
inline double hamel_residual(const MetricEvaluator& m, std::span<const double> x, std::span<const double> y) {
  const JetData j = jet(m, x, y);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.dimension(); ++k) {
    double contracted = 0.0;
    for (std::size_t l = 0; l < m.dimension(); ++l) contracted += j.F_xy(l, k) * y[l];
    worst = std::max(worst, std::abs(j.F_x[k] - contracted));
  }
  return worst / (1.0 + norm(j.F_x));
}

/// P = F_{x^k} y^k / (2F), the x-derivative taken along y.
inline double projective_factor_numeric(const MetricEvaluator& m, std::span<const double> x,
                                        std::span<const double> y) {
  if (is_zero(y)) return 0.0;
  const auto st = detail::steps_for(x, y, Stencil::central4);
  const double F = m.eval(x, y);
  if (!(F > 0.0)) throw DomainError("projective_factor_numeric: F <= 0");
  const double dFy =
      numdiff::directional([&](const Vec& xv) { return m.eval(xv, y); }, x, y, st.first_x / norm(y));
  return dFy / (2.0 * F);
}

/// Exact projective factor where the metric provides one, numeric otherwise.
inline double projective_factor(const MetricEvaluator& m, std::span<const double> x, std::span<const double> y) {
  if (auto p = m.projective_factor_exact(x, y)) return *p;
  return projective_factor_numeric(m, x, y);
}

enum class DerivativeRoute {
  automatic,  ///< exact P and P_x when the metric is constructed
  numeric,    ///< P from F_x, P_x by differencing P
};

/// K = (P^2 - P_{x^m} y^m) / F^2.
inline double flag_curvature(const MetricEvaluator& m, std::span<const double> x, std::span<const double> y,
                             DerivativeRoute route = DerivativeRoute::automatic) {
  const double F = m.eval(x, y);
  if (!(F > 0.0)) throw DomainError("flag_curvature: F <= 0");
  if (route == DerivativeRoute::automatic) {
    if (auto pj = m.projective_jet_exact(x, y)) {
      const double dP = dot(std::span<const double>(pj->p_x), y);
      return (pj->p * pj->p - dP) / (F * F);
    }
  }
  const auto st = detail::steps_for(x, y, Stencil::central4);
  const auto P = [&](const Vec& xv) { return projective_factor_numeric(m, xv, y); };
  const double p = P(Vec(x.begin(), x.end()));
  const double dP = numdiff::directional(P, x, y, st.second_x / norm(y));
  return (p * p - dP) / (F * F);
}

struct BerwaldResidual {
  double r1 = 0.0;  ///< max_k |F_{x^k} - (P F)_{y^k}|
  double r2 = 0.0;  ///< max_k |P_{x^k} - P P_{y^k} + (K F^3)_{y^k} / (3F)|
};

/// Residuals of F_{x^k} = (PF)_{y^k} and P_{x^k} = P P_{y^k} - (K F^3)_{y^k}/(3F)
/// for constant K (intended curvature by default, else the numeric value at the point).
inline BerwaldResidual berwald_system_residual(const MetricEvaluator& m, std::span<const double> x,
                                               std::span<const double> y, std::optional<double> curvature = {}) {
  double K = 0.0;
  if (curvature)
    K = *curvature;
  else if (auto known = m.intended_curvature())
    K = *known;
  else
    K = flag_curvature(m, x, y);
  const auto st = detail::steps_for(x, y, Stencil::central4);
  const double F = m.eval(x, y);
  const double P = projective_factor(m, x, y);
  const auto PF = [&](const Vec& yv) { return projective_factor(m, x, yv) * m.eval(x, yv); };
  const Vec F_x = numdiff::gradient([&](const Vec& xv) { return m.eval(xv, y); }, x, st.first_x);
  const Vec F_y = numdiff::gradient([&](const Vec& yv) { return m.eval(x, yv); }, y, st.first_y);
  const Vec PF_y = numdiff::gradient(PF, y, st.first_y);
  const Vec P_x = numdiff::gradient([&](const Vec& xv) { return projective_factor(m, xv, y); }, x, st.first_x);
  const Vec P_y = numdiff::gradient([&](const Vec& yv) { return projective_factor(m, x, yv); }, y, st.first_y);
  BerwaldResidual r;
  for (std::size_t k = 0; k < m.dimension(); ++k) {
    r.r1 = std::max(r.r1, std::abs(F_x[k] - PF_y[k]));
    // (K F^3)_{y^k} / (3F) = K F F_{y^k} for constant K.
    r.r2 = std::max(r.r2, std::abs(P_x[k] - P * P_y[k] + K * F * F_y[k]));
  }
  return r;
}

/// Exact-derivative residual max_k |P_{x^k} - P P_{y^k}| of a K = 0 construction.
inline double master_pde_residual_exact(const MetricEvaluator& m, std::span<const double> x,
                                        std::span<const double> y) {
  if (m.kind() != MetricEvaluator::Kind::constructed_k0)
    throw std::invalid_argument("master_pde_residual_exact: needs a K = 0 construction");
  const ProjectiveJet pj = *m.projective_jet_exact(x, y);
  double worst = 0.0;
  for (std::size_t k = 0; k < m.dimension(); ++k) worst = std::max(worst, std::abs(pj.p_x[k] - pj.p * pj.p_y[k]));
  return worst;
}

/// Finite-difference residual of Phi_x = Phi Phi_y for the fields built from
/// P and F at constant curvature K: Phi = P (K = 0), Phi_pm = P +/- sqrt(-K) F
/// (K < 0), Psi = P + i sqrt(K) F (K > 0). Returns the max over components
/// and fields.
inline double master_pde_residual_numeric(const MetricEvaluator& m, std::span<const double> x,
                                          std::span<const double> y, std::optional<double> curvature = {}) {
  const double K = curvature ? *curvature : m.intended_curvature().value_or(0.0);
  const auto st = detail::steps_for(x, y, Stencil::central4);
  const double F = m.eval(x, y);
  const double P = projective_factor(m, x, y);
  const Vec F_x = numdiff::gradient([&](const Vec& xv) { return m.eval(xv, y); }, x, st.first_x);
  const Vec F_y = numdiff::gradient([&](const Vec& yv) { return m.eval(x, yv); }, y, st.first_y);
  const Vec P_x = numdiff::gradient([&](const Vec& xv) { return projective_factor(m, xv, y); }, x, st.first_x);
  const Vec P_y = numdiff::gradient([&](const Vec& yv) { return projective_factor(m, x, yv); }, y, st.first_y);
  double worst = 0.0;
  const std::size_t n = m.dimension();
  if (K > 0.0) {
    const double s = std::sqrt(K);
    const Complex psi(P, s * F);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex lhs(P_x[k], s * F_x[k]);
      const Complex rhs = psi * Complex(P_y[k], s * F_y[k]);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
  }
  const double s = std::sqrt(-K);
  for (double sign : {1.0, -1.0}) {
    const double phi = P + sign * s * F;
    for (std::size_t k = 0; k < n; ++k) {
      const double lhs = P_x[k] + sign * s * F_x[k];
      const double rhs = phi * (P_y[k] + sign * s * F_y[k]);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    if (K == 0.0) break;
  }
  return worst;
}

/// Fundamental tensor g_ij = [F^2/2]_{y^i y^j} by finite differences.
inline Eigen::MatrixXd fundamental_tensor(const MetricEvaluator& m, std::span<const double> x,
                                          std::span<const double> y) {
  const auto st = detail::steps_for(x, y, Stencil::central4);
  return numdiff::hessian(
      [&](const Vec& yv) {
        const double f = m.eval(x, yv);
        return 0.5 * f * f;
      },
      y, st.second_y);
}

/// Positive definiteness of g at x over deterministic unit directions y.
/// Same residual convention as check_minkowski.
inline VerificationReport convexity_check(const MetricEvaluator& m, std::span<const double> x, std::size_t samples) {
  if (samples == 0) throw std::invalid_argument("convexity_check: samples must be >= 1");
  constexpr double floor = 1e-8;
  ReportBuilder report("convexity", 0.0);
  double min_eig = std::numeric_limits<double>::infinity();
  for (const Vec& y : unit_directions(m.dimension(), samples)) {
    const Eigen::MatrixXd g = fundamental_tensor(m, x, y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
    const double lambda = eig.eigenvalues().minCoeff();
    const double F = m.eval(x, y);
    min_eig = std::min(min_eig, lambda);
    double residual = std::max(0.0, floor - std::min(lambda, F));
    if (Eigen::LLT<Eigen::MatrixXd>(g).info() != Eigen::Success) residual = std::max(residual, floor);
    report.add(x, y, residual);
  }
  report.stat("min_eigenvalue", min_eig);
  return report.finish();
}

/// G^i = (1/4) g^{il} { [F^2]_{x^m y^l} y^m - [F^2]_{x^l} } from finite differences.
inline Vec geodesic_coefficients_general(const MetricEvaluator& m, std::span<const double> x,
                                         std::span<const double> y) {
  const std::size_t n = m.dimension();
  const auto st = detail::steps_for(x, y, Stencil::central4);
  const auto E = [&](const Vec& xv, const Vec& yv) {
    const double f = m.eval(xv, yv);
    return f * f;
  };
  const Vec yv(y.begin(), y.end());
  const Vec xv(x.begin(), x.end());
  const Eigen::MatrixXd g = fundamental_tensor(m, x, y);
  const Vec E_x = numdiff::gradient([&](const Vec& xa) { return E(xa, yv); }, x, st.first_x);
  Eigen::VectorXd b(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double mixed = numdiff::directional(
        [&](const Vec& xa) {
          return numdiff::derivative([&](double t) { return E(xa, numdiff::bump(y, l, t)); }, st.second_y);
        },
        x, y, st.second_x / norm(y));
    b(l) = mixed - E_x[l];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMetricError("geodesic coefficients: g is not positive definite");
  const Eigen::VectorXd G = 0.25 * llt.solve(b);
  return Vec(G.data(), G.data() + n);
}

enum class GeodesicMode {
  projective,  ///< acceleration -2 P(x, v) v
  general,     ///< acceleration -2 G(x, v) from the general formula
};

struct Trajectory {
  Vec times;
  std::vector<Vec> points;
  std::vector<Vec> velocities;
  bool complete = true;  ///< false when integration stopped at the domain boundary
  double collinearity = 0.0;
  double richardson_error = std::numeric_limits<double>::quiet_NaN();
};

/// Max distance of the points from the line x0 + s v0, divided by arc length.
inline double collinearity_score(const std::vector<Vec>& points, std::span<const double> x0,
                                 std::span<const double> v0) {
  const double vn = norm(v0);
  double arc = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) {
      double seg = 0.0;
      for (std::size_t k = 0; k < x0.size(); ++k) seg += std::pow(points[i][k] - points[i - 1][k], 2);
      arc += std::sqrt(seg);
    }
    double along = 0.0;
    for (std::size_t k = 0; k < x0.size(); ++k) along += (points[i][k] - x0[k]) * v0[k] / vn;
    double dist = 0.0;
    for (std::size_t k = 0; k < x0.size(); ++k) dist += std::pow(points[i][k] - x0[k] - along * v0[k] / vn, 2);
    worst = std::max(worst, std::sqrt(dist));
  }
  return arc > 0.0 ? worst / arc : 0.0;
}

namespace detail {

inline Trajectory rk4_geodesic(const MetricEvaluator& m, std::span<const double> x0, std::span<const double> v0,
                               double t_end, std::size_t steps, GeodesicMode mode) {
  const std::size_t n = m.dimension();
  const auto accel = [&](const Vec& x, const Vec& v) {
    Vec a(n);
    if (mode == GeodesicMode::projective) {
      const double p = projective_factor(m, x, v);
      for (std::size_t k = 0; k < n; ++k) a[k] = -2.0 * p * v[k];
    } else {
      const Vec G = geodesic_coefficients_general(m, x, v);
      for (std::size_t k = 0; k < n; ++k) a[k] = -2.0 * G[k];
    }
    return a;
  };
  const auto axpy = [n](const Vec& a, double s, const Vec& b) {
    Vec r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = a[k] + s * b[k];
    return r;
  };
  Trajectory traj;
  Vec x(x0.begin(), x0.end()), v(v0.begin(), v0.end());
  const double h = t_end / static_cast<double>(steps);
  traj.times.push_back(0.0);
  traj.points.push_back(x);
  traj.velocities.push_back(v);
  for (std::size_t i = 0; i < steps; ++i) {
    try {
      const Vec a1 = accel(x, v);
      const Vec x2 = axpy(x, 0.5 * h, v), v2 = axpy(v, 0.5 * h, a1);
      const Vec a2 = accel(x2, v2);
      const Vec x3 = axpy(x, 0.5 * h, v2), v3 = axpy(v, 0.5 * h, a2);
      const Vec a3 = accel(x3, v3);
      const Vec x4 = axpy(x, h, v3), v4 = axpy(v, h, a3);
      const Vec a4 = accel(x4, v4);
      Vec xn(n), vn(n);
      for (std::size_t k = 0; k < n; ++k) {
        xn[k] = x[k] + h / 6.0 * (v[k] + 2.0 * v2[k] + 2.0 * v3[k] + v4[k]);
        vn[k] = v[k] + h / 6.0 * (a1[k] + 2.0 * a2[k] + 2.0 * a3[k] + a4[k]);
      }
      if (!m.in_domain(xn)) throw DomainError("geodesic left the domain");
      x = std::move(xn);
      v = std::move(vn);
    } catch (const DomainError&) {
      traj.complete = false;
      break;
    }
    traj.times.push_back(h * static_cast<double>(i + 1));
    traj.points.push_back(x);
    traj.velocities.push_back(v);
  }
  traj.collinearity = collinearity_score(traj.points, x0, v0);
  return traj;
}

}  // namespace detail

/// Classic RK4 on x' = v, v' = -2 G(x, v). With `richardson`, the run is
/// repeated at half the step and the endpoint difference is recorded.
inline Trajectory integrate_geodesic(const MetricEvaluator& m, std::span<const double> x0, std::span<const double> v0,
                                     double t_end, std::size_t steps, GeodesicMode mode = GeodesicMode::projective,
                                     bool richardson = false) {
  require_dimension(m.dimension(), x0.size(), "integrate_geodesic(x0)");
  require_dimension(m.dimension(), v0.size(), "integrate_geodesic(v0)");
  if (is_zero(v0)) throw std::invalid_argument("integrate_geodesic: v0 = 0");
  if (steps == 0 || !(t_end > 0.0)) throw std::invalid_argument("integrate_geodesic: need steps >= 1, t_end > 0");
  if (!m.in_domain(x0)) throw DomainError("integrate_geodesic: x0 outside the domain");
  Trajectory traj = detail::rk4_geodesic(m, x0, v0, t_end, steps, mode);
  if (richardson && traj.complete) {
    const Trajectory fine = detail::rk4_geodesic(m, x0, v0, t_end, 2 * steps, mode);
    if (fine.complete) {
      double d = 0.0;
      for (std::size_t k = 0; k < x0.size(); ++k) d += std::pow(fine.points.back()[k] - traj.points.back()[k], 2);
      traj.richardson_error = std::sqrt(d);
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Seeded sweeps

struct SamplePoint {
  Vec x;
  Vec y;
};

/// x uniform in the ball of radius `radius`, y a random direction with |y| in [0.5, 1.5).
inline std::vector<SamplePoint> sample_points(std::size_t dim, double radius, std::size_t count,
                                              std::uint64_t seed) {
  SeededSampler rng(seed);
  std::vector<SamplePoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec x = rng.in_ball(dim, radius);
    Vec y = rng.direction(dim);
    const double s = rng.uniform(0.5, 1.5);
    for (double& c : y) c *= s;
    pts.push_back({std::move(x), std::move(y)});
  }
  return pts;
}

enum class CheckKind { hamel, curvature, berwald, convexity, geodesic, pde };

inline const char* check_name(CheckKind c) {
  switch (c) {
    case CheckKind::hamel: return "hamel";
    case CheckKind::curvature: return "curvature";
    case CheckKind::berwald: return "berwald";
    case CheckKind::convexity: return "convexity";
    case CheckKind::geodesic: return "geodesic";
    case CheckKind::pde: return "pde";
  }
  return "";
}

inline double default_tolerance(CheckKind c) {
  switch (c) {
    case CheckKind::hamel: return 1e-6;
    case CheckKind::curvature: return 1e-4;
    case CheckKind::berwald: return 1e-5;
    case CheckKind::convexity: return 0.0;
    case CheckKind::geodesic: return 1e-8;
    case CheckKind::pde: return 1e-6;
  }
  return 0.0;
}

/// Runs one check over the given points. For `curvature` the residual is
/// |K - expected| with expected the metric's intended curvature, or the
/// sample mean when none is known (a constancy check).
inline VerificationReport run_check(const MetricEvaluator& m, CheckKind check, const std::vector<SamplePoint>& pts,
                                    double tolerance) {
  std::vector<double> primary(pts.size(), 0.0);
  std::vector<double> secondary(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    const Vec& x = pts[i].x;
    const Vec& y = pts[i].y;
    switch (check) {
      case CheckKind::hamel: primary[i] = hamel_residual(m, x, y); break;
      case CheckKind::curvature: primary[i] = flag_curvature(m, x, y); break;
      case CheckKind::berwald: {
        const auto r = berwald_system_residual(m, x, y);
        primary[i] = std::max(r.r1, r.r2);
        break;
      }
      case CheckKind::convexity: {
        const VerificationReport r = convexity_check(m, x, 16);
        primary[i] = r.max_residual;
        secondary[i] = r.stats.at("min_eigenvalue");
        break;
      }
      case CheckKind::geodesic: {
        const Trajectory t = integrate_geodesic(m, x, y, 0.1, 20, GeodesicMode::general);
        primary[i] = t.collinearity;
        break;
      }
      case CheckKind::pde: primary[i] = master_pde_residual_numeric(m, x, y); break;
    }
  });
  ReportBuilder report(check_name(check), tolerance);
  if (check == CheckKind::curvature) {
    const double mean = pts.empty() ? 0.0 : std::accumulate(primary.begin(), primary.end(), 0.0) / pts.size();
    const double expected = m.intended_curvature().value_or(mean);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      report.add(pts[i].x, pts[i].y, std::abs(primary[i] - expected));
      lo = std::min(lo, primary[i]);
      hi = std::max(hi, primary[i]);
    }
    report.stat("expected_K", expected);
    report.stat("mean_K", mean);
    report.stat("min_K", lo);
    report.stat("max_K", hi);
    return report.finish();
  }
  for (std::size_t i = 0; i < pts.size(); ++i) report.add(pts[i].x, pts[i].y, primary[i]);
  if (check == CheckKind::convexity && !pts.empty())
    report.stat("min_eigenvalue", *std::min_element(secondary.begin(), secondary.end()));
  return report.finish();
}

}  // namespace finsler
