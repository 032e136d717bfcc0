#pragma once

// Fixed-point solves Phi = phi(y + x Phi) (real) and
// Psi = phi(y + x Psi) + i psi(y + x Psi) (complex), with exact first
// derivatives of the solutions by implicit differentiation.

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "finsler/errors.hpp"
#include "finsler/norms.hpp"
#include "finsler/sampling.hpp"
#include "finsler/vec.hpp"

namespace finsler {

struct SolverConfig {
  double tolerance = 1e-13;  ///< absolute fixed-point residual
  int max_iterations = 200;
  double bracket_expansion = 2.0;
  double damping = 1.0;  ///< initial Picard damping for the complex solve, in (0, 1]

  void validate() const {
    if (!(tolerance > 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    if (!(bracket_expansion > 1.0)) throw std::invalid_argument("SolverConfig: bracket_expansion must exceed 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("SolverConfig: damping must lie in (0, 1]");
  }
};

template <class Scalar>
struct SolveResult {
  Scalar value{};
  std::vector<Scalar> eta;  ///< y + x * value
  double residual = 0.0;    ///< |value - f(eta)|
  int iterations = 0;
  bool converged = false;
};

using RealSolveResult = SolveResult<double>;
using ComplexSolveResult = SolveResult<Complex>;

/// Sentinel returned by radius_estimate when the gradient vanishes identically.
inline constexpr double unbounded_radius = std::numeric_limits<double>::max();

namespace detail {

/// phi(eta), extended by 0 at eta = 0 (degree-one homogeneity).
inline double eval_or_zero(const HomogeneousFunction& phi, std::span<const double> eta) {
  return is_zero(eta) ? 0.0 : phi.eval_real(eta);
}

/// Rounding floor for a residual of size ~|t|.
inline double rounding_floor(double t) {
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
}

/// Expand from t0 in the downhill direction until f changes sign.
/// f is increasing. Returns (lo, hi, f(lo), f(hi)) with f(lo) < 0 < f(hi).
template <class F>
std::array<double, 4> bracket_increasing(F&& f, double t0, double f0, double scale, const SolverConfig& cfg) {
  const double dir = f0 > 0.0 ? -1.0 : 1.0;
  double step = std::max(std::abs(f0), 1e-3 * scale);
  for (int k = 0; k < 200; ++k) {
    const double t1 = t0 + dir * step;
    const double f1 = f(t1);
    if ((f1 > 0.0) != (f0 > 0.0) || f1 == 0.0) {
      if (dir > 0.0) return {t0, t1, f0, f1};
      return {t1, t0, f1, f0};
    }
    step *= cfg.bracket_expansion;
  }
  throw SolverError("no sign change within bracket expansion budget (point outside validity region?)");
}

/// Illinois-modified regula falsi with bisection fallback on a bracket.
template <class F>
std::pair<double, int> refine_bracket(F&& f, std::array<double, 4> b, double tol, int max_iterations) {
  auto [lo, hi, flo, fhi] = b;
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  int side = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    double t = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(t > lo && t < hi) || it % 8 == 0) t = 0.5 * (lo + hi);
    const double ft = f(t);
    if (std::abs(ft) <= tol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      return {t, it};
    if (ft < 0.0) {
      lo = t;
      flo = ft;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = t;
      fhi = ft;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  throw SolverError("bracketed root refinement exceeded max iterations");
}

inline Complex pair_value(const HomogeneousFunction& phi, const HomogeneousFunction& psi, std::span<const Complex> z) {
  const Complex i{0.0, 1.0};
  const Complex a = phi.family() == Family::zero ? Complex{} : phi.eval_complex(z);
  const Complex b = psi.family() == Family::zero ? Complex{} : psi.eval_complex(z);
  return a + i * b;
}

inline CVec pair_gradient(const HomogeneousFunction& phi, const HomogeneousFunction& psi, std::span<const Complex> z) {
  const Complex i{0.0, 1.0};
  CVec g = phi.grad_complex(z);
  const CVec gb = psi.grad_complex(z);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += i * gb[k];
  return g;
}

/// Replace a bryant pair by its (phi, psi) components; the other slot must be zero.
inline std::pair<HomogeneousFunction, HomogeneousFunction> canonical_pair(const HomogeneousFunction& phi,
                                                                          const HomogeneousFunction& psi) {
  if (psi.family() == Family::bryant_pair || phi.family() == Family::bryant_pair) {
    const HomogeneousFunction& pair = psi.family() == Family::bryant_pair ? psi : phi;
    const HomogeneousFunction& other = psi.family() == Family::bryant_pair ? phi : psi;
    if (other.family() != Family::zero) throw std::invalid_argument("a bryant pair supplies both phi and psi");
    auto [p, f] = split_bryant_pair(pair);
    return {f, p};
  }
  return {phi, psi};
}

}  // namespace detail

/// Root of t - phi(y + x t) by bracketing from t0 = phi(y), then Newton steps
/// safeguarded by the bracket (bisection near the kink eta = 0).
inline RealSolveResult solve_real(const HomogeneousFunction& phi, std::span<const double> x,
                                  std::span<const double> y, const SolverConfig& cfg = {}) {
  cfg.validate();
  require_dimension(phi.dimension(), x.size(), "solve_real(x)");
  require_dimension(phi.dimension(), y.size(), "solve_real(y)");
  RealSolveResult res;
  if (is_zero(y) || phi.family() == Family::zero) {
    res.eta = Vec(y.begin(), y.end());
    res.converged = true;
    return res;
  }
  const double scale = norm(y) + 1.0;
  const auto f = [&](double t) { return t - detail::eval_or_zero(phi, shifted(y, x, t)); };
  const double t0 = phi.eval_real(y);
  const double f0 = f(t0);
  double t = t0;
  double ft = f0;
  int it = 0;
  if (std::abs(f0) > cfg.tolerance) {
    auto [lo, hi, flo, fhi] = detail::bracket_increasing(f, t0, f0, scale, cfg);
    t = std::abs(flo) < std::abs(fhi) ? lo : hi;
    ft = std::abs(flo) < std::abs(fhi) ? flo : fhi;
    bool done = std::abs(ft) <= cfg.tolerance;
    while (!done) {
      if (++it > cfg.max_iterations) throw SolverError("solve_real: max iterations exceeded");
      const Vec eta = shifted(y, x, t);
      double next = 0.5 * (lo + hi);
      const double kink = 1e-9 * (norm(y) + norm(x) * std::abs(t));
      if (norm(eta) > kink) {
        const Vec g = phi.grad_real(eta);
        const double slope = 1.0 - dot(std::span<const double>(g), x);
        if (slope > 0.0) {
          const double newton = t - ft / slope;
          if (newton > lo && newton < hi) next = newton;
        }
      }
      t = next;
      ft = f(t);
      if (ft < 0.0) {
        lo = t;
        flo = ft;
      } else {
        hi = t;
        fhi = ft;
      }
      done = std::abs(ft) <= cfg.tolerance ||
             hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    }
  }
  res.value = t;
  res.eta = shifted(y, x, t);
  res.residual = std::abs(t - detail::eval_or_zero(phi, res.eta));
  res.iterations = it;
  res.converged = res.residual <= std::max(cfg.tolerance, detail::rounding_floor(t));
  if (!res.converged) throw SolverError("solve_real: residual above tolerance at bracket collapse");
  return res;
}

/// Damped Picard iteration Psi <- (1-d) Psi + d h(y + x Psi), h = phi + i psi,
/// seeded at h(y). The damping halves whenever the residual stops decreasing.
inline ComplexSolveResult solve_complex(const HomogeneousFunction& phi_in, const HomogeneousFunction& psi_in,
                                        std::span<const double> x, std::span<const double> y,
                                        const SolverConfig& cfg = {}) {
  cfg.validate();
  const auto [phi, psi] = detail::canonical_pair(phi_in, psi_in);
  require_dimension(phi.dimension(), psi.dimension(), "solve_complex");
  require_dimension(phi.dimension(), x.size(), "solve_complex(x)");
  require_dimension(phi.dimension(), y.size(), "solve_complex(y)");
  ComplexSolveResult res;
  if (is_zero(y)) {
    res.eta = to_complex(y);
    res.converged = true;
    return res;
  }
  const auto h = [&](Complex v) {
    const CVec eta = shifted(y, x, v);
    return detail::pair_value(phi, psi, eta);
  };
  Complex value = detail::pair_value(phi, psi, to_complex(y));
  Complex hv = h(value);
  double residual = std::abs(value - hv);
  double damping = cfg.damping;
  constexpr double damping_floor = 1.0 / 1024.0;
  int stalls = 0;
  int it = 0;
  const double target = std::max(cfg.tolerance, detail::rounding_floor(std::abs(value)));
  while (residual > target) {
    if (++it > cfg.max_iterations) throw SolverError("solve_complex: max iterations exceeded");
    const Complex next = (1.0 - damping) * value + damping * hv;
    const Complex hn = h(next);
    const double next_res = std::abs(next - hn);
    if (!std::isfinite(next_res)) {
      damping *= 0.5;
      if (damping < damping_floor) throw SolverError("solve_complex: iteration diverged below damping floor");
      continue;
    }
    if (next_res >= residual) {
      // Stagnation at the rounding floor counts as convergence.
      if (next_res <= 4.0 * detail::rounding_floor(std::abs(next))) {
        value = next;
        residual = next_res;
        break;
      }
      if (++stalls >= 3) {
        damping *= 0.5;
        stalls = 0;
        if (damping < damping_floor) throw SolverError("solve_complex: iteration diverged below damping floor");
      }
    } else {
      stalls = 0;
    }
    value = next;
    hv = hn;
    residual = next_res;
  }
  if (value.imag() < 0.0) throw SolverError("solve_complex: converged to the conjugate branch (Im Psi < 0)");
  res.value = value;
  res.eta = shifted(y, x, value);
  res.residual = residual;
  res.iterations = it;
  res.converged = residual <= std::max(cfg.tolerance, 4.0 * detail::rounding_floor(std::abs(value)));
  if (!res.converged) throw SolverError("solve_complex: residual above tolerance");
  return res;
}

/// Nested real strategy: for each s, t(s) solves t = Re h(y + x(t + i s));
/// then s solves s = Im h(y + x(t(s) + i s)). Slower than solve_complex; kept
/// as an independent cross-check.
inline ComplexSolveResult solve_complex_nested(const HomogeneousFunction& phi_in, const HomogeneousFunction& psi_in,
                                               std::span<const double> x, std::span<const double> y,
                                               const SolverConfig& cfg = {}) {
  cfg.validate();
  const auto [phi, psi] = detail::canonical_pair(phi_in, psi_in);
  ComplexSolveResult res;
  if (is_zero(y)) {
    res.eta = to_complex(y);
    res.converged = true;
    return res;
  }
  const auto h = [&](double t, double s) {
    const CVec eta = shifted(y, x, Complex(t, s));
    return detail::pair_value(phi, psi, eta);
  };
  const Complex seed = detail::pair_value(phi, psi, to_complex(y));
  const double scale = norm(y) + 1.0;
  const double inner_tol = 0.1 * cfg.tolerance;
  int total = 0;
  const auto t_of_s = [&](double s) {
    const auto f = [&](double t) { return t - h(t, s).real(); };
    const double f0 = f(seed.real());
    if (std::abs(f0) <= inner_tol) return seed.real();
    const auto b = detail::bracket_increasing(f, seed.real(), f0, scale, cfg);
    const auto [t, its] = detail::refine_bracket(f, b, inner_tol, 4 * cfg.max_iterations);
    total += its;
    return t;
  };
  const auto g = [&](double s) { return s - h(t_of_s(s), s).imag(); };
  double s = seed.imag();
  const double g0 = g(s);
  if (std::abs(g0) > cfg.tolerance) {
    const auto b = detail::bracket_increasing(g, s, g0, scale, cfg);
    s = detail::refine_bracket(g, b, cfg.tolerance, 4 * cfg.max_iterations).first;
  }
  const double t = t_of_s(s);
  res.value = Complex(t, s);
  res.eta = shifted(y, x, res.value);
  res.residual = std::abs(res.value - detail::pair_value(phi, psi, res.eta));
  res.iterations = total;
  res.converged = res.residual <= std::max(10.0 * cfg.tolerance, 4.0 * detail::rounding_floor(std::abs(res.value)));
  if (!res.converged) throw SolverError("solve_complex_nested: residual above tolerance");
  return res;
}

struct ImplicitDerivatives {
  Vec p_y;  ///< dPhi/dy^k
  Vec p_x;  ///< dPhi/dx^k
};

struct ComplexImplicitDerivatives {
  CVec psi_y;
  CVec psi_x;
};

/// Phi_y = grad phi(eta) / (1 - <grad phi(eta), x>), and Phi_x from the
/// x-differentiated fixed point, which equals Phi * Phi_y.
inline ImplicitDerivatives implicit_derivatives(const HomogeneousFunction& phi, const RealSolveResult& res,
                                                std::span<const double> x, std::span<const double> y) {
  require_dimension(phi.dimension(), x.size(), "implicit_derivatives(x)");
  require_dimension(phi.dimension(), y.size(), "implicit_derivatives(y)");
  if (!res.converged) throw SolverError("implicit_derivatives: unconverged solve");
  const std::size_t n = x.size();
  ImplicitDerivatives d{Vec(n, 0.0), Vec(n, 0.0)};
  if (phi.family() == Family::zero) return d;
  if (is_zero(res.eta)) throw SolverError("implicit_derivatives: eta = 0 (kink of phi)");
  const Vec g = phi.grad_real(res.eta);
  const double denom = 1.0 - dot(std::span<const double>(g), x);
  if (std::abs(denom) < 1e-8) throw SolverError("implicit_derivatives: denominator vanishes (validity boundary)");
  for (std::size_t k = 0; k < n; ++k) {
    d.p_y[k] = g[k] / denom;
    // d eta^l / d x^k = delta^l_k Phi + x^l Phi_{x^k}
    d.p_x[k] = res.value * g[k] / denom;
  }
  return d;
}

inline ComplexImplicitDerivatives complex_implicit_derivatives(const HomogeneousFunction& phi_in,
                                                               const HomogeneousFunction& psi_in,
                                                               const ComplexSolveResult& res,
                                                               std::span<const double> x) {
  const auto [phi, psi] = detail::canonical_pair(phi_in, psi_in);
  if (!res.converged) throw SolverError("complex_implicit_derivatives: unconverged solve");
  const std::size_t n = x.size();
  if (is_zero(res.eta)) throw SolverError("complex_implicit_derivatives: eta = 0");
  const CVec g = detail::pair_gradient(phi, psi, res.eta);
  Complex gx{};
  for (std::size_t k = 0; k < n; ++k) gx += g[k] * x[k];
  const Complex denom = 1.0 - gx;
  if (std::abs(denom) < 1e-8) throw SolverError("complex_implicit_derivatives: denominator vanishes");
  ComplexImplicitDerivatives d{CVec(n), CVec(n)};
  for (std::size_t k = 0; k < n; ++k) {
    d.psi_y[k] = g[k] / denom;
    d.psi_x[k] = res.value * g[k] / denom;
  }
  return d;
}

namespace detail {

inline std::size_t radius_sample_count(std::size_t n) {
  if (n == 1) return 2;
  if (n == 2) return 720;
  if (n == 3) return 2000;
  return 4096;
}

inline double radius_from_sup(double sup) { return sup > 0.0 ? 1.0 / (2.0 * sup) : unbounded_radius; }

}  // namespace detail

/// r = 1 / (2 S), S = max over sampled unit eta of |grad phi(eta)|. Inside
/// |x| < r the slope of t - phi(y + x t) stays in [1/2, 3/2].
inline double radius_estimate(const HomogeneousFunction& phi) {
  if (phi.family() == Family::zero) return unbounded_radius;
  double sup = 0.0;
  for (const Vec& eta : unit_directions(phi.dimension(), detail::radius_sample_count(phi.dimension())))
    sup = std::max(sup, norm(phi.grad_real(eta)));
  return detail::radius_from_sup(sup);
}

/// Same bound for the complex map h = phi + i psi, using |grad h| on real directions.
inline double radius_estimate_complex(const HomogeneousFunction& phi_in, const HomogeneousFunction& psi_in) {
  const auto [phi, psi] = detail::canonical_pair(phi_in, psi_in);
  double sup = 0.0;
  for (const Vec& eta : unit_directions(phi.dimension(), detail::radius_sample_count(phi.dimension())))
    sup = std::max(sup, norm(detail::pair_gradient(phi, psi, to_complex(eta))));
  return detail::radius_from_sup(sup);
}

}  // namespace finsler
