#pragma once

// Central finite differences on scalar functions of a vector argument.

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "finsler/vec.hpp"

namespace finsler::numdiff {

enum class Stencil { central2, central4 };

/// Step for a first derivative, balancing truncation against rounding.
inline double first_step(Stencil s) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return s == Stencil::central2 ? std::cbrt(eps) : std::pow(eps, 0.2);
}

/// Step for a second (pure or mixed) derivative.
inline double second_step(Stencil s) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return s == Stencil::central2 ? std::pow(eps, 0.25) : std::pow(eps, 1.0 / 6.0);
}

/// g'(0) for a scalar function of one variable.
template <class G>
double derivative(G&& g, double h, Stencil s = Stencil::central4) {
  if (s == Stencil::central2) return (g(h) - g(-h)) / (2.0 * h);
  return (g(-2.0 * h) - 8.0 * g(-h) + 8.0 * g(h) - g(2.0 * h)) / (12.0 * h);
}

/// g''(0) for a scalar function of one variable.
template <class G>
double second_derivative(G&& g, double h, Stencil s = Stencil::central4) {
  const double g0 = g(0.0);
  if (s == Stencil::central2) return (g(h) - 2.0 * g0 + g(-h)) / (h * h);
  return (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g0 + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h);
}

/// Point p + t * e_k.
inline Vec bump(std::span<const double> p, std::size_t k, double t) {
  Vec q(p.begin(), p.end());
  q[k] += t;
  return q;
}

/// Point p + t * d.
inline Vec along(std::span<const double> p, std::span<const double> d, double t) {
  Vec q(p.begin(), p.end());
  for (std::size_t k = 0; k < q.size(); ++k) q[k] += t * d[k];
  return q;
}

template <class F>
Vec gradient(F&& f, std::span<const double> p, double h, Stencil s = Stencil::central4) {
  Vec g(p.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    g[k] = derivative([&](double t) { return f(bump(p, k, t)); }, h, s);
  return g;
}

/// Directional derivative of f at p along d (d is not normalized).
template <class F>
double directional(F&& f, std::span<const double> p, std::span<const double> d, double h,
                   Stencil s = Stencil::central4) {
  return derivative([&](double t) { return f(along(p, d, t)); }, h, s);
}

template <class F>
Eigen::MatrixXd hessian(F&& f, std::span<const double> p, double h, Stencil s = Stencil::central4) {
  const std::size_t n = p.size();
  Eigen::MatrixXd H(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    H(i, i) = second_derivative([&](double t) { return f(bump(p, i, t)); }, h, s);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = derivative(
          [&](double a) {
            const Vec pa = bump(p, i, a);
            return derivative([&](double b) { return f(bump(pa, j, b)); }, h, s);
          },
          h, s);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

}  // namespace finsler::numdiff
