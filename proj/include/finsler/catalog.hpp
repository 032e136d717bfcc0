#pragma once

// Closed-form projectively flat metrics of constant flag curvature. These
// are the oracles the fixed-point constructions are checked against.

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "finsler/errors.hpp"
#include "finsler/norms.hpp"
#include "finsler/solver.hpp"
#include "finsler/vec.hpp"

namespace finsler {

enum class CatalogName { space_form, funk, berwald, bryant, dsr_new, sph_k0, sph_kneg1, sph_kpos1, zhou };

inline constexpr double domain_margin = 1e-12;

struct CatalogEntry {
  CatalogName name = CatalogName::funk;
  std::size_t dimension = 2;
  double lambda = 0.0;  // space-form
  double alpha = 0.0;   // bryant
  double c = 0.0;       // sph-*
  int branch = -1;      // sph-k0: sign in (c<x,y> +/- z)
  std::size_t n = 1;    // dsr-new blocks
  std::size_t m = 1;
  double d1 = 0.0;  // zhou
  double d2 = 0.0;
  int sign = 1;

  static CatalogEntry space_form(std::size_t dim, double lambda) {
    CatalogEntry e{CatalogName::space_form, dim};
    e.lambda = lambda;
    return e;
  }
  static CatalogEntry funk(std::size_t dim) { return {CatalogName::funk, dim}; }
  static CatalogEntry berwald(std::size_t dim) { return {CatalogName::berwald, dim}; }
  static CatalogEntry bryant(std::size_t dim, double alpha) {
    if (!(alpha > 0.0 && alpha < std::numbers::pi / 2)) throw std::invalid_argument("bryant: need 0 < alpha < pi/2");
    CatalogEntry e{CatalogName::bryant, dim};
    e.alpha = alpha;
    return e;
  }
  static CatalogEntry dsr_new(std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw std::invalid_argument("dsr-new: both blocks must be non-empty");
    CatalogEntry e{CatalogName::dsr_new, n + m};
    e.n = n;
    e.m = m;
    return e;
  }
  /// The K = 0 construction from (|y|, c|y|) is the branch -1 entry for either
  /// sign of c; branch +1 with c equals branch -1 with -c.
  static CatalogEntry sph_k0(std::size_t dim, double c, int branch) {
    if (branch != 1 && branch != -1) throw std::invalid_argument("sph-k0: branch must be +1 or -1");
    CatalogEntry e{CatalogName::sph_k0, dim};
    e.c = c;
    e.branch = branch;
    return e;
  }
  static CatalogEntry sph_kneg1(std::size_t dim, double c) {
    CatalogEntry e{CatalogName::sph_kneg1, dim};
    e.c = c;
    return e;
  }
  static CatalogEntry sph_kpos1(std::size_t dim, double c) {
    CatalogEntry e{CatalogName::sph_kpos1, dim};
    e.c = c;
    return e;
  }
  static CatalogEntry zhou(std::size_t dim, double d1, double d2, int sign) {
    if (!(d1 > 0.0 && d2 > d1)) throw std::invalid_argument("zhou: need d2 > d1 > 0");
    if (!(d2 >= 2.0 * d1 * d1)) throw std::invalid_argument("zhou: need d2 >= 2 d1^2");
    if (sign != 1 && sign != -1) throw std::invalid_argument("zhou: sign must be +1 or -1");
    CatalogEntry e{CatalogName::zhou, dim};
    e.d1 = d1;
    e.d2 = d2;
    e.sign = sign;
    return e;
  }

  std::optional<double> known_curvature() const {
    switch (name) {
      case CatalogName::space_form: return lambda;
      case CatalogName::funk: return -0.25;
      case CatalogName::berwald:
      case CatalogName::sph_k0: return 0.0;
      case CatalogName::bryant:
      case CatalogName::dsr_new:
      case CatalogName::sph_kpos1: return 1.0;
      case CatalogName::sph_kneg1:
      case CatalogName::zhou: return -1.0;
    }
    return std::nullopt;
  }

  /// Radius of the coordinate ball on which the closed form is evaluated.
  double domain_radius() const {
    switch (name) {
      case CatalogName::space_form: return lambda < 0.0 ? 1.0 / std::sqrt(-lambda) : unbounded_radius;
      case CatalogName::funk:
      case CatalogName::berwald: return 1.0;
      case CatalogName::bryant:
      case CatalogName::dsr_new: return unbounded_radius;
      case CatalogName::sph_k0: return c != 0.0 ? 1.0 / std::abs(c) : unbounded_radius;
      case CatalogName::sph_kneg1: return 1.0 / (std::abs(c) + 1.0);
      case CatalogName::sph_kpos1: return 1.0 / std::sqrt(1.0 + c * c);
      case CatalogName::zhou: return std::sqrt(2.0 * (d2 - d1));
    }
    return 0.0;
  }

  bool in_domain(std::span<const double> x) const {
    const double r = domain_radius();
    if (r == unbounded_radius) return true;
    return norm(x) < r - domain_margin;
  }

  std::string label() const {
    switch (name) {
      case CatalogName::space_form: return "space-form";
      case CatalogName::funk: return "funk";
      case CatalogName::berwald: return "berwald";
      case CatalogName::bryant: return "bryant";
      case CatalogName::dsr_new: return "dsr-new";
      case CatalogName::sph_k0: return "sph-k0";
      case CatalogName::sph_kneg1: return "sph-kneg1";
      case CatalogName::sph_kpos1: return "sph-kpos1";
      case CatalogName::zhou: return "zhou";
    }
    return {};
  }

  /// Descriptor in the CLI grammar, e.g. "zhou:0.5,1,+".
  std::string descriptor() const {
    std::ostringstream os;
    os << label();
    switch (name) {
      case CatalogName::space_form: os << ":" << format_double(lambda); break;
      case CatalogName::bryant: os << ":" << format_double(alpha); break;
      case CatalogName::dsr_new: os << ":" << n << "," << m; break;
      case CatalogName::sph_k0: os << ":" << format_double(c) << "," << (branch > 0 ? "+" : "-"); break;
      case CatalogName::sph_kneg1:
      case CatalogName::sph_kpos1: os << ":" << format_double(c); break;
      case CatalogName::zhou:
        os << ":" << format_double(d1) << "," << format_double(d2) << "," << (sign > 0 ? "+" : "-");
        break;
      default: break;
    }
    return os.str();
  }
};

namespace detail {

struct Invariants {
  double xx, yy, xy;
};

inline Invariants invariants(std::span<const double> x, std::span<const double> y) {
  return {dot(x, x), dot(y, y), dot(x, y)};
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// (k^2 <x,y> + sgn(k) sqrt(k^2 (1 - k^2|x|^2)|y|^2 + k^4 <x,y>^2)) / (1 - k^2|x|^2),
/// the root of Phi = k |y + x Phi|.
inline double scaled_norm_root(double k, const Invariants& v) {
  const double k2 = k * k;
  const double den = 1.0 - k2 * v.xx;
  return (k2 * v.xy + sgn(k) * std::sqrt(k2 * den * v.yy + k2 * k2 * v.xy * v.xy)) / den;
}

inline double zhou_two_term(double d1, double d2, int sign, const Invariants& v) {
  const double a = 2.0 * d2 + sign * 2.0 * d1 - v.xx;
  const double b = 2.0 * d2 - sign * 2.0 * d1 - v.xx;
  const double q = v.xy * v.xy;
  return 0.5 * ((std::sqrt(a * v.yy + q) - v.xy) / a + (std::sqrt(b * v.yy + q) + v.xy) / b);
}

}  // namespace detail

/// Second rendering of Bryant's metric through the real quantities A, B, C, D.
inline double bryant_real_form(double alpha, std::span<const double> x, std::span<const double> y) {
  const auto v = detail::invariants(x, y);
  const double c2 = std::cos(2.0 * alpha), s2 = std::sin(2.0 * alpha);
  const double B = v.yy * c2 + v.xx * v.yy - v.xy * v.xy;
  const double A = B * B + (v.yy * s2) * (v.yy * s2);
  const double C = v.xy * s2;
  const double D = v.xx * v.xx + 2.0 * v.xx * c2 + 1.0;
  return std::sqrt((std::sqrt(A) + B) / (2.0 * D) + (C / D) * (C / D)) + C / D;
}

/// F(x, y) as printed for the entry. Throws DomainError outside the entry's domain.
inline double eval_catalog(const CatalogEntry& e, std::span<const double> x, std::span<const double> y) {
  require_dimension(e.dimension, x.size(), "eval_catalog(x)");
  require_dimension(e.dimension, y.size(), "eval_catalog(y)");
  if (!e.in_domain(x)) throw DomainError(e.label() + ": x outside the domain");
  if (is_zero(y)) return 0.0;
  const auto v = detail::invariants(x, y);
  const Complex i{0.0, 1.0};
  switch (e.name) {
    case CatalogName::space_form: {
      const double den = 1.0 + e.lambda * v.xx;
      if (!(den > domain_margin)) throw DomainError("space-form: 1 + lambda|x|^2 <= 0");
      return std::sqrt(v.yy + e.lambda * (v.xx * v.yy - v.xy * v.xy)) / den;
    }
    case CatalogName::funk: {
      const double den = 1.0 - v.xx;
      return (std::sqrt(den * v.yy + v.xy * v.xy) + v.xy) / den;
    }
    case CatalogName::berwald: {
      const double den = 1.0 - v.xx;
      const double r = std::sqrt(den * v.yy + v.xy * v.xy);
      return (r + v.xy) * (r + v.xy) / (den * den * r);
    }
    case CatalogName::bryant: {
      const Complex e2 = std::exp(2.0 * i * e.alpha);
      const Complex den = e2 + v.xx;
      return ((-v.xy + i * detail::principal_sqrt(den * v.yy - v.xy * v.xy)) / den).imag();
    }
    case CatalogName::dsr_new: {
      const std::size_t n = e.n;
      const auto xa = x.subspan(0, n), xb = x.subspan(n);
      const auto ya = y.subspan(0, n), yb = y.subspan(n);
      const Complex D = 1.0 + dot(xa, xa) - i * dot(xb, xb);
      const Complex b = dot(xa, ya) - i * dot(xb, yb);
      const Complex c = dot(ya, ya) - i * dot(yb, yb);
      return ((-b + i * detail::principal_sqrt(c * D - b * b)) / D).imag();
    }
    case CatalogName::sph_k0: {
      const double c2 = e.c * e.c;
      const double z = std::sqrt((1.0 - c2 * v.xx) * v.yy + c2 * v.xy * v.xy);
      const double w = e.c * v.xy + e.branch * z;
      return v.yy * v.yy / (z * w * w);
    }
    case CatalogName::sph_kneg1:
      return 0.5 * (detail::scaled_norm_root(e.c + 1.0, v) - detail::scaled_norm_root(e.c - 1.0, v));
    case CatalogName::sph_kpos1: {
      const Complex k = e.c + i;
      const Complex k2 = k * k;
      const Complex den = 1.0 - k2 * v.xx;
      return ((k2 * v.xy + detail::principal_sqrt(k2 * den * v.yy + k2 * k2 * v.xy * v.xy)) / den).imag();
    }
    case CatalogName::zhou: {
      const double ny = std::sqrt(v.yy);
      const double z2 = v.xy / ny;
      // |x|^2 - z2^2 and A - disc rewritten without cancellation.
      double wedge = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) wedge += std::pow(x[i] * y[j] - x[j] * y[i], 2);
      const double z1sq = wedge / v.yy;
      const double A = 2.0 * e.d2 - z1sq;
      const double disc = std::sqrt(A * A - 4.0 * e.d1 * e.d1);
      const double c1 = std::numbers::sqrt2 / 2.0 * std::sqrt(A + disc);
      const double c2 = e.sign * std::numbers::sqrt2 * e.d1 / std::sqrt(A + disc);
      return ny * c1 / (c1 * c1 - (z2 + c2) * (z2 + c2));
    }
  }
  return 0.0;
}

/// Evaluates the Zhou metric (lhs) and its two-term spherically symmetric
/// K = -1 form (rhs); the two agree identically on the domain.
inline std::pair<double, double> zhou_reduction_check(double d1, double d2, int sign, std::span<const double> x,
                                                      std::span<const double> y) {
  const CatalogEntry e = CatalogEntry::zhou(x.size(), d1, d2, sign);
  const double lhs = eval_catalog(e, x, y);
  return {lhs, detail::zhou_two_term(d1, d2, sign, detail::invariants(x, y))};
}

/// One representative of every entry, with default parameters.
inline std::vector<CatalogEntry> list_catalog(std::size_t dim = 2) {
  return {CatalogEntry::space_form(dim, 1.0),
          CatalogEntry::funk(dim),
          CatalogEntry::berwald(dim),
          CatalogEntry::bryant(dim, std::numbers::pi / 6),
          CatalogEntry::dsr_new(1, 1),
          CatalogEntry::sph_k0(dim, 0.3, -1),
          CatalogEntry::sph_kneg1(dim, 0.3),
          CatalogEntry::sph_kpos1(dim, 0.3),
          CatalogEntry::zhou(dim, 0.5, 1.0, 1)};
}

}  // namespace finsler
