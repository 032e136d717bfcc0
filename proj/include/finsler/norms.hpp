#pragma once

// Origin data: the closed set of degree-one homogeneous functions used as
// F(0, .) and P(0, .), with exact gradients and analytic complex extensions.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>

#include "finsler/errors.hpp"
#include "finsler/numdiff.hpp"
#include "finsler/report.hpp"
#include "finsler/sampling.hpp"
#include "finsler/vec.hpp"

namespace finsler {

enum class Family { zero, euclidean, scaled, randers, dsr_a, dsr_b, bryant_pair, sum };

namespace detail {

template <class T>
inline constexpr bool is_complex_v = !std::is_floating_point_v<T>;

/// Principal square root. Arguments within 1e-14 (relative) of the negative
/// real axis raise BranchCutError, except an exactly-zero positive imaginary
/// part, which takes the upper-side value i*sqrt(|w|) as std::sqrt does.
inline Complex principal_sqrt(Complex w) {
  if (w.real() < 0.0 && std::abs(w.imag()) <= 1e-14 * -w.real() &&
      !(w.imag() == 0.0 && !std::signbit(w.imag())))
    throw BranchCutError("complex square root evaluated on its branch cut");
  return std::sqrt(w);
}

template <class T>
T root(T w) {
  if constexpr (is_complex_v<T>)
    return principal_sqrt(w);
  else
    return std::sqrt(w);
}

/// Bilinear (non-Hermitian) sum of squares over [begin, end).
template <class T>
T square_sum(std::span<const T> z, std::size_t begin, std::size_t end) {
  T s{};
  for (std::size_t k = begin; k < end; ++k) s += z[k] * z[k];
  return s;
}

}  // namespace detail

/// A positively homogeneous function of degree one on R^n.
///
/// Families: `zero`; `euclidean` |y|; `scaled` c|y|; `randers` |y| + <a, y>;
/// `dsr_a` / `dsr_b` the double square root pair
///   (sqrt2/2) sqrt(sqrt(|y|^4 + |yt|^4) -/+ |y|^2)
/// on the split R^n x R^m; `bryant_pair` packages phi + i psi = i e^{-i alpha}|y|
/// (its real evaluation is the psi part cos(alpha)|y|); `sum` is a formal
/// linear combination used for phi +/- psi.
class HomogeneousFunction {
 public:
  static HomogeneousFunction zero(std::size_t dim) { return {Family::zero, dim}; }
  static HomogeneousFunction euclidean(std::size_t dim) { return {Family::euclidean, dim}; }

  static HomogeneousFunction scaled(std::size_t dim, double c) {
    HomogeneousFunction f{Family::scaled, dim};
    f.c_ = c;
    return f;
  }

  static HomogeneousFunction randers(Vec a) {
    HomogeneousFunction f{Family::randers, a.size()};
    f.a_ = std::move(a);
    return f;
  }

  static HomogeneousFunction dsr_a(std::size_t n, std::size_t m) { return dsr(Family::dsr_a, n, m); }
  static HomogeneousFunction dsr_b(std::size_t n, std::size_t m) { return dsr(Family::dsr_b, n, m); }

  static HomogeneousFunction bryant_pair(std::size_t dim, double alpha) {
    if (!(alpha > 0.0 && alpha < std::numbers::pi / 2))
      throw std::invalid_argument("bryant pair requires 0 < alpha < pi/2");
    HomogeneousFunction f{Family::bryant_pair, dim};
    f.alpha_ = alpha;
    return f;
  }

  /// ca * a + cb * b.
  static HomogeneousFunction sum(const HomogeneousFunction& a, double ca, const HomogeneousFunction& b,
                                 double cb) {
    require_dimension(a.dimension(), b.dimension(), "HomogeneousFunction::sum");
    if (a.family() == Family::bryant_pair || b.family() == Family::bryant_pair)
      throw std::invalid_argument("bryant pair cannot enter a formal sum");
    HomogeneousFunction f{Family::sum, a.dimension()};
    f.terms_.push_back({ca, std::make_shared<const HomogeneousFunction>(a)});
    f.terms_.push_back({cb, std::make_shared<const HomogeneousFunction>(b)});
    return f;
  }

  Family family() const { return family_; }
  std::size_t dimension() const { return dim_; }
  double scale() const { return c_; }
  double alpha() const { return alpha_; }
  const Vec& drift() const { return a_; }
  /// Size of the first coordinate block of the dsr families.
  std::size_t split() const { return split_; }

  /// f(y). Throws DomainError at y = 0 for every family except `zero`.
  double eval_real(std::span<const double> y) const {
    require_dimension(dim_, y.size(), "eval_real");
    if (family_ != Family::zero && is_zero(y))
      throw DomainError("origin function evaluated at y = 0");
    return value<double>(y);
  }

  /// Analytic continuation to C^n using principal square roots.
  Complex eval_complex(std::span<const Complex> z) const {
    require_dimension(dim_, z.size(), "eval_complex");
    if (family_ != Family::zero && is_zero(z))
      throw DomainError("origin function evaluated at z = 0");
    return value<Complex>(z);
  }

  /// Exact gradient; satisfies <y, grad f(y)> = f(y).
  Vec grad_real(std::span<const double> y) const {
    require_dimension(dim_, y.size(), "grad_real");
    if (is_zero(y)) throw DomainError("gradient requested at y = 0");
    return gradient<double>(y);
  }

  /// Complex gradient of the analytic continuation.
  CVec grad_complex(std::span<const Complex> z) const {
    require_dimension(dim_, z.size(), "grad_complex");
    if (is_zero(z)) throw DomainError("gradient requested at z = 0");
    return gradient<Complex>(z);
  }

  /// Descriptor in the CLI mini-language (formal sums print as a(...)+b(...)).
  std::string describe() const {
    std::ostringstream os;
    switch (family_) {
      case Family::zero: os << "zero"; break;
      case Family::euclidean: os << "euclidean"; break;
      case Family::scaled: os << "scaled:" << format_double(c_); break;
      case Family::randers:
        os << "randers:";
        for (std::size_t k = 0; k < a_.size(); ++k) os << (k ? "," : "") << format_double(a_[k]);
        break;
      case Family::dsr_a: os << "dsr-a:" << split_ << "," << dim_ - split_; break;
      case Family::dsr_b: os << "dsr-b:" << split_ << "," << dim_ - split_; break;
      case Family::bryant_pair: os << "bryant:" << format_double(alpha_); break;
      case Family::sum:
        os << format_double(terms_[0].coefficient) << "*(" << terms_[0].function->describe() << ")+"
           << format_double(terms_[1].coefficient) << "*(" << terms_[1].function->describe() << ")";
        break;
    }
    return os.str();
  }

 private:
  struct Term {
    double coefficient;
    std::shared_ptr<const HomogeneousFunction> function;
  };

  HomogeneousFunction(Family family, std::size_t dim) : family_(family), dim_(dim) {
    if (dim == 0) throw std::invalid_argument("HomogeneousFunction: dimension must be positive");
  }

  static HomogeneousFunction dsr(Family family, std::size_t n, std::size_t m) {
    if (n == 0 || m == 0) throw std::invalid_argument("dsr families need both blocks of size >= 1");
    HomogeneousFunction f{family, n + m};
    f.split_ = n;
    return f;
  }

  // The dsr pair is evaluated through s = sqrt(Q1 + i Q2), r = sqrt(Q1 - i Q2)
  // with Q1 = |y|^2, Q2 = |yt|^2: psi = (r + s)/2, phi = i (r - s)/2. On real
  // arguments this is psi = Re s, phi = Im s, the printed double square roots,
  // without the cancellation in sqrt(|y|^4 + |yt|^4) - |y|^2.
  template <class T>
  std::pair<Complex, Complex> dsr_roots(std::span<const T> z) const {
    const Complex q1 = Complex(detail::square_sum(z, 0, split_));
    const Complex q2 = Complex(detail::square_sum(z, split_, dim_));
    const Complex i{0.0, 1.0};
    return {detail::principal_sqrt(q1 - i * q2), detail::principal_sqrt(q1 + i * q2)};
  }

  template <class T>
  static T from_complex(Complex v) {
    if constexpr (detail::is_complex_v<T>)
      return v;
    else
      return v.real();
  }

  template <class T>
  T value(std::span<const T> z) const {
    switch (family_) {
      case Family::zero: return T{};
      case Family::euclidean: return detail::root(detail::square_sum(z, 0, dim_));
      case Family::scaled: return T(c_) * detail::root(detail::square_sum(z, 0, dim_));
      case Family::randers: {
        T s = detail::root(detail::square_sum(z, 0, dim_));
        for (std::size_t k = 0; k < dim_; ++k) s += T(a_[k]) * z[k];
        return s;
      }
      case Family::dsr_a:
      case Family::dsr_b: {
        const auto [r, s] = dsr_roots(z);
        const Complex i{0.0, 1.0};
        return from_complex<T>(family_ == Family::dsr_b ? 0.5 * (r + s) : 0.5 * i * (r - s));
      }
      case Family::bryant_pair: {
        const T len = detail::root(detail::square_sum(z, 0, dim_));
        if constexpr (detail::is_complex_v<T>)
          return Complex(std::sin(alpha_), std::cos(alpha_)) * len;
        else
          return std::cos(alpha_) * len;
      }
      case Family::sum: {
        T s{};
        for (const Term& t : terms_) s += T(t.coefficient) * t.function->template value<T>(z);
        return s;
      }
    }
    return T{};
  }

  template <class T>
  std::vector<T> gradient(std::span<const T> z) const {
    std::vector<T> g(dim_, T{});
    switch (family_) {
      case Family::zero: break;
      case Family::euclidean:
      case Family::scaled:
      case Family::randers:
      case Family::bryant_pair: {
        const T len = detail::root(detail::square_sum(z, 0, dim_));
        T factor{1.0};
        if (family_ == Family::scaled) factor = T(c_);
        if (family_ == Family::bryant_pair) {
          if constexpr (detail::is_complex_v<T>)
            factor = Complex(std::sin(alpha_), std::cos(alpha_));
          else
            factor = std::cos(alpha_);
        }
        for (std::size_t k = 0; k < dim_; ++k) g[k] = factor * z[k] / len;
        if (family_ == Family::randers)
          for (std::size_t k = 0; k < dim_; ++k) g[k] += T(a_[k]);
        break;
      }
      case Family::dsr_a:
      case Family::dsr_b: {
        const auto [r, s] = dsr_roots(z);
        const Complex i{0.0, 1.0};
        for (std::size_t k = 0; k < dim_; ++k) {
          // dQ1 = 2 z_k on the first block, dQ2 = 2 z_k on the second.
          const Complex dz = 2.0 * Complex(z[k]);
          const Complex dq1 = k < split_ ? dz : Complex{};
          const Complex dq2 = k < split_ ? Complex{} : dz;
          const Complex dr = (dq1 - i * dq2) / (2.0 * r);
          const Complex ds = (dq1 + i * dq2) / (2.0 * s);
          g[k] = from_complex<T>(family_ == Family::dsr_b ? 0.5 * (dr + ds) : 0.5 * i * (dr - ds));
        }
        break;
      }
      case Family::sum:
        for (const Term& t : terms_) {
          const std::vector<T> gt = t.function->template gradient<T>(z);
          for (std::size_t k = 0; k < dim_; ++k) g[k] += T(t.coefficient) * gt[k];
        }
        break;
    }
    return g;
  }

  Family family_;
  std::size_t dim_;
  double c_ = 1.0;
  double alpha_ = 0.0;
  std::size_t split_ = 0;
  Vec a_;
  std::vector<Term> terms_;
};

/// Split a bryant pair into (psi, phi) = (cos(alpha)|y|, sin(alpha)|y|).
inline std::pair<HomogeneousFunction, HomogeneousFunction> split_bryant_pair(const HomogeneousFunction& pair) {
  if (pair.family() != Family::bryant_pair) throw std::invalid_argument("split_bryant_pair: not a bryant pair");
  return {HomogeneousFunction::scaled(pair.dimension(), std::cos(pair.alpha())),
          HomogeneousFunction::scaled(pair.dimension(), std::sin(pair.alpha()))};
}

/// Minimum eigenvalue of the finite-difference Hessian of g at p, and whether
/// a Cholesky factorization succeeds. Step h = eps^(1/3) max(1, |p|).
template <class G>
std::pair<double, bool> hessian_min_eigenvalue(G&& g, std::span<const double> p) {
  const double h = numdiff::second_step(numdiff::Stencil::central2) * std::max(1.0, norm(p));
  const Eigen::MatrixXd H = numdiff::hessian(g, p, h, numdiff::Stencil::central2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  return {eig.eigenvalues().minCoeff(), llt.info() == Eigen::Success};
}

/// Strong convexity and positivity of f on a deterministic set of unit directions.
///
/// The per-sample residual is max(0, 1e-8 - min(lambda_min, f(y))), with
/// tolerance 0, so the report passes iff every sampled Hessian of f^2/2 is
/// positive definite and f is positive.
inline VerificationReport check_minkowski(const HomogeneousFunction& f, std::size_t samples) {
  if (samples == 0) throw std::invalid_argument("check_minkowski: samples must be >= 1");
  constexpr double floor = 1e-8;
  ReportBuilder report("minkowski", 0.0);
  double min_eig = std::numeric_limits<double>::infinity();
  double min_val = std::numeric_limits<double>::infinity();
  const Vec origin(f.dimension(), 0.0);
  for (const Vec& y : unit_directions(f.dimension(), samples)) {
    const auto half_square = [&](const Vec& v) {
      const double fv = f.eval_real(v);
      return 0.5 * fv * fv;
    };
    const auto [lambda, cholesky_ok] = hessian_min_eigenvalue(half_square, y);
    const double fy = f.eval_real(y);
    min_eig = std::min(min_eig, lambda);
    min_val = std::min(min_val, fy);
    double residual = std::max(0.0, floor - std::min(lambda, fy));
    if (!cholesky_ok) residual = std::max(residual, floor);
    report.add(origin, y, residual);
  }
  report.stat("min_eigenvalue", min_eig);
  report.stat("min_value", min_val);
  return report.finish();
}

}  // namespace finsler
