#pragma once

// Metric evaluators: the three fixed-point constructions of constant flag
// curvature 0, -1 and +1 from origin data (psi, phi), the catalog closed
// forms, and a deliberately non-projectively-flat control metric.

#include <optional>
#include <string>

#include "finsler/catalog.hpp"
#include "finsler/errors.hpp"
#include "finsler/norms.hpp"
#include "finsler/solver.hpp"

namespace finsler {

/// Exact projective factor with its first derivatives.
struct ProjectiveJet {
  double p = 0.0;
  Vec p_y;
  Vec p_x;
};

/// Fraction of the estimated validity radius used as a constructed metric's domain.
inline constexpr double domain_fraction = 0.8;

class MetricEvaluator {
 public:
  enum class Kind { constructed_k0, constructed_kneg1, constructed_kpos1, catalog, broken };

  static MetricEvaluator from_catalog(CatalogEntry entry) {
    MetricEvaluator m(Kind::catalog, entry.dimension);
    m.curvature_ = entry.known_curvature();
    m.domain_radius_ = entry.domain_radius();
    m.entry_ = entry;
    return m;
  }

  /// F = |y| + 0.1 x^2 y^1: a Randers metric whose 1-form is not closed, so Hamel fails.
  static MetricEvaluator broken(std::size_t dim) {
    if (dim < 2) throw std::invalid_argument("broken metric needs dimension >= 2");
    MetricEvaluator m(Kind::broken, dim);
    m.domain_radius_ = 1.0;
    return m;
  }

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  std::optional<double> intended_curvature() const { return curvature_; }
  double domain_radius() const { return domain_radius_; }
  const SolverConfig& solver_config() const { return cfg_; }
  const std::optional<HomogeneousFunction>& origin_psi() const { return psi_; }
  const std::optional<HomogeneousFunction>& origin_phi() const { return phi_; }
  const std::optional<CatalogEntry>& catalog_entry() const { return entry_; }
  /// False when the builder was handed a psi that failed check_minkowski.
  bool origin_norm_is_minkowski() const { return minkowski_; }
  bool is_constructed() const {
    return kind_ == Kind::constructed_k0 || kind_ == Kind::constructed_kneg1 || kind_ == Kind::constructed_kpos1;
  }

  bool in_domain(std::span<const double> x) const {
    if (x.size() != dim_) return false;
    if (entry_) return entry_->in_domain(x);
    if (domain_radius_ == unbounded_radius) return true;
    return norm(x) < domain_radius_;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::constructed_k0: return "construct:0:" + psi_->describe() + ":" + phi_->describe();
      case Kind::constructed_kneg1: return "construct:-1:" + psi_->describe() + ":" + phi_->describe();
      case Kind::constructed_kpos1: return "construct:1:" + psi_->describe() + ":" + phi_->describe();
      case Kind::catalog: return "catalog:" + entry_->descriptor();
      case Kind::broken: return "test:broken";
    }
    return {};
  }

  /// F(x, y); F(x, 0) = 0.
  double eval(std::span<const double> x, std::span<const double> y) const {
    require_dimension(dim_, x.size(), "MetricEvaluator::eval(x)");
    require_dimension(dim_, y.size(), "MetricEvaluator::eval(y)");
    if (kind_ == Kind::catalog) return eval_catalog(*entry_, x, y);
    check_domain(x);
    if (is_zero(y)) return 0.0;
    switch (kind_) {
      case Kind::constructed_k0: {
        const RealSolveResult res = solve_real(*phi_, x, y, cfg_);
        const ImplicitDerivatives d = implicit_derivatives(*phi_, res, x, y);
        return psi_->eval_real(res.eta) * (1.0 + dot(std::span<const double>(d.p_y), x));
      }
      case Kind::constructed_kneg1: {
        const double plus = solve_real(*plus_, x, y, cfg_).value;
        const double minus = solve_real(*minus_, x, y, cfg_).value;
        return 0.5 * (plus - minus);
      }
      case Kind::constructed_kpos1: return solve_complex(*phi_, *psi_, x, y, cfg_).value.imag();
      case Kind::broken: return norm(y) + 0.1 * x[1] * y[0];
      case Kind::catalog: break;
    }
    return 0.0;
  }

  /// Exact projective factor for constructed metrics; nullopt otherwise.
  std::optional<double> projective_factor_exact(std::span<const double> x, std::span<const double> y) const {
    if (!is_constructed()) return std::nullopt;
    check_domain(x);
    switch (kind_) {
      case Kind::constructed_k0: return solve_real(*phi_, x, y, cfg_).value;
      case Kind::constructed_kneg1:
        return 0.5 * (solve_real(*plus_, x, y, cfg_).value + solve_real(*minus_, x, y, cfg_).value);
      case Kind::constructed_kpos1: return solve_complex(*phi_, *psi_, x, y, cfg_).value.real();
      default: break;
    }
    return std::nullopt;
  }

  /// P, P_y and P_x by implicit differentiation, for constructed metrics.
  std::optional<ProjectiveJet> projective_jet_exact(std::span<const double> x, std::span<const double> y) const {
    if (!is_constructed()) return std::nullopt;
    check_domain(x);
    const std::size_t n = dim_;
    ProjectiveJet jet{0.0, Vec(n, 0.0), Vec(n, 0.0)};
    switch (kind_) {
      case Kind::constructed_k0: {
        const RealSolveResult res = solve_real(*phi_, x, y, cfg_);
        const ImplicitDerivatives d = implicit_derivatives(*phi_, res, x, y);
        return ProjectiveJet{res.value, d.p_y, d.p_x};
      }
      case Kind::constructed_kneg1: {
        const RealSolveResult rp = solve_real(*plus_, x, y, cfg_);
        const RealSolveResult rm = solve_real(*minus_, x, y, cfg_);
        const ImplicitDerivatives dp = implicit_derivatives(*plus_, rp, x, y);
        const ImplicitDerivatives dm = implicit_derivatives(*minus_, rm, x, y);
        jet.p = 0.5 * (rp.value + rm.value);
        for (std::size_t k = 0; k < n; ++k) {
          jet.p_y[k] = 0.5 * (dp.p_y[k] + dm.p_y[k]);
          jet.p_x[k] = 0.5 * (dp.p_x[k] + dm.p_x[k]);
        }
        return jet;
      }
      case Kind::constructed_kpos1: {
        const ComplexSolveResult res = solve_complex(*phi_, *psi_, x, y, cfg_);
        const ComplexImplicitDerivatives d = complex_implicit_derivatives(*phi_, *psi_, res, x);
        jet.p = res.value.real();
        for (std::size_t k = 0; k < n; ++k) {
          jet.p_y[k] = d.psi_y[k].real();
          jet.p_x[k] = d.psi_x[k].real();
        }
        return jet;
      }
      default: break;
    }
    return std::nullopt;
  }

  /// (Phi_+, Phi_-) of the K = -1 construction.
  std::pair<double, double> branch_values(std::span<const double> x, std::span<const double> y) const {
    if (kind_ != Kind::constructed_kneg1) throw std::logic_error("branch_values: not a K = -1 construction");
    check_domain(x);
    return {solve_real(*plus_, x, y, cfg_).value, solve_real(*minus_, x, y, cfg_).value};
  }

  /// Psi = P + i F of the K = +1 construction.
  Complex complex_field(std::span<const double> x, std::span<const double> y) const {
    if (kind_ != Kind::constructed_kpos1) throw std::logic_error("complex_field: not a K = +1 construction");
    check_domain(x);
    return solve_complex(*phi_, *psi_, x, y, cfg_).value;
  }

 private:
  friend MetricEvaluator build_k0(const HomogeneousFunction&, const HomogeneousFunction&, const SolverConfig&);
  friend MetricEvaluator build_kneg1(const HomogeneousFunction&, const HomogeneousFunction&, const SolverConfig&);
  friend MetricEvaluator build_kpos1(const HomogeneousFunction&, const HomogeneousFunction&, const SolverConfig&);

  MetricEvaluator(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

  void check_domain(std::span<const double> x) const {
    if (!in_domain(x)) throw DomainError(name() + ": x outside the domain |x| < " + std::to_string(domain_radius_));
  }

  static double scaled_radius(double r) { return r == unbounded_radius ? r : domain_fraction * r; }

  Kind kind_;
  std::size_t dim_;
  std::optional<HomogeneousFunction> psi_, phi_;
  std::optional<HomogeneousFunction> plus_, minus_;
  std::optional<CatalogEntry> entry_;
  std::optional<double> curvature_;
  double domain_radius_ = unbounded_radius;
  SolverConfig cfg_;
  bool minkowski_ = true;
};

namespace detail {

inline bool passes_minkowski(const HomogeneousFunction& psi) {
  try {
    return check_minkowski(psi, 64).pass;
  } catch (const FinslerError&) {
    return false;
  }
}

inline void require_real_origin(const HomogeneousFunction& f, const char* what) {
  if (f.family() == Family::bryant_pair)
    throw std::invalid_argument(std::string(what) + ": a bryant pair only supplies K = +1 origin data");
}

}  // namespace detail

/// F = psi(y + x P)(1 + P_{y^k} x^k) with P = phi(y + x P). Flag curvature 0.
inline MetricEvaluator build_k0(const HomogeneousFunction& psi, const HomogeneousFunction& phi,
                                const SolverConfig& cfg = {}) {
  cfg.validate();
  require_dimension(psi.dimension(), phi.dimension(), "build_k0");
  detail::require_real_origin(psi, "build_k0");
  detail::require_real_origin(phi, "build_k0");
  MetricEvaluator m(MetricEvaluator::Kind::constructed_k0, psi.dimension());
  m.psi_ = psi;
  m.phi_ = phi;
  m.cfg_ = cfg;
  m.curvature_ = 0.0;
  m.domain_radius_ = MetricEvaluator::scaled_radius(radius_estimate(phi));
  m.minkowski_ = detail::passes_minkowski(psi);
  return m;
}

/// F = (Phi_+ - Phi_-)/2, P = (Phi_+ + Phi_-)/2 with Phi_pm = (phi +/- psi)(y + x Phi_pm).
/// Flag curvature -1.
inline MetricEvaluator build_kneg1(const HomogeneousFunction& psi, const HomogeneousFunction& phi,
                                   const SolverConfig& cfg = {}) {
  cfg.validate();
  require_dimension(psi.dimension(), phi.dimension(), "build_kneg1");
  detail::require_real_origin(psi, "build_kneg1");
  detail::require_real_origin(phi, "build_kneg1");
  MetricEvaluator m(MetricEvaluator::Kind::constructed_kneg1, psi.dimension());
  m.psi_ = psi;
  m.phi_ = phi;
  m.plus_ = HomogeneousFunction::sum(phi, 1.0, psi, 1.0);
  m.minus_ = HomogeneousFunction::sum(phi, 1.0, psi, -1.0);
  m.cfg_ = cfg;
  m.curvature_ = -1.0;
  m.domain_radius_ =
      MetricEvaluator::scaled_radius(std::min(radius_estimate(*m.plus_), radius_estimate(*m.minus_)));
  m.minkowski_ = detail::passes_minkowski(psi);
  return m;
}

/// F = Im Psi, P = Re Psi with Psi = phi(y + x Psi) + i psi(y + x Psi).
/// A bryant pair passed as psi (with phi = zero) supplies phi + i psi directly.
/// Flag curvature +1.
inline MetricEvaluator build_kpos1(const HomogeneousFunction& psi_in, const HomogeneousFunction& phi_in,
                                   const SolverConfig& cfg = {}) {
  cfg.validate();
  require_dimension(psi_in.dimension(), phi_in.dimension(), "build_kpos1");
  const auto [phi, psi] = detail::canonical_pair(phi_in, psi_in);
  MetricEvaluator m(MetricEvaluator::Kind::constructed_kpos1, psi.dimension());
  m.psi_ = psi;
  m.phi_ = phi;
  m.cfg_ = cfg;
  m.curvature_ = 1.0;
  m.domain_radius_ = MetricEvaluator::scaled_radius(radius_estimate_complex(phi, psi));
  m.minkowski_ = detail::passes_minkowski(psi);
  return m;
}

}  // namespace finsler
