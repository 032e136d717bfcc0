#pragma once

// The `finsler` command-line tool: JSON on stdout, a short summary on stderr.
// Exit codes: 0 all checks pass, 1 some check failed, 2 parse error,
// 3 domain error, 4 solver failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/descriptor.hpp"
#include "finsler/json_io.hpp"
#include "finsler/verify.hpp"

namespace finsler::cli {

using nlohmann::json;

enum ExitCode : int { ok = 0, checks_failed = 1, parse_error = 2, domain_error = 3, solver_error = 4 };

struct CommonOptions {
  std::size_t dim = 0;
  double solver_tol = SolverConfig{}.tolerance;
  int max_iterations = SolverConfig{}.max_iterations;
};

namespace detail {

inline Vec parse_point(const std::string& text, const char* what) {
  if (text.empty()) return {};
  try {
    return finsler::detail::parse_list(text);
  } catch (const ParseError& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

/// Resolves the working dimension from --dim, the descriptor and the given points.
inline std::size_t resolve_dimension(const CommonOptions& opt, const std::vector<std::string>& metrics,
                                     std::initializer_list<const Vec*> points) {
  std::size_t dim = opt.dim;
  const auto agree = [&dim](std::size_t d, const std::string& source) {
    if (dim != 0 && d != dim)
      throw ParseError(source + " has dimension " + std::to_string(d) + ", expected " + std::to_string(dim));
    dim = d;
  };
  for (const auto& m : metrics)
    if (auto d = implied_dimension(m)) agree(*d, "metric '" + m + "'");
  for (const Vec* p : points)
    if (!p->empty()) agree(p->size(), "point");
  return dim == 0 ? 2 : dim;
}

inline SolverConfig solver_config(const CommonOptions& opt) {
  SolverConfig cfg;
  cfg.tolerance = opt.solver_tol;
  cfg.max_iterations = opt.max_iterations;
  cfg.validate();
  return cfg;
}

inline Vec default_direction(std::size_t dim) {
  Vec y(dim, 0.0);
  y[0] = 1.0;
  return y;
}

inline double default_radius(const MetricEvaluator& m) {
  return std::min(0.5, 0.9 * m.domain_radius());
}

inline void require_radius(const MetricEvaluator& m, double radius) {
  if (!(radius > 0.0)) throw ParseError("--radius must be positive");
  if (!(radius <= m.domain_radius()))
    throw DomainError("--radius " + format_double(radius) + " reaches outside the domain |x| < " +
                      format_double(m.domain_radius()));
}

inline CheckKind parse_check(const std::string& s) {
  for (CheckKind c : {CheckKind::hamel, CheckKind::curvature, CheckKind::berwald, CheckKind::convexity,
                      CheckKind::geodesic, CheckKind::pde})
    if (s == check_name(c)) return c;
  throw ParseError("unknown check '" + s + "'");
}

/// "<tol>" applies to every check; "<check>=<tol>,..." to the named ones.
inline std::map<std::string, double> parse_tolerances(const std::string& text) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  if (text.find('=') == std::string::npos) {
    out["*"] = finsler::detail::parse_double(text);
    return out;
  }
  for (auto part : finsler::detail::split_top(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) throw ParseError("--tol-override: expected check=value");
    const std::string name(finsler::detail::trim(part.substr(0, eq)));
    (void)parse_check(name);
    out[name] = finsler::detail::parse_double(part.substr(eq + 1));
  }
  return out;
}

struct GridAxis {
  char variable;  // 'x' or 'y'
  std::size_t index;
  double lo, hi;
  std::size_t count;
  double at(std::size_t i) const { return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1); }
};

/// "x1=lo:hi:count" (1-based coordinate index).
inline GridAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq < 2 || (text[0] != 'x' && text[0] != 'y'))
    throw ParseError("--grid: expected x<k>=lo:hi:count, got '" + text + "'");
  const std::size_t k = finsler::detail::parse_count(std::string_view(text).substr(1, eq - 1));
  const auto parts = finsler::detail::split_top(std::string_view(text).substr(eq + 1), ':');
  if (parts.size() != 3) throw ParseError("--grid: expected lo:hi:count in '" + text + "'");
  return {text[0], k - 1, finsler::detail::parse_double(parts[0]), finsler::detail::parse_double(parts[1]),
          finsler::detail::parse_count(parts[2])};
}

inline void write_output(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace detail

/// Evaluates one point. P and K are null when the point is degenerate.
inline json cmd_eval(const MetricEvaluator& m, const Vec& x, const Vec& y) {
  json j;
  j["metric"] = m.name();
  j["x"] = x;
  j["y"] = y;
  const double F = m.eval(x, y);
  j["F"] = F;
  const auto exact = m.projective_factor_exact(x, y);
  j["P"] = exact ? *exact : projective_factor_numeric(m, x, y);
  j["P_exact"] = exact.has_value();
  j["K_numeric"] = flag_curvature(m, x, y);
  const double hamel = hamel_residual(m, x, y);
  j["hamel_residual"] = hamel;
  if (hamel > default_tolerance(CheckKind::hamel))
    j["warning"] = "Hamel residual above tolerance; the curvature formula assumes projective flatness";
  return j;
}

inline json cmd_verify(const MetricEvaluator& m, const std::vector<CheckKind>& checks, double radius,
                       std::size_t samples, std::uint64_t seed, const std::map<std::string, double>& tol) {
  const auto pts = sample_points(m.dimension(), radius, samples, seed);
  json j;
  j["metric"] = m.name();
  j["dimension"] = m.dimension();
  j["radius"] = radius;
  j["samples"] = samples;
  j["seed"] = seed;
  if (auto k = m.intended_curvature()) j["intended_curvature"] = *k;
  j["reports"] = json::array();
  bool pass = true;
  for (CheckKind c : checks) {
    double t = default_tolerance(c);
    if (auto it = tol.find("*"); it != tol.end()) t = it->second;
    if (auto it = tol.find(check_name(c)); it != tol.end()) t = it->second;
    const VerificationReport r = run_check(m, c, pts, t);
    pass = pass && r.pass;
    j["reports"].push_back(to_json(r));
  }
  j["pass"] = pass;
  return j;
}

inline json cmd_compare(const MetricEvaluator& a, const MetricEvaluator& b, double radius, std::size_t samples,
                        std::uint64_t seed, double tolerance) {
  if (a.dimension() != b.dimension()) throw ParseError("compare: metrics have different dimensions");
  const auto pts = sample_points(a.dimension(), radius, samples, seed);
  std::vector<double> fa(pts.size()), fb(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    fa[i] = a.eval(pts[i].x, pts[i].y);
    fb[i] = b.eval(pts[i].x, pts[i].y);
  });
  double max_abs = 0.0, max_rel = 0.0;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(fa[i] - fb[i]);
    const double rel = d / std::max({std::abs(fa[i]), std::abs(fb[i]), std::numeric_limits<double>::min()});
    max_abs = std::max(max_abs, d);
    if (rel > max_rel || (std::isnan(rel) && !std::isnan(max_rel))) {
      max_rel = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
      worst = i;
    }
  }
  json j;
  j["metrics"] = {a.name(), b.name()};
  j["samples"] = samples;
  j["radius"] = radius;
  j["seed"] = seed;
  j["max_abs_diff"] = max_abs;
  j["max_rel_diff"] = max_rel;
  if (!pts.empty())
    j["worst_point"] = {{"x", pts[worst].x}, {"y", pts[worst].y}, {"F_a", fa[worst]}, {"F_b", fb[worst]}};
  j["tolerance"] = tolerance;
  j["pass"] = max_rel <= tolerance;
  return j;
}

struct SampleResult {
  std::string csv;
  std::size_t rows = 0;
  std::size_t failed = 0;
};

/// Grid over the given axes (first axis slowest); coordinates not on an axis
/// are taken from x and y. Points where evaluation fails get empty F, P, K cells.
inline SampleResult cmd_sample(const MetricEvaluator& m, const std::vector<detail::GridAxis>& axes, const Vec& x,
                               const Vec& y) {
  const std::size_t n = m.dimension();
  for (const auto& ax : axes)
    if (ax.index >= n) throw ParseError("--grid: coordinate index out of range");
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.count;
  std::vector<Vec> xs(total, x), ys(total, y);
  for (std::size_t r = 0; r < total; ++r) {
    std::size_t rem = r;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const std::size_t i = rem % axes[a].count;
      rem /= axes[a].count;
      (axes[a].variable == 'x' ? xs[r] : ys[r])[axes[a].index] = axes[a].at(i);
    }
  }
  std::vector<std::optional<std::array<double, 3>>> vals(total);
  parallel_for(total, [&](std::size_t r) {
    try {
      const double F = m.eval(xs[r], ys[r]);
      vals[r] = std::array<double, 3>{F, projective_factor(m, xs[r], ys[r]), flag_curvature(m, xs[r], ys[r])};
    } catch (const FinslerError&) {
    }
  });
  SampleResult out;
  std::ostringstream csv;
  for (std::size_t k = 0; k < n; ++k) csv << "x" << k + 1 << ",";
  for (std::size_t k = 0; k < n; ++k) csv << "y" << k + 1 << ",";
  csv << "F,P,K\n";
  for (std::size_t r = 0; r < total; ++r) {
    for (double v : xs[r]) csv << format_double(v) << ",";
    for (double v : ys[r]) csv << format_double(v) << ",";
    if (vals[r])
      csv << format_double((*vals[r])[0]) << "," << format_double((*vals[r])[1]) << ","
          << format_double((*vals[r])[2]) << "\n";
    else {
      csv << ",,\n";
      ++out.failed;
    }
  }
  out.csv = csv.str();
  out.rows = total;
  return out;
}

inline std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream csv;
  const std::size_t n = t.points.empty() ? 0 : t.points.front().size();
  csv << "t";
  for (std::size_t k = 0; k < n; ++k) csv << ",x" << k + 1;
  for (std::size_t k = 0; k < n; ++k) csv << ",v" << k + 1;
  csv << "\n";
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    csv << format_double(t.times[i]);
    for (double v : t.points[i]) csv << "," << format_double(v);
    for (double v : t.velocities[i]) csv << "," << format_double(v);
    csv << "\n";
  }
  return csv.str();
}

inline json cmd_catalog(std::size_t dim) {
  json j = json::array();
  for (const CatalogEntry& e : list_catalog(dim)) {
    json row;
    row["name"] = e.label();
    row["descriptor"] = "catalog:" + e.descriptor();
    row["dimension"] = e.dimension;
    const auto k = e.known_curvature();
    row["known_curvature"] = k ? json(*k) : json(nullptr);
    const double r = e.domain_radius();
    row["domain_radius"] = r == unbounded_radius ? json(nullptr) : json(r);
    j.push_back(row);
  }
  return j;
}

namespace detail {

inline json error_json(const char* type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace detail

/// Entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projectively flat Finsler metrics of constant flag curvature"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonOptions common;
  std::vector<std::string> metrics;
  std::string x_text, y_text, checks_text = "hamel,curvature", tol_text, out_path, mode_text = "projective";
  std::vector<std::string> grid;
  std::optional<double> radius;
  std::size_t samples = 0;
  std::uint64_t seed = 42;
  double t_end = 0.2;
  std::size_t steps = 50;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dim", common.dim, "Dimension (default: implied by the metric or points, else 2)");
    sub->add_option("--solver-tol", common.solver_tol, "Fixed-point tolerance");
    sub->add_option("--max-iter", common.max_iterations, "Fixed-point iteration cap");
  };
  const auto add_metric = [&](CLI::App* sub) {
    sub->add_option("--metric", metrics, "Metric descriptor")->required()->expected(1);
  };

  CLI::App* eval = app.add_subcommand("eval", "Evaluate F, P and K at a point");
  add_metric(eval);
  add_common(eval);
  eval->add_option("--x", x_text, "Base point, comma separated")->allow_extra_args(false);
  eval->add_option("--y", y_text, "Direction, comma separated");

  CLI::App* verify = app.add_subcommand("verify", "Run identity checks over seeded samples");
  add_metric(verify);
  add_common(verify);
  verify->add_option("--checks", checks_text, "Comma list of hamel,curvature,berwald,convexity,geodesic,pde");
  verify->add_option("--radius", radius, "Sampling ball radius");
  verify->add_option("--samples", samples, "Number of samples (default 50)");
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--tol-override", tol_text, "Tolerance for all checks, or check=value,...");
  verify->add_option("--out", out_path, "Also write the JSON report here");

  CLI::App* compare = app.add_subcommand("compare", "Compare two metrics over seeded samples");
  compare->add_option("--metric", metrics, "Two metric descriptors")->required()->expected(2);
  add_common(compare);
  compare->add_option("--radius", radius, "Sampling ball radius (default 0.4)");
  compare->add_option("--samples", samples, "Number of samples (default 100)");
  compare->add_option("--seed", seed, "RNG seed");
  compare->add_option("--tol-override", tol_text, "Relative tolerance (default 1e-8)");
  compare->add_option("--out", out_path, "Also write the JSON result here");

  CLI::App* sample = app.add_subcommand("sample", "Tabulate F, P, K on a grid as CSV");
  add_metric(sample);
  add_common(sample);
  sample->add_option("--grid", grid, "Axis x<k>=lo:hi:count or y<k>=lo:hi:count (repeatable)")->required();
  sample->add_option("--x", x_text, "Fixed base point (default 0)");
  sample->add_option("--y", y_text, "Fixed direction (default e1)");
  sample->add_option("--out", out_path, "CSV path (default: stdout)");

  CLI::App* geodesic = app.add_subcommand("geodesic", "Integrate a geodesic and score its straightness");
  add_metric(geodesic);
  add_common(geodesic);
  geodesic->add_option("--x", x_text, "Start point (default 0)");
  geodesic->add_option("--y", y_text, "Initial velocity (default e1)");
  geodesic->add_option("--t-end", t_end, "Final time");
  geodesic->add_option("--steps", steps, "RK4 steps");
  geodesic->add_option("--mode", mode_text, "projective (-2 P v) or general (-2 G)")
      ->check(CLI::IsMember({"projective", "general"}));
  geodesic->add_option("--tol-override", tol_text, "Collinearity tolerance (default 1e-8)");
  geodesic->add_option("--out", out_path, "Trajectory CSV path");

  CLI::App* catalog = app.add_subcommand("catalog", "List the closed-form catalog");
  catalog->add_option("--dim", common.dim, "Dimension (default 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << detail::error_json("parse", e.what()).dump() << "\n";
    return parse_error;
  }

  try {
    const Vec x_in = detail::parse_point(x_text, "--x");
    const Vec y_in = detail::parse_point(y_text, "--y");
    const SolverConfig cfg = detail::solver_config(common);
    const std::size_t dim = detail::resolve_dimension(common, metrics, {&x_in, &y_in});
    const Vec x = x_in.empty() ? Vec(dim, 0.0) : x_in;
    const Vec y = y_in.empty() ? detail::default_direction(dim) : y_in;

    if (*catalog) {
      out << cmd_catalog(dim).dump(2) << "\n";
      return ok;
    }
    const MetricEvaluator m = parse_metric(metrics.at(0), dim, cfg);

    if (*eval) {
      const json j = cmd_eval(m, x, y);
      out << j.dump(2) << "\n";
      err << m.name() << ": F = " << format_double(j["F"]) << ", P = " << format_double(j["P"])
          << ", K = " << format_double(j["K_numeric"]) << "\n";
      return ok;
    }
    if (*verify) {
      std::vector<CheckKind> checks;
      for (auto c : finsler::detail::split_top(checks_text, ','))
        checks.push_back(detail::parse_check(std::string(finsler::detail::trim(c))));
      const double r = radius.value_or(detail::default_radius(m));
      detail::require_radius(m, r);
      const json j = cmd_verify(m, checks, r, samples ? samples : 50, seed, detail::parse_tolerances(tol_text));
      const std::string text = j.dump(2) + "\n";
      out << text;
      if (!out_path.empty()) detail::write_output(out_path, text);
      for (const auto& rep : j["reports"])
        err << rep["check"].get<std::string>() << ": " << (rep["pass"].get<bool>() ? "pass" : "FAIL")
            << " (max residual " << format_double(rep["max_residual"]) << ", tolerance "
            << format_double(rep["tolerance"]) << ")\n";
      return j["pass"].get<bool>() ? ok : checks_failed;
    }
    if (*compare) {
      const MetricEvaluator b = parse_metric(metrics.at(1), dim, cfg);
      const double r = radius.value_or(std::min(0.4, std::min(detail::default_radius(m), detail::default_radius(b))));
      detail::require_radius(m, r);
      detail::require_radius(b, r);
      const double tol = tol_text.empty() ? 1e-8 : finsler::detail::parse_double(tol_text);
      const json j = cmd_compare(m, b, r, samples ? samples : 100, seed, tol);
      const std::string text = j.dump(2) + "\n";
      out << text;
      if (!out_path.empty()) detail::write_output(out_path, text);
      err << "max relative difference " << format_double(j["max_rel_diff"]) << " ("
          << (j["pass"].get<bool>() ? "pass" : "FAIL") << ")\n";
      return j["pass"].get<bool>() ? ok : checks_failed;
    }
    if (*sample) {
      std::vector<detail::GridAxis> axes;
      for (const auto& g : grid) axes.push_back(detail::parse_axis(g));
      const SampleResult res = cmd_sample(m, axes, x, y);
      if (out_path.empty()) {
        out << res.csv;
      } else {
        detail::write_output(out_path, res.csv);
        out << json{{"metric", m.name()}, {"rows", res.rows}, {"failed", res.failed}, {"out", out_path}}.dump(2)
            << "\n";
      }
      err << res.rows << " rows, " << res.failed << " outside the domain\n";
      return ok;
    }
    if (*geodesic) {
      const GeodesicMode mode = mode_text == "general" ? GeodesicMode::general : GeodesicMode::projective;
      const Trajectory t = integrate_geodesic(m, x, y, t_end, steps, mode, true);
      const double tol = tol_text.empty() ? default_tolerance(CheckKind::geodesic)
                                          : finsler::detail::parse_double(tol_text);
      if (!out_path.empty()) detail::write_output(out_path, trajectory_csv(t));
      json j;
      j["metric"] = m.name();
      j["x0"] = x;
      j["v0"] = y;
      j["mode"] = mode_text;
      j["t_end"] = t_end;
      j["steps"] = steps;
      j["points"] = t.points.size();
      j["complete"] = t.complete;
      j["end_point"] = t.points.back();
      j["collinearity"] = t.collinearity;
      j["richardson_error"] = std::isnan(t.richardson_error) ? json(nullptr) : json(t.richardson_error);
      j["tolerance"] = tol;
      j["pass"] = t.collinearity <= tol;
      out << j.dump(2) << "\n";
      err << "collinearity " << format_double(t.collinearity) << (t.complete ? "" : " (stopped at the domain boundary)")
          << "\n";
      return t.collinearity <= tol ? ok : checks_failed;
    }
  } catch (const ParseError& e) {
    err << detail::error_json("parse", e.what()).dump() << "\n";
    return parse_error;
  } catch (const std::invalid_argument& e) {
    err << detail::error_json("parse", e.what()).dump() << "\n";
    return parse_error;
  } catch (const DomainError& e) {
    err << detail::error_json("domain", e.what()).dump() << "\n";
    return domain_error;
  } catch (const SolverError& e) {
    err << detail::error_json("solver", e.what()).dump() << "\n";
    return solver_error;
  } catch (const std::exception& e) {
    err << detail::error_json("internal", e.what()).dump() << "\n";
    return solver_error;
  }
  return ok;
}

}  // namespace finsler::cli
