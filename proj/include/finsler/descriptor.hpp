#pragma once

// Text descriptors for norms and metrics, as used on the command line:
//   norms:   zero | euclidean | scaled:<c> | randers:<a1>,...,<an> |
//            dsr-a:<n>,<m> | dsr-b:<n>,<m> | bryant:<alpha> | <c>*(<norm>)+<c>*(<norm>)
//   metrics: catalog:<name>[:<params>] | construct:<K>:<psi>:<phi> |
//            construct:1:bryant:<alpha> | test:broken

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/catalog.hpp"
#include "finsler/construct.hpp"
#include "finsler/errors.hpp"
#include "finsler/norms.hpp"

namespace finsler {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

/// Splits on `sep` outside parentheses.
inline std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth < 0) throw ParseError("unbalanced parentheses in '" + std::string(s) + "'");
    if (s[i] == sep && depth == 0) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError("unbalanced parentheses in '" + std::string(s) + "'");
  out.push_back(s.substr(start));
  return out;
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::size_t parse_count(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v == 0)
    throw ParseError("not a positive integer: '" + std::string(s) + "'");
  return v;
}

inline int parse_sign(std::string_view s) {
  s = trim(s);
  if (s == "+" || s == "+1" || s == "1") return 1;
  if (s == "-" || s == "-1") return -1;
  throw ParseError("expected a sign (+ or -): '" + std::string(s) + "'");
}

inline std::vector<double> parse_list(std::string_view s) {
  std::vector<double> v;
  for (auto part : split_top(s, ',')) v.push_back(parse_double(part));
  return v;
}

inline std::vector<std::string_view> expect_params(std::string_view name, std::string_view params,
                                                   std::size_t count) {
  auto parts = split_top(params, ',');
  if (params.empty() || parts.size() != count)
    throw ParseError(std::string(name) + ": expected " + std::to_string(count) + " parameter(s)");
  return parts;
}

inline bool is_parametrized_norm(std::string_view name) {
  return name == "scaled" || name == "randers" || name == "dsr-a" || name == "dsr-b" || name == "bryant";
}

/// Dimension a norm descriptor fixes by itself (randers, dsr), if any.
inline std::optional<std::size_t> implied_norm_dimension(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view params = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (name == "randers") return split_top(params, ',').size();
  if (name == "dsr-a" || name == "dsr-b") {
    const auto p = expect_params(name, params, 2);
    return parse_count(p[0]) + parse_count(p[1]);
  }
  if (text.find("*(") != std::string_view::npos) {
    for (auto term : split_top(text, '+')) {
      const auto open = term.find('(');
      if (open != std::string_view::npos && term.back() == ')')
        if (auto d = implied_norm_dimension(term.substr(open + 1, term.size() - open - 2))) return d;
    }
  }
  return std::nullopt;
}

inline HomogeneousFunction parse_norm_impl(std::string_view text, std::size_t dim);

inline HomogeneousFunction parse_sum(std::string_view text, std::size_t dim) {
  // <c>*(<a>)+<c>*(<b>); the split on '+' ignores signs inside parentheses
  // and leading signs of coefficients.
  std::vector<std::pair<double, std::string_view>> terms;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool end = i == text.size();
    if (!end && text[i] == '(') ++depth;
    if (!end && text[i] == ')') --depth;
    if (end || (text[i] == '+' && depth == 0 && i > start && text[i - 1] == ')')) {
      const std::string_view term = text.substr(start, i - start);
      const auto star = term.find("*(");
      if (star == std::string_view::npos || term.back() != ')')
        throw ParseError("malformed sum term '" + std::string(term) + "'");
      terms.emplace_back(parse_double(term.substr(0, star)), term.substr(star + 2, term.size() - star - 3));
      start = i + 1;
    }
  }
  if (terms.size() != 2) throw ParseError("a sum needs exactly two terms: '" + std::string(text) + "'");
  return HomogeneousFunction::sum(parse_norm_impl(terms[0].second, dim), terms[0].first,
                                  parse_norm_impl(terms[1].second, dim), terms[1].first);
}

inline HomogeneousFunction parse_norm_impl(std::string_view text, std::size_t dim) {
  text = trim(text);
  if (text.find("*(") != std::string_view::npos) return parse_sum(text, dim);
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view params = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  try {
    if (name == "zero" || name == "euclidean") {
      if (!params.empty()) throw ParseError(std::string(name) + " takes no parameters");
      return name == "zero" ? HomogeneousFunction::zero(dim) : HomogeneousFunction::euclidean(dim);
    }
    if (name == "scaled") return HomogeneousFunction::scaled(dim, parse_double(expect_params(name, params, 1)[0]));
    if (name == "randers") {
      Vec a = parse_list(params);
      if (a.size() != dim)
        throw ParseError("randers: " + std::to_string(a.size()) + " coefficients for dimension " +
                         std::to_string(dim));
      return HomogeneousFunction::randers(std::move(a));
    }
    if (name == "dsr-a" || name == "dsr-b") {
      const auto p = expect_params(name, params, 2);
      const std::size_t n = parse_count(p[0]), m = parse_count(p[1]);
      if (n + m != dim) throw ParseError(std::string(name) + ": block sizes do not match the dimension");
      return name == "dsr-a" ? HomogeneousFunction::dsr_a(n, m) : HomogeneousFunction::dsr_b(n, m);
    }
    if (name == "bryant")
      return HomogeneousFunction::bryant_pair(dim, parse_double(expect_params(name, params, 1)[0]));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string(name) + ": " + e.what());
  }
  throw ParseError("unknown norm '" + std::string(text) + "'");
}

/// Splits "<psi>:<phi>" where each side is a norm descriptor that may itself contain one ':'.
inline std::pair<std::string_view, std::string_view> split_norm_pair(std::string_view text) {
  const auto parts = split_top(text, ':');
  std::size_t first = is_parametrized_norm(trim(parts[0])) ? 2 : 1;
  if (first > parts.size()) throw ParseError("missing parameters in '" + std::string(text) + "'");
  std::size_t len = 0;
  for (std::size_t i = 0; i < first; ++i) len += parts[i].size() + (i ? 1 : 0);
  const std::string_view psi = text.substr(0, len);
  const std::string_view phi = len < text.size() ? text.substr(len + 1) : std::string_view{};
  return {psi, phi};
}

}  // namespace detail

/// Parses a norm descriptor in dimension `dim`.
inline HomogeneousFunction parse_norm(std::string_view text, std::size_t dim) {
  return detail::parse_norm_impl(text, dim);
}

/// Dimension fixed by the descriptor itself (randers, dsr-*, dsr-new), if any.
inline std::optional<std::size_t> implied_dimension(std::string_view text) {
  text = detail::trim(text);
  if (text.starts_with("catalog:dsr-new:")) {
    const auto p = detail::expect_params("dsr-new", text.substr(16), 2);
    return detail::parse_count(p[0]) + detail::parse_count(p[1]);
  }
  if (text.starts_with("construct:")) {
    const auto rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) return std::nullopt;
    const auto [psi, phi] = detail::split_norm_pair(rest.substr(colon + 1));
    const auto a = detail::implied_norm_dimension(psi);
    const auto b = phi.empty() ? std::nullopt : detail::implied_norm_dimension(phi);
    if (a && b && *a != *b) throw ParseError("psi and phi descriptors imply different dimensions");
    return a ? a : b;
  }
  return std::nullopt;
}

inline CatalogEntry parse_catalog_entry(std::string_view text, std::size_t dim) {
  using detail::expect_params;
  text = detail::trim(text);
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view params = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  try {
    if (name == "funk" || name == "berwald") {
      if (!params.empty()) throw ParseError(std::string(name) + " takes no parameters");
      return name == "funk" ? CatalogEntry::funk(dim) : CatalogEntry::berwald(dim);
    }
    if (name == "space-form")
      return CatalogEntry::space_form(dim, detail::parse_double(expect_params(name, params, 1)[0]));
    if (name == "bryant") return CatalogEntry::bryant(dim, detail::parse_double(expect_params(name, params, 1)[0]));
    if (name == "dsr-new") {
      const auto p = expect_params(name, params, 2);
      const CatalogEntry e = CatalogEntry::dsr_new(detail::parse_count(p[0]), detail::parse_count(p[1]));
      if (e.dimension != dim) throw ParseError("dsr-new: block sizes do not match the dimension");
      return e;
    }
    if (name == "sph-k0") {
      const auto p = expect_params(name, params, 2);
      return CatalogEntry::sph_k0(dim, detail::parse_double(p[0]), detail::parse_sign(p[1]));
    }
    if (name == "sph-kneg1")
      return CatalogEntry::sph_kneg1(dim, detail::parse_double(expect_params(name, params, 1)[0]));
    if (name == "sph-kpos1")
      return CatalogEntry::sph_kpos1(dim, detail::parse_double(expect_params(name, params, 1)[0]));
    if (name == "zhou") {
      const auto p = expect_params(name, params, 3);
      return CatalogEntry::zhou(dim, detail::parse_double(p[0]), detail::parse_double(p[1]),
                                detail::parse_sign(p[2]));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string(name) + ": " + e.what());
  }
  throw ParseError("unknown catalog entry '" + std::string(text) + "'");
}

/// Parses a metric descriptor. `dim` = 0 means: take the dimension the
/// descriptor implies, or 2.
inline MetricEvaluator parse_metric(std::string_view text, std::size_t dim = 0, const SolverConfig& cfg = {}) {
  text = detail::trim(text);
  if (const auto implied = implied_dimension(text)) {
    if (dim != 0 && dim != *implied)
      throw ParseError("descriptor implies dimension " + std::to_string(*implied) + ", got " + std::to_string(dim));
    dim = *implied;
  }
  if (dim == 0) dim = 2;
  if (text == "test:broken") {
    if (dim < 2) throw ParseError("test:broken needs dimension >= 2");
    return MetricEvaluator::broken(dim);
  }
  if (text.starts_with("catalog:")) return MetricEvaluator::from_catalog(parse_catalog_entry(text.substr(8), dim));
  if (text.starts_with("construct:")) {
    const auto rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw ParseError("construct: expected construct:<K>:<psi>:<phi>");
    const std::string_view k = detail::trim(rest.substr(0, colon));
    const auto [psi_text, phi_text] = detail::split_norm_pair(rest.substr(colon + 1));
    const HomogeneousFunction psi = parse_norm(psi_text, dim);
    try {
      if (k == "1" || k == "+1") {
        if (psi.family() == Family::bryant_pair) {
          if (!phi_text.empty()) throw ParseError("construct:1:bryant:<alpha> takes no phi");
          return build_kpos1(psi, HomogeneousFunction::zero(dim), cfg);
        }
        if (phi_text.empty()) throw ParseError("construct: missing phi descriptor");
        return build_kpos1(psi, parse_norm(phi_text, dim), cfg);
      }
      if (phi_text.empty()) throw ParseError("construct: missing phi descriptor");
      const HomogeneousFunction phi = parse_norm(phi_text, dim);
      if (k == "0") return build_k0(psi, phi, cfg);
      if (k == "-1") return build_kneg1(psi, phi, cfg);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("construct: ") + e.what());
    }
    throw ParseError("construct: K must be 0, -1 or 1, got '" + std::string(k) + "'");
  }
  throw ParseError("unknown metric descriptor '" + std::string(text) + "'");
}

}  // namespace finsler
