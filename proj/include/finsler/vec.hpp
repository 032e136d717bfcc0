#pragma once

#include <cmath>
#include <complex>
#include <charconv>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

using Vec = std::vector<double>;
using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

template <class A, class B>
auto dot(std::span<const A> a, std::span<const B> b) {
  decltype(A{} * B{}) s{};
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline double dot(const Vec& a, const Vec& b) {
  return dot(std::span<const double>(a), std::span<const double>(b));
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double norm(std::span<const Complex> a) {
  double s = 0.0;
  for (const Complex& v : a) s += std::norm(v);
  return std::sqrt(s);
}

inline bool is_zero(std::span<const double> a) {
  for (double v : a)
    if (v != 0.0) return false;
  return true;
}

inline bool is_zero(std::span<const Complex> a) {
  for (const Complex& v : a)
    if (v != Complex{}) return false;
  return true;
}

/// y + x * t, componentwise.
template <class T>
std::vector<T> shifted(std::span<const double> y, std::span<const double> x, T t) {
  std::vector<T> out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = T(y[k]) + T(x[k]) * t;
  return out;
}

inline CVec to_complex(std::span<const double> y) { return CVec(y.begin(), y.end()); }

inline void require_dimension(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace finsler
