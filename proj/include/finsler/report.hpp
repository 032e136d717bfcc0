#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "finsler/vec.hpp"

namespace finsler {

struct SampleFailure {
  Vec x;
  Vec y;
  double residual = 0.0;
};

/// Residual statistics of one check over a sample set.
///
/// `pass` holds exactly when `max_residual <= tolerance`; failing samples are
/// recorded up to `failure_cap`.
struct VerificationReport {
  std::string check;
  std::size_t sample_count = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::vector<SampleFailure> failures;
  std::map<std::string, double> stats;
};

class ReportBuilder {
 public:
  static constexpr std::size_t failure_cap = 10;

  ReportBuilder(std::string check, double tolerance) {
    report_.check = std::move(check);
    report_.tolerance = tolerance;
  }

  void add(std::span<const double> x, std::span<const double> y, double residual) {
    // NaN residuals count as failures.
    const double r = std::isnan(residual) ? std::numeric_limits<double>::infinity() : residual;
    ++report_.sample_count;
    sum_ += r;
    report_.max_residual = std::max(report_.max_residual, r);
    if (!(r <= report_.tolerance) && report_.failures.size() < failure_cap)
      report_.failures.push_back({Vec(x.begin(), x.end()), Vec(y.begin(), y.end()), r});
  }

  void stat(const std::string& key, double value) { report_.stats[key] = value; }

  VerificationReport finish() {
    report_.mean_residual = report_.sample_count ? sum_ / report_.sample_count : 0.0;
    report_.pass = report_.max_residual <= report_.tolerance;
    return report_;
  }

 private:
  VerificationReport report_;
  double sum_ = 0.0;
};

}  // namespace finsler
