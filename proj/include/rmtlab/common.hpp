// SPDX-License-Identifier: MIT
//
// common.hpp -- shared error types and small numeric helpers used across the
// rmtlab headers.  Every exception carries a human-readable message; callers
// that can recover (e.g. the experiment harness) catch by type and record the
// failure in the trial record instead of aborting the run.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmtlab {

// Argument outside the mathematical domain of an operation (p > 1, forbidden
// Lambda band, q < 1, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Combining results that stem from different graphs (hash mismatch).
struct MismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A BFS layer S_j required by a construction is empty before the target depth.
struct EmptyLayerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input graph expected to be a tree is not one.
struct NotATree : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// M1(lambda) in the Ihara-Bass reduction is numerically singular.
struct SingularM1 : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// lambda coincides with an entry pole |X_jl| of the Ihara-Bass deformation.
struct ForbiddenLambda : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bisection bracket invalid (e.g. matrix already positive definite at the
// lower end of the theta scan).
struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A documented precondition does not hold for this input (e.g. a V1 degree
// reaches d in the lower Loewner check).
struct PreconditionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input (graph files, config files).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Median of a sample (by copy; empty input -> NaN).
inline double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Slope of the least-squares line y = a + slope * x.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return kNaN;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return kNaN;
  return sxy / sxx;
}

}  // namespace rmtlab
