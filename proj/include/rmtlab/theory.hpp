// SPDX-License-Identifier: MIT
//
// theory.hpp -- closed-form scalar theory: the limiting singular-value law,
// emergence thresholds, degree-to-location Lambda maps, large-deviation rate
// functions, and regime classification.  All functions are pure; domain
// violations throw DomainError.
//
// Conventions.  The bipartite model has aspect ratio gamma = n/m >= 1 and
// q = gamma^(1/4).  Singular values concentrate on the bulk
// [q - 1/q, q + 1/q]; outliers are governed by the normalized degrees
// alpha_x = D_x / d with d = b ln N.

#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "common.hpp"

namespace rmtlab {

// Which side of the bipartition a vertex belongs to.  V1 is the larger class
// (n = floor(gamma*m) vertices), V2 the smaller (m vertices).
enum class Side { v1, v2 };

// ---------------------------------------------------------------------------
// Rate function and thresholds
// ---------------------------------------------------------------------------

// Bennett large-deviation rate h(u) = (1+u) ln(1+u) - u, u >= 0.
inline double bennett_rate(double u) {
  if (u < 0.0) throw DomainError("bennett_rate: u must be >= 0");
  return (1.0 + u) * std::log1p(u) - u;
}

// The three emergence thresholds plus the two assumption curves.  l2_star and
// ihara_bass_bound are undefined at q = 1 and represented as empty optionals
// (an explicit variant, not NaN).
struct Thresholds {
  double q = 1.0;
  double r2_star = 0.0;                  // right-edge emergence on V2
  double r1_star = 0.0;                  // right-edge emergence on V1
  std::optional<double> l2_star;         // left-edge emergence on V2 (q > 1)
  double connectivity_bound = 1.0;       // q^2: b above it => connected w.h.p.
  std::optional<double> ihara_bass_bound;  // q^2 / h(q^2 - 1) (q > 1)
};

inline Thresholds thresholds(double q) {
  if (q < 1.0) throw DomainError("thresholds: q must be >= 1");
  Thresholds t;
  t.q = q;
  const double q2 = q * q;
  const double qi2 = 1.0 / q2;
  t.r2_star = 1.0 / ((q2 + 1.0) * std::log1p(qi2) - 1.0);
  t.r1_star = 1.0 / ((qi2 + 1.0) * std::log1p(q2) - 1.0);
  t.connectivity_bound = q2;
  if (q > 1.0) {
    t.l2_star = 1.0 / ((q2 - 1.0) * std::log1p(-qi2) + 1.0);
    t.ihara_bass_bound = q2 / bennett_rate(q2 - 1.0);
  }
  return t;
}

// Root of l2_star(q) = q^2 / h(q^2 - 1) in (1, 3]: the aspect ratio below
// which the left-edge analysis loses its positive-definiteness assumption
// before the left threshold is reached.  Bisection to 1e-9.
inline double critical_q_star() {
  auto diff = [](double q) {
    const Thresholds t = thresholds(q);
    return *t.l2_star - *t.ihara_bass_bound;
  };
  double lo = 1.0 + 1e-6, hi = 3.0;
  // diff < 0 near q = 1 (the assumption curve blows up), > 0 at q = 3.
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (diff(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Error control parameter xi = sqrt(ln d / d), d > 1.
inline double error_parameter(double d) {
  if (d <= 1.0) throw DomainError("error_parameter: d must be > 1");
  return std::sqrt(std::log(d) / d);
}

// ---------------------------------------------------------------------------
// Lambda maps (degree -> outlier location)
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr double kEndpointClamp = 1e-12;
}

// Lambda_q(t) = sqrt(t + q^-2 + 1/(t - q^2)) on [0, q^2-1] U [q^2+1, inf).
// Values within 1e-12 of a domain endpoint are clamped onto it; the open
// band (q^2-1, q^2+1) is a hard DomainError.  Lower branch values predict
// left outliers, upper branch values right outliers (V2 vertices).
inline double lambda_q(double t, double q) {
  const double q2 = q * q;
  if (t < 0.0 && t >= -detail::kEndpointClamp) t = 0.0;
  if (std::abs(t - (q2 - 1.0)) <= detail::kEndpointClamp) t = q2 - 1.0;
  if (std::abs(t - (q2 + 1.0)) <= detail::kEndpointClamp) t = q2 + 1.0;
  if (t < 0.0 || (t > q2 - 1.0 && t < q2 + 1.0))
    throw DomainError("lambda_q: t outside [0, q^2-1] U [q^2+1, inf)");
  const double v = t + 1.0 / q2 + 1.0 / (t - q2);
  return std::sqrt(v > 0.0 ? v : 0.0);
}

// Lambda_{q^-1}(t) = sqrt(t + q^2 + 1/(t - q^-2)) on [q^-2+1, inf).
// No lower branch: V1 vertices only ever produce right outliers.
inline double lambda_q_inv(double t, double q) {
  const double qi2 = 1.0 / (q * q);
  if (std::abs(t - (qi2 + 1.0)) <= detail::kEndpointClamp) t = qi2 + 1.0;
  if (t < qi2 + 1.0) throw DomainError("lambda_q_inv: t outside [q^-2+1, inf)");
  return std::sqrt(t + q * q + 1.0 / (t - qi2));
}

// ---------------------------------------------------------------------------
// Limiting singular-value law (Marchenko-Pastur in singular-value form)
// ---------------------------------------------------------------------------

// Bulk edges (q - 1/q, q + 1/q).
inline std::pair<double, double> mp_edges(double q) {
  if (q < 1.0) throw DomainError("mp_edges: q must be >= 1");
  return {q - 1.0 / q, q + 1.0 / q};
}

// Density f(s) = q^2 sqrt((s^2 - l-)(l+ - s^2)) / (pi s) on the bulk,
// 0 outside, with l(+/-) = (q +/- 1/q)^2.
inline double mp_density(double s, double q) {
  if (q < 1.0) throw DomainError("mp_density: q must be >= 1");
  const auto [lo, hi] = mp_edges(q);
  if (s <= lo || s >= hi) return 0.0;
  const double lm = lo * lo, lp = hi * hi, s2 = s * s;
  return q * q * std::sqrt((s2 - lm) * (lp - s2)) / (M_PI * s);
}

// CDF of the singular-value law by quadrature.  Substituting
// s^2 = l- + (l+ - l-) sin^2(phi) removes both square-root edges and the
// 1/s singularity at q = 1, leaving a smooth integrand for composite
// Simpson; 512 panels give ~1e-12 accuracy.
inline double mp_cdf(double s, double q) {
  if (q < 1.0) throw DomainError("mp_cdf: q must be >= 1");
  const auto [lo, hi] = mp_edges(q);
  if (s <= lo) return 0.0;
  if (s >= hi) return 1.0;
  const double lm = lo * lo, lp = hi * hi;
  const double width = lp - lm;
  const double u = (s * s - lm) / width;  // in (0, 1)
  const double phi_end = std::asin(std::sqrt(u));
  const double q2 = q * q;
  auto integrand = [&](double phi) {
    const double sp = std::sin(phi), cp = std::cos(phi);
    const double t = lm + width * sp * sp;
    // At q = 1 the lower edge is 0 (lm = 0) and the raw ratio sin^2/t is
    // 0/0 at phi = 0; its limit there is 1/width.
    const double ratio = (t > 0.0) ? sp * sp / t : 1.0 / width;
    return q2 * width * width * ratio * cp * cp / M_PI;
  };
  const int panels = 512;  // must be even for Simpson
  const double h = phi_end / panels;
  double acc = integrand(0.0) + integrand(phi_end);
  for (int i = 1; i < panels; ++i) acc += integrand(h * i) * (i % 2 ? 4.0 : 2.0);
  const double val = acc * h / 3.0;
  return val < 0.0 ? 0.0 : (val > 1.0 ? 1.0 : val);
}

// Quantile (inverse CDF) by bisection; u in [0, 1].
inline double mp_quantile(double u, double q) {
  if (u < 0.0 || u > 1.0) throw DomainError("mp_quantile: u must be in [0,1]");
  auto [lo, hi] = mp_edges(q);
  for (int it = 0; it < 90; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mp_cdf(mid, q) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Degree large deviations and outlier counts
// ---------------------------------------------------------------------------

// Stirling-corrected degree rate: P(D_x = alpha d) ~ exp(-f(alpha)) with
// f_{q,d}(alpha) = d (alpha ln(alpha/q^2) - alpha + q^2) + 0.5 ln(2 pi alpha d)
// for V2 vertices; V1 vertices use the same formula with q -> 1/q.
inline double degree_rate(double alpha, double q, double d, Side side) {
  if (alpha <= 0.0) throw DomainError("degree_rate: alpha must be > 0");
  const double qq = (side == Side::v2) ? q : 1.0 / q;
  const double q2 = qq * qq;
  return d * (alpha * std::log(alpha / q2) - alpha + q2) + 0.5 * std::log(2.0 * M_PI * alpha * d);
}

// Which outlier family a count prediction refers to.
enum class OutlierFamily { right_v2, right_v1, left_v2 };

// First-order outlier count: m N^(-b/r2*) (resp. n N^(-b/r1*), m N^(-b/l2*)).
// Above the matching threshold the count is exactly 0.  The o(1) exponent
// correction is dropped, making this an order-of-magnitude tool.
inline double expected_outlier_count(double b, double q, double N, double m,
                                     OutlierFamily family) {
  const Thresholds t = thresholds(q);
  switch (family) {
    case OutlierFamily::right_v2:
      if (b > t.r2_star) return 0.0;
      return m * std::pow(N, -b / t.r2_star);
    case OutlierFamily::right_v1:
      if (b > t.r1_star) return 0.0;
      return (N - m) * std::pow(N, -b / t.r1_star);
    case OutlierFamily::left_v2:
      if (!t.l2_star || b > *t.l2_star) return 0.0;
      return m * std::pow(N, -b / *t.l2_star);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Regime classification (the (b, q) phase diagram)
// ---------------------------------------------------------------------------

enum class RightRegion { no_right_outliers, v2_right_outliers, v1_and_v2_right_outliers };
enum class LeftRegion {
  no_left_outliers,
  v2_left_outliers,
  undetermined_below_assumptions,  // b below the Ihara-Bass curve but connected
  disconnected_regime              // b below the connectivity bound q^2
};

struct RegimeLabel {
  RightRegion right_region = RightRegion::no_right_outliers;
  LeftRegion left_region = LeftRegion::no_left_outliers;
};

struct AssumptionFlags {
  bool connectivity = false;  // b > q^2
  bool ihara_bass = false;    // b > q^2 / h(q^2 - 1)   (never true at q = 1)
};

inline AssumptionFlags assumptions_check(double b, double q) {
  const Thresholds t = thresholds(q);
  AssumptionFlags f;
  f.connectivity = b > t.connectivity_bound;
  f.ihara_bass = t.ihara_bass_bound && b > *t.ihara_bass_bound;
  return f;
}

// Pure threshold comparisons; boundaries resolve toward the outlier-free
// side.  At q = 1 the left edge of the bulk is 0 and no left-outlier theory
// applies, so the left label is no_left_outliers.
inline RegimeLabel classify_regime(double b, double q) {
  if (b <= 0.0) throw DomainError("classify_regime: b must be > 0");
  const Thresholds t = thresholds(q);
  RegimeLabel label;
  if (b > t.r2_star) {
    label.right_region = RightRegion::no_right_outliers;
  } else if (b > t.r1_star) {
    label.right_region = RightRegion::v2_right_outliers;
  } else {
    label.right_region = RightRegion::v1_and_v2_right_outliers;
  }
  if (!t.l2_star || b > *t.l2_star) {
    label.left_region = LeftRegion::no_left_outliers;
  } else if (b < t.connectivity_bound) {
    label.left_region = LeftRegion::disconnected_regime;
  } else if (b < *t.ihara_bass_bound) {
    label.left_region = LeftRegion::undetermined_below_assumptions;
  } else {
    label.left_region = LeftRegion::v2_left_outliers;
  }
  return label;
}

}  // namespace rmtlab
