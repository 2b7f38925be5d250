// SPDX-License-Identifier: MIT
//
// predict.hpp -- degree-based outlier prediction and rank-to-rank matching
// against a computed spectrum.
//
// A vertex with normalized degree alpha sufficiently far from its mean is
// predicted to detach an eigenvalue at Lambda(alpha): V2 vertices map
// through Lambda_q (both branches), V1 vertices through Lambda_{1/q} (upper
// branch only, so V1 never predicts left outliers).  "Sufficiently far"
// means the predicted location clears the bulk edge by xi^(1/4) with
// xi = sqrt(ln d / d).

#pragma once

#include <algorithm>
#include <cstdint>
#include <tuple>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "spectrum.hpp"
#include "theory.hpp"

namespace rmtlab {

struct OutlierVertex {
  Side side = Side::v2;
  int index = 0;       // vertex id within its side
  double alpha = 0.0;  // normalized degree
  double location = 0.0;  // predicted singular-value location Lambda(alpha)
};

struct PredictedOutliers {
  double q = 1.0, d = 1.0;
  double xi = 0.0, xi_quarter = 0.0;
  double bulk_left = 0.0, bulk_right = 2.0;  // q -/+ 1/q
  double window_right = 2.0;  // bulk_right + xi^(1/4)
  double window_left = 0.0;   // bulk_left - xi^(1/4) (may be negative)
  bool left_defined = false;  // false at q = 1: the left edge is 0

  std::vector<OutlierVertex> right;  // R1 u R2 merged, descending location
  std::vector<OutlierVertex> left;   // L2, descending location (rank order)
  int r1_count = 0, r2_count = 0, l2_count = 0;

  std::uint64_t graph_fingerprint = 0;
  int m = 0;  // |V2|, to translate left ranks
};

// Scan the degree profile and predict outlier locations.  Right outliers:
// R2 = {x in V2 : Lambda_q(alpha_x) >= q + 1/q + xi^(1/4)} and likewise R1
// through Lambda_{1/q}; left outliers: L2 = {x in V2 : alpha_x on the lower
// branch and Lambda_q(alpha_x) <= q - 1/q - xi^(1/4)}.  Left prediction is
// skipped entirely at q = 1 (left_defined = false).
inline PredictedOutliers predict_outliers(const DegreeProfile& prof,
                                          const ModelParams& params,
                                          std::uint64_t fingerprint) {
  PredictedOutliers pred;
  const double q = params.q;
  pred.q = q;
  pred.d = params.d;
  pred.xi = error_parameter(params.d);
  pred.xi_quarter = std::pow(pred.xi, 0.25);
  pred.bulk_left = q - 1.0 / q;
  pred.bulk_right = q + 1.0 / q;
  pred.window_right = pred.bulk_right + pred.xi_quarter;
  pred.window_left = pred.bulk_left - pred.xi_quarter;
  pred.left_defined = q > 1.0;
  pred.graph_fingerprint = fingerprint;
  pred.m = static_cast<int>(prof.alpha2.size());
  const double q2 = q * q;
  const double qi2 = 1.0 / q2;

  for (int v = 0; v < static_cast<int>(prof.alpha2.size()); ++v) {
    const double a = prof.alpha2[v];
    if (a >= q2 + 1.0) {
      const double loc = lambda_q(a, q);
      if (loc >= pred.window_right) {
        pred.right.push_back({Side::v2, v, a, loc});
        ++pred.r2_count;
      }
    } else if (pred.left_defined && a <= q2 - 1.0) {
      const double loc = lambda_q(a, q);
      if (loc <= pred.window_left) {
        pred.left.push_back({Side::v2, v, a, loc});
        ++pred.l2_count;
      }
    }
  }
  for (int u = 0; u < static_cast<int>(prof.alpha1.size()); ++u) {
    const double a = prof.alpha1[u];
    if (a >= qi2 + 1.0) {
      const double loc = lambda_q_inv(a, q);
      if (loc >= pred.window_right) {
        pred.right.push_back({Side::v1, u, a, loc});
        ++pred.r1_count;
      }
    }
  }
  auto by_location_desc = [](const OutlierVertex& x, const OutlierVertex& y) {
    return std::tuple(-x.location, -x.alpha, x.side == Side::v1, x.index) <
           std::tuple(-y.location, -y.alpha, y.side == Side::v1, y.index);
  };
  std::sort(pred.right.begin(), pred.right.end(), by_location_desc);
  std::sort(pred.left.begin(), pred.left.end(), by_location_desc);
  return pred;
}

struct MatchedOutlier {
  int rank = 0;  // 1-based singular-value rank (descending)
  double sigma = 0.0;
  double predicted = 0.0;
  OutlierVertex vertex;
  double abs_err = 0.0;
};

struct MatchReport {
  std::vector<MatchedOutlier> right;  // ranks 1..|R1|+|R2| (as resolvable)
  std::vector<MatchedOutlier> left;   // tail ranks m-|L2|+1..m
  double max_right_err = 0.0;
  double max_left_err = 0.0;
  int right_unresolved = 0;  // predictions without a resolved sigma
  int left_unresolved = 0;
};

// Match predictions to the spectrum strictly by rank: the j-th predicted
// right location against sigma_j for j = 1..|R1|+|R2|, and the left
// predictions against the tail ranks m-|L2|+1..m (the |L2| smallest
// singular values, deepest prediction to smallest sigma).  Throws
// MismatchError if the spectrum was computed from a different graph.
inline MatchReport match_outliers(const PredictedOutliers& pred,
                                  const SpectralReport& rep) {
  if (pred.graph_fingerprint != rep.graph_fingerprint)
    throw MismatchError("match_outliers: spectrum belongs to a different graph");
  if (pred.m != rep.m)
    throw MismatchError("match_outliers: V2 dimension disagrees");
  MatchReport match;
  for (std::size_t i = 0; i < pred.right.size(); ++i) {
    if (i >= rep.sigma.size()) {
      ++match.right_unresolved;
      continue;
    }
    MatchedOutlier mo;
    mo.rank = static_cast<int>(i) + 1;
    mo.sigma = rep.sigma[i];
    mo.vertex = pred.right[i];
    mo.predicted = pred.right[i].location;
    mo.abs_err = std::abs(mo.sigma - mo.predicted);
    match.max_right_err = std::max(match.max_right_err, mo.abs_err);
    match.right.push_back(mo);
  }
  // Left: iterate from the deepest rank (m, the smallest sigma) upward.
  const int l2 = static_cast<int>(pred.left.size());
  for (int i = l2 - 1; i >= 0; --i) {
    const int rank = pred.m - l2 + 1 + i;  // 1-based
    const int from_bottom = pred.m - rank;  // 0 = smallest
    double sigma = kNaN;
    if (rep.dense) {
      sigma = rep.sigma[rank - 1];
    } else if (from_bottom < static_cast<int>(rep.sigma_bottom.size())) {
      sigma = rep.sigma_bottom[from_bottom];
    } else {
      ++match.left_unresolved;
      continue;
    }
    MatchedOutlier mo;
    mo.rank = rank;
    mo.sigma = sigma;
    mo.vertex = pred.left[i];
    mo.predicted = pred.left[i].location;
    mo.abs_err = std::abs(mo.sigma - mo.predicted);
    match.max_left_err = std::max(match.max_left_err, mo.abs_err);
    match.left.push_back(mo);
  }
  std::reverse(match.left.begin(), match.left.end());  // ascending rank
  return match;
}

}  // namespace rmtlab
