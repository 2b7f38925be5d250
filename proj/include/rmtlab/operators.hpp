// SPDX-License-Identifier: MIT
//
// operators.hpp -- the centered, normalized operator attached to a sampled
// graph.  For the unweighted model this is H = (A - E A)/sqrt(d), realized
// matrix-free as a sparse part plus a rank-one background -p/sqrt(d) J; for
// weighted models E M = 0 already and the background vanishes.  H has the
// bipartite block form [[0, X], [X^T, 0]] with X of shape n x m, so its
// spectrum is {+/- sigma_i(X)} plus 0 with multiplicity >= n - m.

#pragma once

#include <Eigen/Core>
#include <vector>

#include "common.hpp"
#include "graph.hpp"

namespace rmtlab {

// Matrix-free view of X = (M - E M)/sqrt(d).  Borrows the graph; the graph
// must outlive the operator.
struct CenteredOperator {
  const BipartiteGraph* graph = nullptr;
  ModelParams params;
  int n = 0, m = 0;
  double inv_sqrt_d = 1.0;
  double beta = 0.0;  // background coefficient: p/sqrt(d) unweighted, else 0

  // out (size n) = X * in (size m).
  void apply_x(const double* in, double* out) const {
    const BipartiteGraph& g = *graph;
    double s = 0.0;
    if (beta != 0.0) {
      for (int v = 0; v < m; ++v) s += in[v];
    }
    const double base = -beta * s;
    for (int u = 0; u < n; ++u) out[u] = base;
    for (int e = 0; e < g.num_edges(); ++e)
      out[g.eu[e]] += inv_sqrt_d * g.ew[e] * in[g.ev[e]];
  }

  // out (size m) = X^T * in (size n).
  void apply_xt(const double* in, double* out) const {
    const BipartiteGraph& g = *graph;
    double s = 0.0;
    if (beta != 0.0) {
      for (int u = 0; u < n; ++u) s += in[u];
    }
    const double base = -beta * s;
    for (int v = 0; v < m; ++v) out[v] = base;
    for (int e = 0; e < g.num_edges(); ++e)
      out[g.ev[e]] += inv_sqrt_d * g.ew[e] * in[g.eu[e]];
  }

  // out (size n + m) = H * in, with V1 coordinates first.
  void apply_h(const double* in, double* out) const {
    apply_x(in + n, out);
    apply_xt(in, out + n);
  }

  // out = (X^T X) * in on V2; two sparse passes through a scratch buffer.
  void apply_gram(const double* in, double* out, std::vector<double>& scratch) const {
    scratch.resize(n);
    apply_x(in, scratch.data());
    apply_xt(scratch.data(), out);
  }

  // Single matrix entry H_{xy} for global indices (V1 first).  Only used on
  // tiny instances (dense checks, non-backtracking fixups).
  double entry(int x, int y) const {
    const BipartiteGraph& g = *graph;
    int u, v;
    if (x < n && y >= n) {
      u = x;
      v = y - n;
    } else if (x >= n && y < n) {
      u = y;
      v = x - n;
    } else {
      return 0.0;
    }
    double val = -beta;
    for (int s = g.off1[u]; s < g.off1[u + 1]; ++s)
      if (g.adj1[s] == v) val += inv_sqrt_d * g.ew[g.eid1[s]];
    return val;
  }
};

inline CenteredOperator build_operator(const BipartiteGraph& graph, const ModelParams& params) {
  if (graph.n != params.n || graph.m != params.m)
    throw MismatchError("build_operator: graph dimensions disagree with params");
  CenteredOperator op;
  op.graph = &graph;
  op.params = params;
  op.n = graph.n;
  op.m = graph.m;
  op.inv_sqrt_d = 1.0 / std::sqrt(params.d);
  op.beta = graph.weighted ? 0.0 : params.p / std::sqrt(params.d);
  return op;
}

// Dense n x m realization of X; guarded, for small instances and tests.
inline Eigen::MatrixXd dense_x(const CenteredOperator& op, std::size_t entry_limit = 40000000) {
  const std::size_t cells =
      static_cast<std::size_t>(op.n) * static_cast<std::size_t>(op.m);
  if (cells > entry_limit)
    throw PreconditionFailed("dense_x: instance too large for dense materialization");
  const BipartiteGraph& g = *op.graph;
  Eigen::MatrixXd X = Eigen::MatrixXd::Constant(op.n, op.m, -op.beta);
  for (int e = 0; e < g.num_edges(); ++e)
    X(g.eu[e], g.ev[e]) += op.inv_sqrt_d * g.ew[e];
  return X;
}

// Dense m x m Gram matrix G = X^T X without ever forming X.  Unweighted:
// G = [C - p (D 1^T + 1 D^T) + p^2 n J]/d where C_{vw} counts common V1
// neighbors and D holds V2 degrees; C is accumulated by a per-u loop over
// neighbor pairs (cost sum_u deg(u)^2).  Weighted: G = (M^T M)/d by the same
// pair loop with weight products and no correction terms.
inline Eigen::MatrixXd gram_dense(const CenteredOperator& op) {
  const BipartiteGraph& g = *op.graph;
  const int m = op.m;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (int u = 0; u < op.n; ++u) {
    for (int s = g.off1[u]; s < g.off1[u + 1]; ++s) {
      const int v = g.adj1[s];
      const double wv = g.ew[g.eid1[s]];
      for (int t = g.off1[u]; t < g.off1[u + 1]; ++t)
        G(v, g.adj1[t]) += wv * g.ew[g.eid1[t]];
    }
  }
  if (!g.weighted) {
    Eigen::VectorXd D = Eigen::VectorXd::Zero(m);
    for (int e = 0; e < g.num_edges(); ++e) D(g.ev[e]) += 1.0;
    const double p = op.params.p;
    G.noalias() -= p * (D * Eigen::RowVectorXd::Ones(m) + Eigen::VectorXd::Ones(m) * D.transpose());
    G.array() += p * p * static_cast<double>(op.n);
  }
  G /= op.params.d;
  return G;
}

}  // namespace rmtlab
