// SPDX-License-Identifier: MIT
//
// localtree.hpp -- the local picture around a high-degree vertex: BFS layer
// decompositions, the radii inside which the graph is tree-like, rooted
// biregular test trees, the tridiagonal radial models Z^(1)/Z^(2), transfer
// matrices, and layered approximate eigenvectors with computable residuals.
//
// Global vertex ids: V1 vertex u is u, V2 vertex v is n + v.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "operators.hpp"
#include "solvers.hpp"
#include "theory.hpp"

namespace rmtlab {

// ---------------------------------------------------------------------------
// BFS layers
// ---------------------------------------------------------------------------

struct BfsLayers {
  int root = 0;
  std::vector<std::vector<int>> layers;  // layers[j] = S_j (global ids, ascending)
  std::vector<int> dist;                 // -1 if beyond rmax / unreachable
  std::vector<int> parent;               // BFS tree parent (smallest-id), -1 at root
};

// Layer decomposition out to distance rmax.  Neighbors are scanned in
// ascending id order, so parents are canonical (smallest-id) and layers come
// out sorted.
inline BfsLayers bfs_layers(const BipartiteGraph& g, int root, int rmax) {
  const int total = g.n + g.m;
  if (root < 0 || root >= total) throw DomainError("bfs_layers: root out of range");
  if (rmax < 0) throw DomainError("bfs_layers: rmax must be >= 0");
  BfsLayers L;
  L.root = root;
  L.dist.assign(total, -1);
  L.parent.assign(total, -1);
  L.dist[root] = 0;
  L.layers.push_back({root});
  for (int j = 0; j < rmax && !L.layers[j].empty(); ++j) {
    std::vector<int> next;
    for (int x : L.layers[j]) {
      auto visit = [&](int y) {
        if (L.dist[y] == -1) {
          L.dist[y] = j + 1;
          L.parent[y] = x;
          next.push_back(y);
        }
      };
      if (x < g.n) {
        for (int s = g.off1[x]; s < g.off1[x + 1]; ++s) visit(g.n + g.adj1[s]);
      } else {
        const int v = x - g.n;
        for (int s = g.off2[v]; s < g.off2[v + 1]; ++s) visit(g.adj2[s]);
      }
    }
    std::sort(next.begin(), next.end());
    // Re-assign parents in ascending order of child id for determinism:
    // parent already smallest-id because layer j is sorted and adjacency
    // lists are ascending.
    if (next.empty()) break;
    L.layers.push_back(std::move(next));
  }
  return L;
}

// ---------------------------------------------------------------------------
// Radii
// ---------------------------------------------------------------------------

// A radius together with its clamping status: `raw` may come out 0 at small
// d, in which case the usable value is clamped up to 1 and flagged.
struct Radius {
  int raw = 0;
  int effective = 1;
  bool clamped = false;
};

inline Radius make_radius(int raw) {
  Radius r;
  r.raw = raw;
  r.effective = std::max(1, raw);
  r.clamped = raw < 1;
  return r;
}

// Per-vertex tree radius floor(d / (6 ln D_x)); requires D_x >= 2.
inline Radius radius_r_x(double d, int degree) {
  if (degree < 2) throw DomainError("radius_r_x: degree must be >= 2");
  return make_radius(static_cast<int>(std::floor(d / (6.0 * std::log(static_cast<double>(degree))))));
}

// Global pruning radius floor((1/(4 q^2)) sqrt(d / ln d)); requires d > 1.
inline Radius pruning_radius(double d, double q) {
  if (d <= 1.0) throw DomainError("pruning_radius: d must be > 1");
  return make_radius(static_cast<int>(std::floor(std::sqrt(d / std::log(d)) / (4.0 * q * q))));
}

// ---------------------------------------------------------------------------
// Biregular test trees
// ---------------------------------------------------------------------------

// Rooted (d1, d2)-biregular bipartite tree of the given depth: every non-root
// V1 vertex has exactly d1 children, every non-root V2 vertex d2 children,
// and the root has root_degree children.  On such a tree the radial
// tridiagonal model is exact and residuals reduce to the boundary term.
// Returns the graph and the root's global id.
struct RootedTree {
  BipartiteGraph graph;
  int root = 0;  // global id
};

inline RootedTree make_biregular_tree(int d1, int d2, Side root_side,
                                      int root_degree, int depth) {
  if (d1 < 1 || d2 < 1 || root_degree < 1 || depth < 1)
    throw DomainError("make_biregular_tree: all parameters must be >= 1");
  // First pass: count vertices per side, breadth first.
  struct Node {
    Side side;
    int id;  // within side
  };
  int n1 = 0, n2 = 0;
  std::vector<Node> frontier;
  std::vector<std::pair<int, int>> edges;  // (u in V1, v in V2)
  auto fresh = [&](Side s) {
    return (s == Side::v1) ? Node{s, n1++} : Node{s, n2++};
  };
  const Node root = fresh(root_side);
  frontier.push_back(root);
  for (int level = 0; level < depth; ++level) {
    std::vector<Node> next;
    for (const Node& x : frontier) {
      const int children =
          (level == 0) ? root_degree : (x.side == Side::v1 ? d1 : d2);
      const Side child_side = (x.side == Side::v1) ? Side::v2 : Side::v1;
      for (int c = 0; c < children; ++c) {
        const Node y = fresh(child_side);
        if (x.side == Side::v1) {
          edges.emplace_back(x.id, y.id);
        } else {
          edges.emplace_back(y.id, x.id);
        }
        next.push_back(y);
      }
    }
    frontier = std::move(next);
  }
  RootedTree t;
  t.graph.n = n1;
  t.graph.m = n2;
  t.graph.weighted = true;  // weights all 1: operator is A/sqrt(d), no background
  std::sort(edges.begin(), edges.end());
  for (const auto& [u, v] : edges) {
    t.graph.eu.push_back(u);
    t.graph.ev.push_back(v);
    t.graph.ew.push_back(1.0);
  }
  t.graph.build_adjacency();
  t.root = (root_side == Side::v1) ? root.id : t.graph.n + root.id;
  return t;
}

// Norm bound for bipartite trees: ||A|| <= sqrt(p_max) + sqrt(q_max) with
// p_max / q_max the maximum V1 / V2 degrees.  Throws NotATree unless the
// graph is connected and acyclic.  The norm is the top singular value of
// the plain 0/1 adjacency, found matrix-free.
struct TreeNormCheck {
  double norm = 0.0;
  double bound = 0.0;
  bool ok = false;
};

inline TreeNormCheck tree_norm_bound_check(const BipartiteGraph& g) {
  const int total = g.n + g.m;
  if (g.num_edges() != total - 1 || !is_connected(g))
    throw NotATree("tree_norm_bound_check: graph is not a tree");
  int pmax = 0, qmax = 0;
  for (int u = 0; u < g.n; ++u) pmax = std::max(pmax, g.off1[u + 1] - g.off1[u]);
  for (int v = 0; v < g.m; ++v) qmax = std::max(qmax, g.off2[v + 1] - g.off2[v]);
  std::vector<double> tmp(g.n);
  auto gram_apply = [&](const double* in, double* out) {
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int e = 0; e < g.num_edges(); ++e) tmp[g.eu[e]] += in[g.ev[e]];
    std::fill(out, out + g.m, 0.0);
    for (int e = 0; e < g.num_edges(); ++e) out[g.ev[e]] += tmp[g.eu[e]];
  };
  LanczosOptions lopt;
  lopt.k = 1;
  const LanczosResult top = lanczos_extreme(gram_apply, g.m, SpectralEnd::largest, lopt);
  TreeNormCheck chk;
  chk.norm = std::sqrt(std::max(0.0, top.values.front()));
  chk.bound = std::sqrt(static_cast<double>(pmax)) + std::sqrt(static_cast<double>(qmax));
  chk.ok = chk.norm <= chk.bound + 1e-9;
  return chk;
}

// ---------------------------------------------------------------------------
// Tridiagonal radial models
// ---------------------------------------------------------------------------

// Z^(i)_r: the (r+1)-dimensional symmetric tridiagonal matrix with zero
// diagonal and couplings (level k to k+1): sqrt(alpha) at k = 0; thereafter
// 1/q at odd k and q at even k for a V2 root (Z^(2)), and the swap for a V1
// root (Z^(1)).  Its extreme eigenvalues converge to +/-Lambda(alpha) as
// r grows.
struct TridiagonalModel {
  double alpha = 0.0;
  double q = 1.0;
  Side side = Side::v2;
  int r = 1;                     // radius; dimension r + 1
  std::vector<double> off;       // r couplings
};

inline TridiagonalModel build_tridiagonal(double alpha, double q, Side side, int r) {
  if (alpha <= 0.0) throw DomainError("build_tridiagonal: alpha must be > 0");
  if (q < 1.0) throw DomainError("build_tridiagonal: q must be >= 1");
  if (r < 1) throw DomainError("build_tridiagonal: r must be >= 1");
  TridiagonalModel z;
  z.alpha = alpha;
  z.q = q;
  z.side = side;
  z.r = r;
  z.off.resize(r);
  z.off[0] = std::sqrt(alpha);
  const double odd_c = (side == Side::v2) ? 1.0 / q : q;
  const double even_c = (side == Side::v2) ? q : 1.0 / q;
  for (int k = 1; k < r; ++k) z.off[k] = (k % 2 == 1) ? odd_c : even_c;
  return z;
}

struct TridiagExtremes {
  double top = 0.0;               // largest eigenvalue
  double bottom = 0.0;            // smallest eigenvalue
  double smallest_positive = kNaN;  // NaN if no eigenvalue exceeds 1e-9
  std::vector<double> all;        // ascending
};

inline TridiagExtremes tridiag_extreme_eigs(const TridiagonalModel& z) {
  const int dim = z.r + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < z.r; ++k) T(k, k + 1) = T(k + 1, k) = z.off[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  TridiagExtremes out;
  out.all.assign(es.eigenvalues().data(), es.eigenvalues().data() + dim);
  out.bottom = out.all.front();
  out.top = out.all.back();
  for (double lam : out.all) {
    if (lam > 1e-9) {
      out.smallest_positive = lam;
      break;
    }
  }
  return out;
}

// Transfer matrix propagating coefficient pairs two levels down the tree:
// T(eta) = [[eta^2 - q^2, -eta/q], [eta/q, -1/q^2]] for a V2 root (q -> 1/q
// for V1); det T = 1, tr T = eta^2 - q^2 - 1/q^2.  Eigenvalues are real iff
// |eta| >= q + 1/q or |eta| <= q - 1/q, i.e. exactly off the open bulk.
inline std::array<double, 4> transfer_matrix(double eta, double q, Side side) {
  const double qq = (side == Side::v2) ? q : 1.0 / q;
  const double q2 = qq * qq;
  return {eta * eta - q2, -eta / qq, eta / qq, -1.0 / q2};
}

// Coefficient profile of the layered approximate eigenvector for location
// Lambda(alpha): u_0 = 1, u_1 = Lambda/sqrt(alpha),
// u_2 = sqrt(alpha)/(q (alpha - q^2)), and both subsequences decay
// geometrically with ratio 1/(alpha - q^2) per two levels (V2 root; V1
// swaps q <-> 1/q).  Returned unnormalized.
inline std::vector<double> tridiag_coefficients(double alpha, double q, Side side, int r) {
  const double qq = (side == Side::v2) ? q : 1.0 / q;
  const double q2 = qq * qq;
  if (alpha <= q2 + 1.0)
    throw DomainError("tridiag_coefficients: alpha must exceed q^2 + 1 on this side");
  const double lambda = (side == Side::v2) ? lambda_q(alpha, q) : lambda_q_inv(alpha, q);
  const double s = alpha - q2;  // decay ratio is 1/s < 1
  std::vector<double> u(r + 1);
  u[0] = 1.0;
  if (r >= 1) u[1] = lambda / std::sqrt(alpha);
  if (r >= 2) u[2] = std::sqrt(alpha) / (qq * s);
  for (int j = 3; j <= r; ++j) u[j] = u[j - 2] / s;
  return u;
}

// ---------------------------------------------------------------------------
// Approximate eigenvectors on the graph
// ---------------------------------------------------------------------------

struct ApproxEigenvector {
  double lambda = 0.0;             // predicted location Lambda(alpha)
  double alpha = 0.0;
  int r = 2;
  std::vector<double> u;           // normalized layer coefficients, u[0] > 0
  std::vector<int> layer_sizes;    // |S_j| for j = 0..r
  std::vector<double> v_plus;      // N-dim, for +Lambda
  std::vector<double> v_minus;     // N-dim, for -Lambda
};

// Layered vector sum_j (+/-1)^j u_j |S_j|^(-1/2) 1_{S_j} around `root`
// (global id).  alpha is taken from the root's actual normalized degree
// unless overridden (alpha_override > 0).  Requires r >= 2, alpha strictly
// above the branch point (DomainError otherwise), and non-empty layers out
// to r (EmptyLayerError otherwise).
inline ApproxEigenvector approx_eigenvector(const BipartiteGraph& g,
                                            const ModelParams& params, int root,
                                            int r, double alpha_override = -1.0) {
  if (r < 2) throw DomainError("approx_eigenvector: r must be >= 2");
  const int total = g.n + g.m;
  if (root < 0 || root >= total) throw DomainError("approx_eigenvector: root out of range");
  const Side side = (root < g.n) ? Side::v1 : Side::v2;
  double alpha = alpha_override;
  if (alpha <= 0.0) {
    double sq = 0.0;
    if (side == Side::v1) {
      for (int s = g.off1[root]; s < g.off1[root + 1]; ++s)
        sq += g.ew[g.eid1[s]] * g.ew[g.eid1[s]];
    } else {
      const int v = root - g.n;
      for (int s = g.off2[v]; s < g.off2[v + 1]; ++s)
        sq += g.ew[g.eid2[s]] * g.ew[g.eid2[s]];
    }
    alpha = sq / params.d;
  }
  const BfsLayers L = bfs_layers(g, root, r);
  if (static_cast<int>(L.layers.size()) < r + 1)
    throw EmptyLayerError("approx_eigenvector: empty BFS layer before radius r");

  ApproxEigenvector ev;
  ev.alpha = alpha;
  ev.r = r;
  ev.u = tridiag_coefficients(alpha, params.q, side, r);  // throws on bad alpha
  ev.lambda = (side == Side::v2) ? lambda_q(alpha, params.q)
                                 : lambda_q_inv(alpha, params.q);
  double norm2 = 0.0;
  for (double c : ev.u) norm2 += c * c;
  const double inv_norm = 1.0 / std::sqrt(norm2);
  for (double& c : ev.u) c *= inv_norm;

  ev.v_plus.assign(total, 0.0);
  ev.v_minus.assign(total, 0.0);
  for (int j = 0; j <= r; ++j) {
    const auto& layer = L.layers[j];
    ev.layer_sizes.push_back(static_cast<int>(layer.size()));
    const double c = ev.u[j] / std::sqrt(static_cast<double>(layer.size()));
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    for (int x : layer) {
      ev.v_plus[x] = c;
      ev.v_minus[x] = sgn * c;
    }
  }
  return ev;
}

// ||H v - lambda v||_2 / ||v||_2 for the operator attached to the graph.
inline double residual(const CenteredOperator& op, const std::vector<double>& v,
                       double lambda) {
  const int total = op.n + op.m;
  if (static_cast<int>(v.size()) != total)
    throw DomainError("residual: vector dimension mismatch");
  std::vector<double> hv(total);
  op.apply_h(v.data(), hv.data());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < total; ++i) {
    const double rterm = hv[i] - lambda * v[i];
    num += rterm * rterm;
    den += v[i] * v[i];
  }
  if (den == 0.0) throw DomainError("residual: zero vector");
  return std::sqrt(num / den);
}

}  // namespace rmtlab
