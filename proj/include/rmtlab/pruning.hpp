// SPDX-License-Identifier: MIT
//
// pruning.hpp -- construction and verification of the pruned graph G^(tau).
//
// Vertices whose normalized degree deviates past the tau thresholds are
// "special"; pruning removes a small set of edges, all incident to special
// vertices, so that in the result (1) special vertices are pairwise far
// apart, (2) each special vertex sees a tree out to distance 2 r*, and
// (3)-(6) quantitative containment and loss bounds hold.  The construction
// has two stages:
//
//   Stage 1: for every special x and neighbor y, look at the radius-r* ball
//   around y in G minus the edge xy; if the subgraph of G induced on that
//   ball is not a tree (this includes the case where x is still reachable,
//   which closes a cycle through xy), remove xy.  Decisions are independent
//   across (x, y) pairs, all judged against the original G.
//
//   Stage 2: in G minus the stage-1 edges, for every ordered pair of special
//   vertices x, y at distance <= 2 r*, remove the first edge of the
//   canonical (smallest-id-parent) BFS path from x to y.  Decisions are
//   unioned over x without intermediate rebuilds.
//
// The verifier re-derives every property from scratch and reports; it never
// repairs a defective pruning.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "localtree.hpp"
#include "theory.hpp"

namespace rmtlab {

// ---------------------------------------------------------------------------
// Special vertices
// ---------------------------------------------------------------------------

// Deviation thresholds: tau1 = q^-2 + 1 + sqrt(xi) on V1,
// tau2+/- = q^2 +/- (1 + sqrt(xi)) on V2, with xi = sqrt(ln d / d).
struct TauTriple {
  double tau1 = 0.0;
  double tau2_plus = 0.0;
  double tau2_minus = 0.0;
  double xi_sqrt = 0.0;
};

inline TauTriple tau_thresholds(const ModelParams& params) {
  TauTriple t;
  t.xi_sqrt = std::sqrt(error_parameter(params.d));
  const double q2 = params.q * params.q;
  t.tau1 = 1.0 / q2 + 1.0 + t.xi_sqrt;
  t.tau2_plus = q2 + 1.0 + t.xi_sqrt;
  t.tau2_minus = q2 - 1.0 - t.xi_sqrt;
  return t;
}

struct SpecialVertices {
  TauTriple tau;
  std::vector<int> v1_high;  // V1 indices with alpha >= tau1
  std::vector<int> v2_high;  // V2 indices with alpha >= tau2_plus
  std::vector<int> v2_low;   // V2 indices with alpha <= tau2_minus
  std::vector<int> global;   // all of the above as global ids, ascending
};

// All comparisons are inclusive.
inline SpecialVertices special_vertices(const DegreeProfile& prof,
                                        const ModelParams& params) {
  SpecialVertices sv;
  sv.tau = tau_thresholds(params);
  for (int u = 0; u < static_cast<int>(prof.alpha1.size()); ++u)
    if (prof.alpha1[u] >= sv.tau.tau1) sv.v1_high.push_back(u);
  for (int v = 0; v < static_cast<int>(prof.alpha2.size()); ++v) {
    if (prof.alpha2[v] >= sv.tau.tau2_plus) sv.v2_high.push_back(v);
    if (prof.alpha2[v] <= sv.tau.tau2_minus) sv.v2_low.push_back(v);
  }
  const int n = static_cast<int>(prof.alpha1.size());
  for (int u : sv.v1_high) sv.global.push_back(u);
  for (int v : sv.v2_high) sv.global.push_back(n + v);
  for (int v : sv.v2_low) sv.global.push_back(n + v);
  std::sort(sv.global.begin(), sv.global.end());
  sv.global.erase(std::unique(sv.global.begin(), sv.global.end()), sv.global.end());
  return sv;
}

// ---------------------------------------------------------------------------
// Internal BFS helpers on global ids with an edge mask
// ---------------------------------------------------------------------------

namespace detail {

// Visit neighbors of global vertex x; f(global neighbor, original edge id).
template <typename F>
inline void for_neighbors(const BipartiteGraph& g, int x, F&& f) {
  if (x < g.n) {
    for (int s = g.off1[x]; s < g.off1[x + 1]; ++s) f(g.n + g.adj1[s], g.eid1[s]);
  } else {
    const int v = x - g.n;
    for (int s = g.off2[v]; s < g.off2[v + 1]; ++s) f(g.adj2[s], g.eid2[s]);
  }
}

// BFS ball of radius rmax around root, skipping `skip_eid` (or -1) and any
// edge with mask[eid] != 0 (mask may be null).  dist is an N-sized scratch
// initialized to -1; it is restored before returning.  Parents are canonical
// because adjacency lists and layers are scanned in ascending order.
struct Ball {
  std::vector<int> verts;  // in BFS order (root first)
  std::vector<int> depth;  // aligned with verts
  std::vector<int> parent; // aligned with verts; -1 at root
};

inline Ball ball_bfs(const BipartiteGraph& g, int root, int rmax,
                     const std::vector<char>* mask, int skip_eid,
                     std::vector<int>& dist) {
  Ball ball;
  ball.verts.push_back(root);
  ball.depth.push_back(0);
  ball.parent.push_back(-1);
  dist[root] = 0;
  std::size_t head = 0;
  while (head < ball.verts.size()) {
    const int x = ball.verts[head];
    const int dx = ball.depth[head];
    ++head;
    if (dx == rmax) continue;
    for_neighbors(g, x, [&](int y, int eid) {
      if (eid == skip_eid || (mask && (*mask)[eid])) return;
      if (dist[y] == -1) {
        dist[y] = dx + 1;
        ball.verts.push_back(y);
        ball.depth.push_back(dx + 1);
        ball.parent.push_back(x);
      }
    });
  }
  for (int v : ball.verts) dist[v] = -1;
  return ball;
}

// Number of edges of g induced on the vertex set of the ball (mask ignored:
// this counts edges of the *original* graph, which is what the stage-1 tree
// test needs).
inline int induced_edge_count(const BipartiteGraph& g, const Ball& ball,
                              std::vector<char>& in_set) {
  for (int v : ball.verts) in_set[v] = 1;
  int twice = 0;
  for (int v : ball.verts)
    for_neighbors(g, v, [&](int y, int) {
      if (in_set[y]) ++twice;
    });
  for (int v : ball.verts) in_set[v] = 0;
  return twice / 2;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pruning
// ---------------------------------------------------------------------------

struct RemovedEdge {
  int eid = -1;        // edge id in the ORIGINAL graph
  int u = -1, v = -1;  // V1 / V2 endpoints
  int stage = 0;       // 1 or 2
  int anchor = -1;     // global id of the special vertex that triggered it
};

struct PrunedGraph {
  BipartiteGraph graph;  // G^(tau)
  std::vector<RemovedEdge> removed;
  SpecialVertices special;  // computed on the original graph
  Radius r_star;
  std::uint64_t parent_fingerprint = 0;
};

// Prune g.  If `frozen` is non-null its special set is used instead of being
// recomputed from the degree profile (this is what makes pruning idempotent:
// re-pruning G^(tau) with the same special set removes nothing).
inline PrunedGraph prune(const BipartiteGraph& g, const ModelParams& params,
                         const SpecialVertices* frozen = nullptr) {
  PrunedGraph out;
  out.parent_fingerprint = graph_hash(g);
  out.r_star = pruning_radius(params.d, params.q);
  const int r = out.r_star.effective;
  if (frozen) {
    out.special = *frozen;
  } else {
    const DegreeProfile prof = degree_profile(g, params);
    out.special = special_vertices(prof, params);
  }

  const int E = g.num_edges();
  const int total = g.n + g.m;
  std::vector<char> stage1(E, 0), stage2(E, 0);
  std::vector<int> anchor(E, -1);
  std::vector<int> dist(total, -1);
  std::vector<char> in_set(total, 0);

  // Stage 1: cycle-detecting ball test per (special, neighbor) pair.
  for (int x : out.special.global) {
    detail::for_neighbors(g, x, [&](int y, int eid) {
      if (stage1[eid]) return;  // already condemned via the other endpoint
      const detail::Ball ball = detail::ball_bfs(g, y, r, nullptr, eid, dist);
      const int edges = detail::induced_edge_count(g, ball, in_set);
      if (edges != static_cast<int>(ball.verts.size()) - 1) {
        stage1[eid] = 1;
        anchor[eid] = x;
      }
    });
  }

  // Stage 2: separate special pairs that remain within 2 r* of each other.
  for (int x : out.special.global) {
    const detail::Ball ball = detail::ball_bfs(g, x, 2 * r, &stage1, -1, dist);
    // Position of each ball vertex for parent walking.
    std::vector<int> pos(total, -1);
    for (std::size_t i = 0; i < ball.verts.size(); ++i) pos[ball.verts[i]] = static_cast<int>(i);
    for (int y : out.special.global) {
      if (y == x || pos[y] == -1) continue;
      // Walk the canonical path from y up to the child of x.
      int cur = y;
      while (ball.parent[pos[cur]] != x) cur = ball.parent[pos[cur]];
      const int z = cur;
      // Locate the edge id of (x, z).
      int found = -1;
      detail::for_neighbors(g, x, [&](int nb, int eid) {
        if (nb == z && found == -1 && !stage1[eid]) found = eid;
      });
      if (found >= 0 && !stage2[found]) {
        stage2[found] = 1;
        if (anchor[found] == -1) anchor[found] = x;
      }
    }
  }

  // Assemble G^(tau) and the removal records.
  out.graph.n = g.n;
  out.graph.m = g.m;
  out.graph.weighted = g.weighted;
  for (int e = 0; e < E; ++e) {
    if (stage1[e] || stage2[e]) {
      RemovedEdge rec;
      rec.eid = e;
      rec.u = g.eu[e];
      rec.v = g.ev[e];
      rec.stage = stage1[e] ? 1 : 2;
      rec.anchor = anchor[e];
      out.removed.push_back(rec);
    } else {
      out.graph.eu.push_back(g.eu[e]);
      out.graph.ev.push_back(g.ev[e]);
      out.graph.ew.push_back(g.ew[e]);
    }
  }
  out.graph.build_adjacency();
  return out;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

// Rate functions controlling how unlikely each deviation class is:
// h_q(tau) = q^2 h(|tau - q^2| / (2 q^2)) for V2 thresholds and the q -> 1/q
// analogue on V1, with h the Bennett rate.
inline double deviation_rate_v2(double tau, double q) {
  const double q2 = q * q;
  return q2 * bennett_rate(std::abs(tau - q2) / (2.0 * q2));
}

inline double deviation_rate_v1(double tau, double q) {
  const double qi2 = 1.0 / (q * q);
  return qi2 * bennett_rate(std::abs(tau - qi2) / (2.0 * qi2));
}

// Depth to which layer growth stays controlled for a deviation class:
// r_q(tau) = d/(2 ln d) * h_q(tau) - 1.
inline double controlled_depth(double rate, double d) {
  if (d <= 1.0) throw DomainError("controlled_depth: d must be > 1");
  return d / (2.0 * std::log(d)) * rate - 1.0;
}

struct PropertyResult {
  bool ok = true;
  int checked = 0;     // number of assertions evaluated (0 = vacuous)
  int failures = 0;
  double worst = 0.0;  // property-specific worst margin (see notes)
  std::string note;
};

struct PruningVerification {
  PropertyResult separation;        // (1) special pairs >= 2 r* + 1 apart
  PropertyResult tree_balls;        // (2) B_{2r*}(x) is a tree
  PropertyResult incidence;         // (3) removals touch special vertices
  PropertyResult layer_containment; // (4) layers nest; interior edges intact
  PropertyResult removed_degree;    // (5) per-vertex removal bound
  PropertyResult layer_loss;        // (6) |S_j lost| <= C D_x^rem d^(j-1)
  double C = 10.0;
  bool all_ok() const {
    return separation.ok && tree_balls.ok && incidence.ok &&
           layer_containment.ok && removed_degree.ok && layer_loss.ok;
  }
};

// Re-derive all six pruning properties of (original, pruned).  Throws
// MismatchError if `pruned` does not descend from `original`.
inline PruningVerification verify_pruned(const BipartiteGraph& original,
                                         const PrunedGraph& pruned,
                                         const ModelParams& params,
                                         double C = 10.0) {
  if (graph_hash(original) != pruned.parent_fingerprint)
    throw MismatchError("verify_pruned: pruned graph descends from a different graph");
  PruningVerification ver;
  ver.C = C;
  const BipartiteGraph& gt = pruned.graph;
  const std::vector<int>& specials = pruned.special.global;
  const int r = pruned.r_star.effective;
  const int total = original.n + original.m;
  std::vector<int> dist(total, -1);
  std::vector<char> in_set(total, 0);

  // (1) pairwise separation in G^(tau).
  {
    std::vector<char> is_special(total, 0);
    for (int s : specials) is_special[s] = 1;
    for (int x : specials) {
      const detail::Ball ball = detail::ball_bfs(gt, x, 2 * r, nullptr, -1, dist);
      for (std::size_t i = 1; i < ball.verts.size(); ++i) {
        ++ver.separation.checked;
        if (is_special[ball.verts[i]]) {
          ver.separation.ok = false;
          ++ver.separation.failures;
          ver.separation.worst =
              std::max(ver.separation.worst,
                       static_cast<double>(2 * r + 1 - ball.depth[i]));
        }
      }
    }
    if (specials.size() < 2) ver.separation.note = "fewer than two special vertices";
  }

  // (2) tree balls around special vertices in G^(tau).
  for (int x : specials) {
    const detail::Ball ball = detail::ball_bfs(gt, x, 2 * r, nullptr, -1, dist);
    const int edges = detail::induced_edge_count(gt, ball, in_set);
    ++ver.tree_balls.checked;
    const int excess = edges - (static_cast<int>(ball.verts.size()) - 1);
    if (excess != 0) {
      ver.tree_balls.ok = false;
      ++ver.tree_balls.failures;
      ver.tree_balls.worst = std::max(ver.tree_balls.worst, static_cast<double>(excess));
    }
  }

  // (3) every removed edge is incident to a special vertex.
  {
    std::vector<char> is_special(total, 0);
    for (int s : specials) is_special[s] = 1;
    for (const RemovedEdge& re : pruned.removed) {
      ++ver.incidence.checked;
      if (!is_special[re.u] && !is_special[original.n + re.v]) {
        ver.incidence.ok = false;
        ++ver.incidence.failures;
      }
    }
  }

  // (4) layer containment and intact interior edges out to r*.
  for (int x : specials) {
    const detail::Ball bg = detail::ball_bfs(original, x, r, nullptr, -1, dist);
    const detail::Ball bt = detail::ball_bfs(gt, x, r, nullptr, -1, dist);
    std::vector<std::set<int>> Sg(r + 1), St(r + 1);
    for (std::size_t i = 0; i < bg.verts.size(); ++i) Sg[bg.depth[i]].insert(bg.verts[i]);
    for (std::size_t i = 0; i < bt.verts.size(); ++i) St[bt.depth[i]].insert(bt.verts[i]);
    for (int j = 1; j <= r; ++j) {
      ++ver.layer_containment.checked;
      bool contained = true;
      for (int v : St[j])
        if (!Sg[j].count(v)) contained = false;
      if (!contained) {
        ver.layer_containment.ok = false;
        ++ver.layer_containment.failures;
        continue;
      }
    }
    // Interior edges: for y in the pruned ball minus x, its pruned neighbors
    // inside layer j must equal its original neighbors inside the original
    // layer j.
    for (std::size_t i = 1; i < bt.verts.size(); ++i) {
      const int y = bt.verts[i];
      for (int j = 1; j <= r; ++j) {
        std::set<int> nt, ng;
        detail::for_neighbors(gt, y, [&](int w, int) {
          if (St[j].count(w)) nt.insert(w);
        });
        detail::for_neighbors(original, y, [&](int w, int) {
          if (Sg[j].count(w)) ng.insert(w);
        });
        ++ver.layer_containment.checked;
        if (nt != ng) {
          ver.layer_containment.ok = false;
          ++ver.layer_containment.failures;
        }
      }
    }
  }

  // (5) removed-degree bound over ALL vertices.
  {
    std::vector<int> removed_deg(total, 0);
    for (const RemovedEdge& re : pruned.removed) {
      ++removed_deg[re.u];
      ++removed_deg[original.n + re.v];
    }
    const double rate_min =
        std::min({deviation_rate_v1(pruned.special.tau.tau1, params.q),
                  deviation_rate_v2(pruned.special.tau.tau2_minus, params.q),
                  deviation_rate_v2(pruned.special.tau.tau2_plus, params.q)});
    const double lnN = std::log(static_cast<double>(params.N));
    const double bound =
        (rate_min > 0.0)
            ? C * (1.0 + (lnN / params.d) / rate_min)
            : std::numeric_limits<double>::infinity();
    for (int x = 0; x < total; ++x) {
      ++ver.removed_degree.checked;
      if (removed_deg[x] > bound) {
        ver.removed_degree.ok = false;
        ++ver.removed_degree.failures;
        ver.removed_degree.worst = std::max(ver.removed_degree.worst,
                                            removed_deg[x] - bound);
      }
    }
    ver.removed_degree.note = "bound " + std::to_string(bound);
  }

  // (6) layer-loss bound at special vertices for j in [2, r*].
  {
    std::vector<int> removed_deg(total, 0);
    for (const RemovedEdge& re : pruned.removed) {
      ++removed_deg[re.u];
      ++removed_deg[original.n + re.v];
    }
    for (int x : specials) {
      const detail::Ball bg = detail::ball_bfs(original, x, r, nullptr, -1, dist);
      const detail::Ball bt = detail::ball_bfs(gt, x, r, nullptr, -1, dist);
      std::vector<std::set<int>> Sg(r + 1), St(r + 1);
      for (std::size_t i = 0; i < bg.verts.size(); ++i) Sg[bg.depth[i]].insert(bg.verts[i]);
      for (std::size_t i = 0; i < bt.verts.size(); ++i) St[bt.depth[i]].insert(bt.verts[i]);
      for (int j = 2; j <= r; ++j) {
        int lost = 0;
        for (int v : Sg[j])
          if (!St[j].count(v)) ++lost;
        const double bound =
            C * removed_deg[x] * std::pow(params.d, j - 1);
        ++ver.layer_loss.checked;
        if (lost > bound) {
          ver.layer_loss.ok = false;
          ++ver.layer_loss.failures;
          ver.layer_loss.worst = std::max(ver.layer_loss.worst, lost - bound);
        }
      }
    }
    if (r < 2) ver.layer_loss.note = "vacuous: r* < 2";
  }

  return ver;
}

}  // namespace rmtlab
