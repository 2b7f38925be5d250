// SPDX-License-Identifier: MIT
//
// graph.hpp -- the sparse bipartite random graph model: parameter derivation,
// Bernoulli(p) edge sampling with optional centered bounded weights, degree
// profiles, connectivity, planted heavy columns, and a plain-text edge-list
// serialization.
//
// Vertex indexing.  V1 vertices are 0..n-1 and V2 vertices 0..m-1, each
// 0-based within its own side.  Where a single index space is needed (BFS,
// connectivity) the "global" id of a V2 vertex x is n + x.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace rmtlab {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

// Edge-weight law.  Weights are i.i.d., mean 0, variance 1, bounded by K:
// rademacher is +/-1 (K = 1), uniform_sym is uniform on [-sqrt(3), sqrt(3)]
// (K = sqrt(3)).  `none` is the unweighted 0/1 model.
enum class WeightDistribution { none, rademacher, uniform_sym };

inline const char* weight_name(WeightDistribution w) {
  switch (w) {
    case WeightDistribution::none: return "none";
    case WeightDistribution::rademacher: return "rademacher";
    case WeightDistribution::uniform_sym: return "uniform_sym";
  }
  return "none";
}

inline WeightDistribution weight_from_name(const std::string& s) {
  if (s == "none") return WeightDistribution::none;
  if (s == "rademacher") return WeightDistribution::rademacher;
  if (s == "uniform_sym") return WeightDistribution::uniform_sym;
  throw ParseError("unknown weight distribution: " + s);
}

// Model parameters.  Inputs are (gamma, b, m, weights); everything else is
// derived: n = floor(gamma m), N = n + m, q = gamma^(1/4), d = b ln N,
// p = d / sqrt(mn).
struct ModelParams {
  double gamma = 1.0;
  double b = 1.0;
  int m = 2;
  WeightDistribution weights = WeightDistribution::none;

  int n = 2;
  int N = 4;
  double q = 1.0;
  double d = 1.0;
  double p = 0.0;
};

inline ModelParams make_params(double gamma, double b, int m,
                               WeightDistribution weights = WeightDistribution::none) {
  if (gamma < 1.0) throw DomainError("make_params: gamma must be >= 1");
  if (m < 2) throw DomainError("make_params: m must be >= 2");
  if (b <= 0.0) throw DomainError("make_params: b must be > 0");
  ModelParams P;
  P.gamma = gamma;
  P.b = b;
  P.m = m;
  P.weights = weights;
  P.n = static_cast<int>(std::floor(gamma * m));
  P.N = P.n + P.m;
  P.q = std::pow(gamma, 0.25);
  P.d = b * std::log(static_cast<double>(P.N));
  P.p = P.d / std::sqrt(static_cast<double>(P.m) * static_cast<double>(P.n));
  if (P.p > 1.0) throw DomainError("make_params: edge probability p exceeds 1");
  return P;
}

// ---------------------------------------------------------------------------
// Graph structure
// ---------------------------------------------------------------------------

struct BipartiteGraph {
  int n = 0;             // |V1|
  int m = 0;             // |V2|
  bool weighted = false;

  // Edge list sorted by (u, v); ew is all-ones when unweighted.
  std::vector<int> eu, ev;
  std::vector<double> ew;

  // CSR adjacency per side, storing edge ids into eu/ev/ew.
  std::vector<int> off1, adj1, eid1;  // off1[u]..off1[u+1): V2 neighbors of u
  std::vector<int> off2, adj2, eid2;  // off2[v]..off2[v+1): V1 neighbors of v

  int num_edges() const { return static_cast<int>(eu.size()); }
  int num_vertices() const { return n + m; }

  // Rebuild the CSR arrays from the edge list (call after any edit).
  void build_adjacency() {
    off1.assign(n + 1, 0);
    off2.assign(m + 1, 0);
    for (std::size_t e = 0; e < eu.size(); ++e) {
      ++off1[eu[e] + 1];
      ++off2[ev[e] + 1];
    }
    for (int u = 0; u < n; ++u) off1[u + 1] += off1[u];
    for (int v = 0; v < m; ++v) off2[v + 1] += off2[v];
    adj1.resize(eu.size());
    eid1.resize(eu.size());
    adj2.resize(eu.size());
    eid2.resize(eu.size());
    std::vector<int> c1(off1.begin(), off1.end() - 1);
    std::vector<int> c2(off2.begin(), off2.end() - 1);
    for (std::size_t e = 0; e < eu.size(); ++e) {
      const int s1 = c1[eu[e]]++;
      adj1[s1] = ev[e];
      eid1[s1] = static_cast<int>(e);
      const int s2 = c2[ev[e]]++;
      adj2[s2] = eu[e];
      eid2[s2] = static_cast<int>(e);
    }
  }
};

// Structural fingerprint (FNV-1a over sizes, endpoints, and weight bits);
// used to detect mismatched graph/spectrum pairs before analysis.
inline std::uint64_t graph_hash(const BipartiteGraph& g) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(g.n));
  mix(static_cast<std::uint64_t>(g.m));
  mix(g.weighted ? 1 : 0);
  for (int e = 0; e < g.num_edges(); ++e) {
    mix(static_cast<std::uint64_t>(g.eu[e]));
    mix(static_cast<std::uint64_t>(g.ev[e]));
    std::uint64_t bits;
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::memcpy(&bits, &g.ew[e], 8);
    mix(bits);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

// Draw one weight according to the distribution; `none` yields 1.
inline double draw_weight(WeightDistribution w, SplitMix64& rng) {
  switch (w) {
    case WeightDistribution::none: return 1.0;
    case WeightDistribution::rademacher: return rng.next_sign();
    case WeightDistribution::uniform_sym: {
      constexpr double k = 1.7320508075688772;  // sqrt(3)
      return rng.next_symmetric() * k;
    }
  }
  return 1.0;
}

}  // namespace detail

// Stream indices: topology and weights come from independent derived
// streams, so the sampled edge set depends only on (params, seed) and is
// identical across weight distributions.
namespace stream {
constexpr std::uint64_t kSampleSkips = 0;
constexpr std::uint64_t kPlantPicks = 1;
constexpr std::uint64_t kSampleWeights = 2;
constexpr std::uint64_t kPlantWeights = 3;
}  // namespace stream

// Sample G(n, m, p): each of the n*m pairs is an edge independently with
// probability p.  Uses geometric skips (one log per edge, not per pair), so
// the cost is O(#edges) regardless of n*m.  Weights are drawn from their own
// stream, one per accepted edge, which keeps the edge set invariant when
// only the weight law changes.
inline BipartiteGraph sample_graph(const ModelParams& params, std::uint64_t seed) {
  BipartiteGraph g;
  g.n = params.n;
  g.m = params.m;
  g.weighted = params.weights != WeightDistribution::none;
  SplitMix64 rng(derive_stream(seed, stream::kSampleSkips));
  SplitMix64 wrng(derive_stream(seed, stream::kSampleWeights));
  const double p = params.p;
  const std::uint64_t total =
      static_cast<std::uint64_t>(g.n) * static_cast<std::uint64_t>(g.m);
  if (p >= 1.0) {
    for (std::uint64_t k = 0; k < total; ++k) {
      g.eu.push_back(static_cast<int>(k / g.m));
      g.ev.push_back(static_cast<int>(k % g.m));
      g.ew.push_back(detail::draw_weight(params.weights, wrng));
    }
  } else if (p > 0.0) {
    const double log1mp = std::log1p(-p);
    std::uint64_t k = 0;
    while (true) {
      const double u = rng.next_double();
      // Skip a Geometric(p) number of misses; u == 0 cannot occur
      // (next_double is in [0,1) with the zero mantissa mapping to 0,
      // and log1p(-0)/log1mp = 0 -> no skip), so guard only the overflow.
      const double skip = std::floor(std::log1p(-u) / log1mp);
      if (skip >= static_cast<double>(total - k)) break;
      k += static_cast<std::uint64_t>(skip);
      g.eu.push_back(static_cast<int>(k / g.m));
      g.ev.push_back(static_cast<int>(k % g.m));
      g.ew.push_back(detail::draw_weight(params.weights, wrng));
      if (++k >= total) break;
    }
  }
  g.build_adjacency();
  return g;
}

// Replace the V2 column `target` with exactly round(alpha_star * d) distinct
// uniform V1 neighbors (partial Fisher-Yates over 0..n-1), drawn from a
// stream independent of the edge-sampling stream.  Weighted models redraw
// the planted weights too.  Used to study outlier emergence at a controlled
// normalized degree.
inline BipartiteGraph plant_heavy_column(const BipartiteGraph& graph,
                                         const ModelParams& params,
                                         double alpha_star, int target,
                                         std::uint64_t seed) {
  if (target < 0 || target >= graph.m)
    throw DomainError("plant_heavy_column: target column out of range");
  const int degree = static_cast<int>(std::llround(alpha_star * params.d));
  if (degree < 0 || degree > graph.n)
    throw DomainError("plant_heavy_column: alpha_star * d outside [0, n]");
  BipartiteGraph g;
  g.n = graph.n;
  g.m = graph.m;
  g.weighted = graph.weighted;
  for (int e = 0; e < graph.num_edges(); ++e) {
    if (graph.ev[e] == target) continue;
    g.eu.push_back(graph.eu[e]);
    g.ev.push_back(graph.ev[e]);
    g.ew.push_back(graph.ew[e]);
  }
  SplitMix64 rng(derive_stream(seed, stream::kPlantPicks));
  SplitMix64 wrng(derive_stream(seed, stream::kPlantWeights));
  std::vector<int> pool(g.n);
  for (int i = 0; i < g.n; ++i) pool[i] = i;
  std::vector<int> picked;
  picked.reserve(degree);
  for (int i = 0; i < degree; ++i) {
    const std::uint64_t j = i + rng.next_below(static_cast<std::uint64_t>(g.n - i));
    std::swap(pool[i], pool[j]);
    picked.push_back(pool[i]);
  }
  std::sort(picked.begin(), picked.end());
  for (int u : picked) {
    g.eu.push_back(u);
    g.ev.push_back(target);
    g.ew.push_back(detail::draw_weight(params.weights, wrng));
  }
  // Restore (u, v) edge-list order.
  std::vector<int> order(g.eu.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int bidx) {
    return std::pair(g.eu[a], g.ev[a]) < std::pair(g.eu[bidx], g.ev[bidx]);
  });
  BipartiteGraph out;
  out.n = g.n;
  out.m = g.m;
  out.weighted = g.weighted;
  for (int i : order) {
    out.eu.push_back(g.eu[i]);
    out.ev.push_back(g.ev[i]);
    out.ew.push_back(g.ew[i]);
  }
  out.build_adjacency();
  return out;
}

// ---------------------------------------------------------------------------
// Degree profile
// ---------------------------------------------------------------------------

// Per-vertex degrees and normalized degrees alpha_x = (sum of w^2 over
// incident edges) / d.  For the unweighted and Rademacher models w^2 = 1, so
// alpha_x = D_x / d exactly.
struct DegreeProfile {
  std::vector<int> degree1, degree2;      // plain degrees
  std::vector<double> alpha1, alpha2;     // normalized (weighted) degrees
  int max_degree = 0;                     // over all N vertices
  double max_alpha1 = 0.0, max_alpha2 = 0.0;
};

inline DegreeProfile degree_profile(const BipartiteGraph& g, const ModelParams& params) {
  DegreeProfile prof;
  prof.degree1.assign(g.n, 0);
  prof.degree2.assign(g.m, 0);
  prof.alpha1.assign(g.n, 0.0);
  prof.alpha2.assign(g.m, 0.0);
  for (int e = 0; e < g.num_edges(); ++e) {
    const double w2 = g.ew[e] * g.ew[e];
    ++prof.degree1[g.eu[e]];
    ++prof.degree2[g.ev[e]];
    prof.alpha1[g.eu[e]] += w2;
    prof.alpha2[g.ev[e]] += w2;
  }
  for (int u = 0; u < g.n; ++u) {
    prof.alpha1[u] /= params.d;
    prof.max_degree = std::max(prof.max_degree, prof.degree1[u]);
    prof.max_alpha1 = std::max(prof.max_alpha1, prof.alpha1[u]);
  }
  for (int v = 0; v < g.m; ++v) {
    prof.alpha2[v] /= params.d;
    prof.max_degree = std::max(prof.max_degree, prof.degree2[v]);
    prof.max_alpha2 = std::max(prof.max_alpha2, prof.alpha2[v]);
  }
  return prof;
}

// BFS from global vertex 0; true iff every vertex is reached.  A graph with
// an isolated vertex is disconnected by this definition.
inline bool is_connected(const BipartiteGraph& g) {
  const int total = g.n + g.m;
  if (total == 0) return true;
  std::vector<char> seen(total, 0);
  std::vector<int> queue = {0};
  seen[0] = 1;
  int reached = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int x = queue[head];
    if (x < g.n) {
      for (int s = g.off1[x]; s < g.off1[x + 1]; ++s) {
        const int y = g.n + g.adj1[s];
        if (!seen[y]) {
          seen[y] = 1;
          ++reached;
          queue.push_back(y);
        }
      }
    } else {
      const int v = x - g.n;
      for (int s = g.off2[v]; s < g.off2[v + 1]; ++s) {
        const int y = g.adj2[s];
        if (!seen[y]) {
          seen[y] = 1;
          ++reached;
          queue.push_back(y);
        }
      }
    }
  }
  return reached == total;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

// Format: one header line "n m weighted" (weighted is 0 or 1), then one line
// per edge "u v" (unweighted) or "u v w" (weighted), u in V1, v in V2,
// both 0-based.  Weights round-trip exactly via %.17g.
inline void write_graph(std::ostream& os, const BipartiteGraph& g) {
  os << g.n << ' ' << g.m << ' ' << (g.weighted ? 1 : 0) << '\n';
  char buf[64];
  for (int e = 0; e < g.num_edges(); ++e) {
    if (g.weighted) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g", g.eu[e], g.ev[e], g.ew[e]);
    } else {
      std::snprintf(buf, sizeof buf, "%d %d", g.eu[e], g.ev[e]);
    }
    os << buf << '\n';
  }
}

inline void write_graph_file(const std::string& path, const BipartiteGraph& g) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open for writing: " + path);
  write_graph(os, g);
}

inline BipartiteGraph read_graph(std::istream& is) {
  BipartiteGraph g;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("graph file: missing header");
  {
    std::istringstream hs(line);
    int wflag = -1;
    if (!(hs >> g.n >> g.m >> wflag) || (wflag != 0 && wflag != 1))
      throw ParseError("graph file: malformed header '" + line + "'");
    if (g.n < 0 || g.m < 0) throw ParseError("graph file: negative dimensions");
    g.weighted = wflag == 1;
  }
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int u = -1, v = -1;
    double w = 1.0;
    if (!(ls >> u >> v) || (g.weighted && !(ls >> w)))
      throw ParseError("graph file: malformed edge at line " + std::to_string(lineno));
    std::string rest;
    if (ls >> rest)
      throw ParseError("graph file: trailing tokens at line " + std::to_string(lineno));
    if (u < 0 || u >= g.n || v < 0 || v >= g.m)
      throw ParseError("graph file: endpoint out of range at line " + std::to_string(lineno));
    g.eu.push_back(u);
    g.ev.push_back(v);
    g.ew.push_back(w);
  }
  g.build_adjacency();
  return g;
}

inline BipartiteGraph read_graph_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open for reading: " + path);
  return read_graph(is);
}

}  // namespace rmtlab
