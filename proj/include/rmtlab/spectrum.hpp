// SPDX-License-Identifier: MIT
//
// spectrum.hpp -- singular values of the centered operator and comparison of
// the empirical singular-value distribution against the limiting law.
//
// Route selection: instances with m <= dense_limit go through the dense
// m x m Gram matrix (full spectrum); larger ones use Lanczos on the
// matrix-free Gram apply and resolve only the extreme singular values.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "operators.hpp"
#include "solvers.hpp"
#include "theory.hpp"

namespace rmtlab {

struct SolveOptions {
  int dense_limit = 2500;  // largest m solved via the dense Gram matrix
  LanczosOptions lanczos;  // options for the matrix-free path
  bool want_smallest = true;  // also resolve the low end on the Lanczos path
};

struct SpectralReport {
  int n = 0, m = 0;
  std::uint64_t graph_fingerprint = 0;
  bool dense = false;
  bool converged = true;          // Lanczos convergence (true on dense path)
  double lanczos_residual = 0.0;  // worst Ritz residual bound (Gram scale)

  // Descending singular values of X: all m of them on the dense path,
  // otherwise the resolved top end only.
  std::vector<double> sigma;
  // Ascending smallest singular values (Lanczos path only; empty if dense --
  // use sigma.back() etc. instead).
  std::vector<double> sigma_bottom;

  double largest() const { return sigma.empty() ? kNaN : sigma.front(); }
  double smallest() const {
    if (dense) return sigma.empty() ? kNaN : sigma.back();
    return sigma_bottom.empty() ? kNaN : sigma_bottom.front();
  }
};

inline SpectralReport singular_values(const CenteredOperator& op,
                                      const SolveOptions& opts = {}) {
  SpectralReport rep;
  rep.n = op.n;
  rep.m = op.m;
  rep.graph_fingerprint = graph_hash(*op.graph);
  if (op.m <= opts.dense_limit) {
    rep.dense = true;
    const Eigen::MatrixXd G = gram_dense(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = es.eigenvalues();  // ascending
    rep.sigma.resize(op.m);
    for (int i = 0; i < op.m; ++i) {
      const double l = lam[op.m - 1 - i];
      rep.sigma[i] = std::sqrt(l > 0.0 ? l : 0.0);
    }
    return rep;
  }
  std::vector<double> scratch;
  auto gram_apply = [&](const double* in, double* out) {
    op.apply_gram(in, out, scratch);
  };
  const LanczosResult top =
      lanczos_extreme(gram_apply, op.m, SpectralEnd::largest, opts.lanczos);
  rep.converged = top.converged;
  rep.lanczos_residual = top.residual;
  for (double th : top.values) rep.sigma.push_back(std::sqrt(th > 0.0 ? th : 0.0));
  if (opts.want_smallest) {
    LanczosOptions lo = opts.lanczos;
    lo.seed ^= 0x9e3779b97f4a7c15ULL;
    const LanczosResult bot = lanczos_extreme(gram_apply, op.m, SpectralEnd::smallest, lo);
    rep.converged = rep.converged && bot.converged;
    rep.lanczos_residual = std::max(rep.lanczos_residual, bot.residual);
    for (double th : bot.values)
      rep.sigma_bottom.push_back(std::sqrt(th > 0.0 ? th : 0.0));
  }
  return rep;
}

// Full eigenvalue list of H = [[0, X], [X^T, 0]] implied by the singular
// values: {sigma_i} U {0 with multiplicity n - m} U {-sigma_i}, descending.
// Requires the full spectrum (dense path).
inline std::vector<double> h_eigenvalues(const SpectralReport& rep) {
  if (!rep.dense)
    throw PreconditionFailed("h_eigenvalues: full spectrum requires the dense path");
  std::vector<double> eig;
  eig.reserve(rep.n + rep.m);
  for (double s : rep.sigma) eig.push_back(s);
  for (int i = 0; i < rep.n - rep.m; ++i) eig.push_back(0.0);
  for (auto it = rep.sigma.rbegin(); it != rep.sigma.rend(); ++it) eig.push_back(-*it);
  return eig;
}

// Kolmogorov-Smirnov distance between the empirical distribution of `sigma`
// and the limiting singular-value law at aspect parameter q.
inline double esd_distance(std::vector<double> sigma, double q) {
  if (sigma.empty()) throw DomainError("esd_distance: empty sample");
  std::sort(sigma.begin(), sigma.end());
  const double inv = 1.0 / static_cast<double>(sigma.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double F = mp_cdf(sigma[i], q);
    dist = std::max(dist, std::max(std::abs((i + 1.0) * inv - F),
                                   std::abs(static_cast<double>(i) * inv - F)));
  }
  return dist;
}

inline double esd_distance(const SpectralReport& rep, double q) {
  if (!rep.dense)
    throw PreconditionFailed("esd_distance: full spectrum requires the dense path");
  return esd_distance(rep.sigma, q);
}

// ---------------------------------------------------------------------------
// Loewner-order sandwich checks
// ---------------------------------------------------------------------------

// The operator is squeezed between two degree-diagonal comparisons; both
// margins should be small once d = b ln N is moderately large.  C is a free
// comparison constant recorded alongside the result.
struct LoewnerReport {
  double margin = 0.0;  // signed; see each check for its orientation
  double bound = 0.0;
  bool ok = false;
  bool converged = true;  // extreme-eigenvalue iteration converged
  double C = 10.0;
};

// Upper check: lambda_max(H - I - D/d) <= C d^(-3/2) (Delta + d), with D the
// diagonal of plain degrees over all N vertices and Delta their maximum.
inline LoewnerReport loewner_upper_check(const CenteredOperator& op,
                                         const DegreeProfile& prof, double C = 10.0) {
  const int total = op.n + op.m;
  std::vector<double> deg(total);
  int delta = 0;
  for (int u = 0; u < op.n; ++u) {
    deg[u] = prof.degree1[u];
    delta = std::max(delta, prof.degree1[u]);
  }
  for (int v = 0; v < op.m; ++v) {
    deg[op.n + v] = prof.degree2[v];
    delta = std::max(delta, prof.degree2[v]);
  }
  const double d = op.params.d;
  auto shifted = [&](const double* in, double* out) {
    op.apply_h(in, out);
    for (int i = 0; i < total; ++i) out[i] -= (1.0 + deg[i] / d) * in[i];
  };
  LanczosOptions lopt;
  lopt.k = 1;
  const LanczosResult top = lanczos_extreme(shifted, total, SpectralEnd::largest, lopt);
  LoewnerReport rep;
  rep.C = C;
  rep.converged = top.converged;
  rep.margin = top.values.front();
  rep.bound = C * std::pow(d, -1.5) * (delta + d);
  rep.ok = rep.converged && rep.margin <= rep.bound;
  return rep;
}

// Lower check: lambda_min(X^T (I - D1/d)^{-1} X - D2/d + I) >= -C d^(-1/2),
// with D1/D2 the per-side degree diagonals.  Requires every V1 degree to be
// strictly below d (PreconditionFailed otherwise).  Built densely as
// Z^T Z - D2/d + I with Z = (I - D1/d)^{-1/2} X.
inline LoewnerReport loewner_lower_check(const CenteredOperator& op,
                                         const DegreeProfile& prof, double C = 10.0) {
  const double d = op.params.d;
  for (int u = 0; u < op.n; ++u)
    if (prof.degree1[u] >= d)
      throw PreconditionFailed("loewner_lower_check: a V1 degree reaches d");
  Eigen::MatrixXd Z = dense_x(op);
  for (int u = 0; u < op.n; ++u)
    Z.row(u) /= std::sqrt(1.0 - prof.degree1[u] / d);
  Eigen::MatrixXd G = Z.transpose() * Z;
  for (int v = 0; v < op.m; ++v) G(v, v) += 1.0 - prof.degree2[v] / d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  LoewnerReport rep;
  rep.C = C;
  rep.margin = es.eigenvalues()(0);
  rep.bound = -C / std::sqrt(d);
  rep.ok = rep.margin >= rep.bound;
  return rep;
}

}  // namespace rmtlab
