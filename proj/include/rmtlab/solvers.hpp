// SPDX-License-Identifier: MIT
//
// solvers.hpp -- a Lanczos iteration with full reorthogonalization for
// extreme eigenvalues of symmetric matrix-free operators.  Dense paths
// elsewhere use Eigen's SelfAdjointEigenSolver directly; this exists for the
// instances too large to materialize.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace rmtlab {

enum class SpectralEnd { largest, smallest };

struct LanczosOptions {
  int k = 8;               // how many extreme eigenvalues to resolve
  int max_iter = 300;      // Krylov dimension cap (also capped by dim)
  double tol = 1e-8;       // residual tolerance relative to spectral scale
  std::uint64_t seed = 0x6c616e637a6f73ULL;  // start-vector stream
};

struct LanczosResult {
  std::vector<double> values;  // k Ritz values: descending for `largest`,
                               // ascending for `smallest`
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;       // worst residual bound among returned pairs
  double scale = 0.0;          // max |theta| over all Ritz values
};

// Lanczos with full two-pass reorthogonalization.  `apply(in, out)` must
// implement a symmetric operator of dimension `dim`.  On (rare) breakdown
// the iteration restarts the basis with a fresh orthogonalized random
// vector, leaving a zero coupling in the tridiagonal matrix; the Ritz
// spectrum of the resulting block-diagonal T is still correct.
inline LanczosResult lanczos_extreme(
    const std::function<void(const double*, double*)>& apply, int dim,
    SpectralEnd end, const LanczosOptions& opt = {}) {
  if (dim <= 0) throw DomainError("lanczos_extreme: dim must be positive");
  const int want = std::min(opt.k, dim);
  const int max_steps = std::min(opt.max_iter, dim);

  SplitMix64 rng(opt.seed);
  auto random_unit = [&](const std::vector<Eigen::VectorXd>& basis) {
    Eigen::VectorXd v(dim);
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (int i = 0; i < dim; ++i) v[i] = rng.next_symmetric();
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= b.dot(v) * b;
      const double nrm = v.norm();
      if (nrm > 1e-8) return Eigen::VectorXd(v / nrm);
    }
    throw PreconditionFailed("lanczos_extreme: cannot extend basis");
  };

  std::vector<Eigen::VectorXd> V;
  V.reserve(max_steps);
  std::vector<double> alpha, beta;  // beta[j] couples step j to j+1
  V.push_back(random_unit(V));
  Eigen::VectorXd w(dim);

  LanczosResult res;
  for (int j = 0; j < max_steps; ++j) {
    apply(V[j].data(), w.data());
    const double a = V[j].dot(w);
    alpha.push_back(a);
    // Full reorthogonalization, two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : V) w -= b.dot(w) * b;
    const double bnorm = w.norm();
    res.iterations = j + 1;

    const bool exhausted = static_cast<int>(V.size()) == dim;
    const bool last_step = j + 1 == max_steps || exhausted;
    // Assess Ritz convergence periodically and at the end.
    if ((j + 1) % 10 == 0 || last_step || bnorm < 1e-12) {
      const int jj = static_cast<int>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(jj, jj);
      for (int i = 0; i < jj; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < jj; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const Eigen::VectorXd theta = es.eigenvalues();  // ascending
      res.scale = std::max(std::abs(theta[0]), std::abs(theta[jj - 1]));
      const int have = std::min(want, jj);
      res.values.assign(have, 0.0);
      double worst = 0.0;
      for (int i = 0; i < have; ++i) {
        const int idx = (end == SpectralEnd::largest) ? jj - 1 - i : i;
        res.values[i] = theta[idx];
        // Residual bound |beta_j * s_{last, idx}| for the Ritz pair.
        const double r = (bnorm < 1e-12 || exhausted)
                             ? 0.0
                             : bnorm * std::abs(es.eigenvectors()(jj - 1, idx));
        worst = std::max(worst, r);
      }
      res.residual = worst;
      const double tol_abs = opt.tol * std::max(res.scale, 1e-300);
      if ((worst <= tol_abs && jj >= want) || exhausted) {
        res.converged = true;
        return res;
      }
    }
    if (last_step) break;
    if (bnorm < 1e-12) {
      // Invariant subspace hit: restart with a fresh direction.
      beta.push_back(0.0);
      V.push_back(random_unit(V));
    } else {
      beta.push_back(bnorm);
      V.push_back(w / bnorm);
    }
  }
  return res;  // converged stays false: caller decides how to react
}

}  // namespace rmtlab
