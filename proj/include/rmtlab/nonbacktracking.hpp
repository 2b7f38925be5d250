// SPDX-License-Identifier: MIT
//
// nonbacktracking.hpp -- the non-backtracking operator B attached to H,
// acting on all N^2 ordered vertex pairs:
//
//     B_{(i,j),(k,l)} = H_{jl} 1{j = k} 1{i != l},
//
// together with a determinant identity that locates Spec(B) through two
// diagonal matrices and a deformed copy of the off-diagonal block X, and the
// threshold theta* above which the reduced matrix on the imaginary axis is
// positive definite.  theta* upper-bounds the spectral radius of B.
//
// Pair (i, j) has flat index i*N + j.  With V[i][j] = v_{(i,j)} viewed as an
// N x N matrix, one application is: W = H elementwise* V (rows of W live on
// the second pair coordinate), S_j = sum_l W[j][l], Out[i][j] = S_j - W[j][i].

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "common.hpp"
#include "operators.hpp"
#include "rng.hpp"

namespace rmtlab {

// ---------------------------------------------------------------------------
// Matrix-free application
// ---------------------------------------------------------------------------

struct NbOperator {
  const CenteredOperator* op = nullptr;
  int N = 0;
  // Scratch: W and the row sums S, reused across applications.
  mutable std::vector<double> W;
  mutable std::vector<double> S;
};

inline NbOperator nb_build(const CenteredOperator& op) {
  NbOperator nb;
  nb.op = &op;
  nb.N = op.n + op.m;
  nb.W.assign(static_cast<std::size_t>(nb.N) * nb.N, 0.0);
  nb.S.assign(nb.N, 0.0);
  return nb;
}

// out = B * in, both of length N^2.
inline void nb_apply(const NbOperator& nb, const double* in, double* out) {
  const CenteredOperator& op = *nb.op;
  const BipartiteGraph& g = *op.graph;
  const int N = nb.N, n = op.n, m = op.m;
  double* W = nb.W.data();
  double* S = nb.S.data();

  // W[j][l] = H_{jl} * in[j*N + l].  H vanishes within each side; across
  // sides it is -beta plus the edge correction.
  if (op.beta != 0.0) {
    for (int j = 0; j < n; ++j) {
      const double* vrow = in + static_cast<std::size_t>(j) * N;
      double* wrow = W + static_cast<std::size_t>(j) * N;
      for (int l = 0; l < n; ++l) wrow[l] = 0.0;
      for (int l = n; l < N; ++l) wrow[l] = -op.beta * vrow[l];
    }
    for (int j = n; j < N; ++j) {
      const double* vrow = in + static_cast<std::size_t>(j) * N;
      double* wrow = W + static_cast<std::size_t>(j) * N;
      for (int l = 0; l < n; ++l) wrow[l] = -op.beta * vrow[l];
      for (int l = n; l < N; ++l) wrow[l] = 0.0;
    }
  } else {
    std::fill(nb.W.begin(), nb.W.end(), 0.0);
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const int u = g.eu[e];
    const int x = n + g.ev[e];
    const double h = op.inv_sqrt_d * g.ew[e];
    W[static_cast<std::size_t>(u) * N + x] += h * in[static_cast<std::size_t>(u) * N + x];
    W[static_cast<std::size_t>(x) * N + u] += h * in[static_cast<std::size_t>(x) * N + u];
  }
  for (int j = 0; j < N; ++j) {
    const double* wrow = W + static_cast<std::size_t>(j) * N;
    double acc = 0.0;
    for (int l = 0; l < N; ++l) acc += wrow[l];
    S[j] = acc;
  }
  // Out[i][j] = S[j] - W[j][i]: a transpose-shaped pass, blocked for cache.
  constexpr int BLK = 64;
  for (int ib = 0; ib < N; ib += BLK) {
    const int ie = std::min(ib + BLK, N);
    for (int jb = 0; jb < N; jb += BLK) {
      const int je = std::min(jb + BLK, N);
      for (int i = ib; i < ie; ++i) {
        double* orow = out + static_cast<std::size_t>(i) * N;
        for (int j = jb; j < je; ++j)
          orow[j] = S[j] - W[static_cast<std::size_t>(j) * N + i];
      }
    }
  }
  (void)m;
}

// ---------------------------------------------------------------------------
// Spectral radius by power iteration
// ---------------------------------------------------------------------------

struct NbRadiusOptions {
  int max_iter = 120;
  int window = 20;      // growth factors averaged geometrically
  double tol = 1e-3;    // early stop: relative drift of the estimate
  std::uint64_t seed = 0x6e6f6e626bULL;
};

struct NbRadius {
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration on a complex vector (B is real, so one complex step is two
// real applications).  The dominant eigenvalue of B may be complex, which
// makes the norm-growth of a real iterate oscillate; the geometric mean of
// the last `window` growth factors of a complex iterate settles at rho(B).
inline NbRadius nb_spectral_radius_generic(
    const std::function<void(const double*, double*)>& apply, std::size_t dim,
    const NbRadiusOptions& opt = {}) {
  SplitMix64 rng(opt.seed);
  std::vector<double> vr(dim), vi(dim), wr(dim), wi(dim);
  for (auto& x : vr) x = rng.next_symmetric();
  for (auto& x : vi) x = rng.next_symmetric();
  auto norm2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += a[k] * a[k] + b[k] * b[k];
    return std::sqrt(s);
  };
  double nrm = norm2(vr, vi);
  if (nrm == 0.0) return {0.0, 0, true};
  for (auto& x : vr) x /= nrm;
  for (auto& x : vi) x /= nrm;

  NbRadius res;
  std::vector<double> log_growth;
  double prev_est = kNaN;
  int stable = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    apply(vr.data(), wr.data());
    apply(vi.data(), wi.data());
    const double g = norm2(wr, wi);
    res.iterations = it + 1;
    if (g < 1e-300) {
      // B annihilated the iterate: nilpotent direction, radius 0.
      res.rho = 0.0;
      res.converged = true;
      return res;
    }
    log_growth.push_back(std::log(g));
    vr.swap(wr);
    vi.swap(wi);
    for (auto& x : vr) x /= g;
    for (auto& x : vi) x /= g;

    if (static_cast<int>(log_growth.size()) >= opt.window) {
      double acc = 0.0;
      for (int k = 0; k < opt.window; ++k)
        acc += log_growth[log_growth.size() - 1 - k];
      const double est = std::exp(acc / opt.window);
      if (!std::isnan(prev_est) &&
          std::abs(est - prev_est) <= opt.tol * std::max(est, 1e-12)) {
        if (++stable >= 10) {
          res.rho = est;
          res.converged = true;
          return res;
        }
      } else {
        stable = 0;
      }
      prev_est = est;
      res.rho = est;
    }
  }
  return res;  // best estimate, converged = false
}

inline NbRadius nb_spectral_radius(const NbOperator& nb, const NbRadiusOptions& opt = {}) {
  const std::size_t dim = static_cast<std::size_t>(nb.N) * nb.N;
  return nb_spectral_radius_generic(
      [&nb](const double* in, double* out) { nb_apply(nb, in, out); }, dim, opt);
}

// ---------------------------------------------------------------------------
// Dense realizations (small instances and tests)
// ---------------------------------------------------------------------------

// Dense B from an arbitrary square matrix H with zero diagonal semantics
// (H's own diagonal is simply copied through the formula; the model's H has
// zero diagonal anyway).  Guarded to N <= 64 (B is N^2 x N^2).
inline Eigen::MatrixXd nb_dense_from_matrix(const Eigen::MatrixXd& H) {
  const int N = static_cast<int>(H.rows());
  if (H.cols() != N) throw DomainError("nb_dense_from_matrix: H must be square");
  if (N > 64) throw PreconditionFailed("nb_dense_from_matrix: N too large to materialize B");
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N * N, N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int l = 0; l < N; ++l) {
        if (l == i) continue;
        B(i * N + j, j * N + l) = H(j, l);
      }
  return B;
}

inline Eigen::MatrixXd nb_dense(const NbOperator& nb) {
  if (nb.N > 64) throw PreconditionFailed("nb_dense: N too large to materialize B");
  const CenteredOperator& op = *nb.op;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nb.N, nb.N);
  const Eigen::MatrixXd X = dense_x(op);
  H.topRightCorner(op.n, op.m) = X;
  H.bottomLeftCorner(op.m, op.n) = X.transpose();
  return nb_dense_from_matrix(H);
}

// ---------------------------------------------------------------------------
// Determinant identity for Spec(B)
// ---------------------------------------------------------------------------

// The three lambda-dependent blocks.  For admissible lambda (no denominator
// lambda^2 - X_{jl}^2 near zero, all M1 entries away from zero),
// lambda in Spec(B) iff det(M2 - Xlam^T M1^{-1} Xlam) = 0.  Note the plain
// (unconjugated) transpose: the identity deforms X^T by the same lambda.
struct IharaBassData {
  Eigen::VectorXcd M1;    // n diagonal entries
  Eigen::VectorXcd M2;    // m diagonal entries
  Eigen::MatrixXcd Xlam;  // n x m deformed block
};

inline IharaBassData ihara_bass_blocks(const Eigen::MatrixXd& X,
                                       std::complex<double> lambda) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(X.cols());
  const std::complex<double> l2 = lambda * lambda;
  const double scale = 1.0 + std::norm(lambda);
  // lambda = 0 always lies outside the identity: the zero eigenvalues of B
  // are carried by the prefactor, not by the reduced determinant.
  if (std::norm(lambda) <= 1e-20)
    throw ForbiddenLambda("ihara_bass_blocks: the identity requires lambda != 0");
  IharaBassData data;
  data.M1 = Eigen::VectorXcd::Ones(n);
  data.M2 = Eigen::VectorXcd::Ones(m);
  data.Xlam.resize(n, m);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < m; ++l) {
      const double x = X(j, l);
      const std::complex<double> denom = l2 - x * x;
      if (std::abs(denom) <= 1e-10 * scale)
        throw ForbiddenLambda("ihara_bass_blocks: lambda^2 collides with an entry of X^2");
      data.M1(j) += x * x / denom;
      data.M2(l) += x * x / denom;
      data.Xlam(j, l) = lambda * x / denom;
    }
  for (int j = 0; j < n; ++j)
    if (std::abs(data.M1(j)) <= 1e-9)
      throw SingularM1("ihara_bass_blocks: M1 has a (near-)zero diagonal entry");
  return data;
}

struct ReducedDeterminant {
  std::complex<double> det{0.0, 0.0};
  // sigma_min(R) / (1 + sigma_max(R)): ~0 iff R is singular, including the
  // degenerate case where R vanishes entirely (eigenvalues of B with
  // multiplicity equal to the reduced dimension make every entry tiny, so a
  // relative pivot ratio would miss them).
  double singular_score = 0.0;
};

inline ReducedDeterminant reduced_determinant(const Eigen::MatrixXd& X,
                                              std::complex<double> lambda) {
  const IharaBassData data = ihara_bass_blocks(X, lambda);
  Eigen::MatrixXcd R = data.M2.asDiagonal();
  const Eigen::MatrixXcd scaled = data.M1.cwiseInverse().asDiagonal() * data.Xlam;
  R.noalias() -= data.Xlam.transpose() * scaled;
  ReducedDeterminant out;
  out.det = Eigen::PartialPivLU<Eigen::MatrixXcd>(R).determinant();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
  const auto& sv = svd.singularValues();
  out.singular_score = sv(sv.size() - 1) / (1.0 + sv(0));
  return out;
}

inline ReducedDeterminant reduced_determinant(const CenteredOperator& op,
                                              std::complex<double> lambda) {
  return reduced_determinant(dense_x(op), lambda);
}

// ---------------------------------------------------------------------------
// theta*: positive-definiteness onset on the imaginary axis
// ---------------------------------------------------------------------------

// At lambda = i theta the reduced matrix becomes real symmetric:
//   R(theta) = M2 + Y^T M1^{-1} Y,   Y = -theta X / (theta^2 + X^2),
//   M1_jj = 1 - sum_l X_jl^2/(theta^2 + X_jl^2)   (M2 analogous),
// all entrywise.  R(theta) -> I as theta -> inf; theta* is the infimum
// above which R stays positive definite (all M1 entries positive and the
// Cholesky factorization succeeds), located by bisection.  theta* bounds
// rho(B) from above.
struct ThetaStarOptions {
  double theta_lo = 1e-4;
  double theta_hi0 = 4.0;   // initial upper probe, doubled if not yet PD
  int max_expand = 16;
  double tol = 1e-6;
};

struct ThetaStarResult {
  double theta = 0.0;
  int evaluations = 0;
};

namespace detail {
inline bool reduced_pd_on_axis(const Eigen::MatrixXd& X, double theta) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(X.cols());
  const double t2 = theta * theta;
  Eigen::VectorXd M1 = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd M2 = Eigen::VectorXd::Ones(m);
  Eigen::MatrixXd Y(n, m);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < m; ++l) {
      const double x2 = X(j, l) * X(j, l);
      const double frac = x2 / (t2 + x2);
      M1(j) -= frac;
      M2(l) -= frac;
      Y(j, l) = -theta * X(j, l) / (t2 + x2);
    }
  if ((M1.array() <= 0.0).any()) return false;
  Eigen::MatrixXd R = M2.asDiagonal();
  R.noalias() += Y.transpose() * (M1.cwiseInverse().asDiagonal() * Y);
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  return llt.info() == Eigen::Success;
}
}  // namespace detail

inline ThetaStarResult theta_star(const Eigen::MatrixXd& X,
                                  const ThetaStarOptions& opt = {}) {
  ThetaStarResult res;
  auto pd = [&](double th) {
    ++res.evaluations;
    return detail::reduced_pd_on_axis(X, th);
  };
  if (pd(opt.theta_lo))
    throw BracketError("theta_star: reduced matrix already PD at theta_lo");
  double hi = opt.theta_hi0;
  int expand = 0;
  while (!pd(hi)) {
    if (++expand > opt.max_expand)
      throw BracketError("theta_star: no PD point found while expanding");
    hi *= 2.0;
  }
  double lo = opt.theta_lo;
  while (hi - lo > opt.tol) {
    const double mid = 0.5 * (lo + hi);
    if (pd(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  res.theta = 0.5 * (lo + hi);
  return res;
}

inline ThetaStarResult theta_star(const CenteredOperator& op,
                                  const ThetaStarOptions& opt = {}) {
  return theta_star(dense_x(op), opt);
}

}  // namespace rmtlab
