// SPDX-License-Identifier: MIT
//
// test_nonbacktracking.cpp -- unit tests for the non-backtracking operator:
// dense construction, the matrix-free apply, spectral radius estimation, the
// reduced determinant identity (including its transpose convention), and the
// positive-definiteness onset theta* on the imaginary axis.  Reference
// values are frozen from tests/oracles/oracle_nb.py.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "rmtlab/graph.hpp"
#include "rmtlab/localtree.hpp"
#include "rmtlab/nonbacktracking.hpp"
#include "rmtlab/operators.hpp"

using namespace rmtlab;
using Catch::Approx;

namespace {

Eigen::MatrixXd h_from_x(const Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  const int m = static_cast<int>(X.cols());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n + m, n + m);
  H.topRightCorner(n, m) = X;
  H.bottomLeftCorner(m, n) = X.transpose();
  return H;
}

std::vector<std::complex<double>> dense_eigenvalues(const Eigen::MatrixXd& B) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(B, false);
  std::vector<std::complex<double>> out(es.eigenvalues().size());
  for (int k = 0; k < es.eigenvalues().size(); ++k) out[k] = es.eigenvalues()(k);
  return out;
}

double max_modulus(const std::vector<std::complex<double>>& eig) {
  double rho = 0.0;
  for (auto lam : eig) rho = std::max(rho, std::abs(lam));
  return rho;
}

// Sorted distinct nonzero moduli, merged at tolerance 5e-7.
std::vector<double> distinct_moduli(const std::vector<std::complex<double>>& eig) {
  std::vector<double> mods;
  for (auto lam : eig)
    if (std::abs(lam) > 1e-9) mods.push_back(std::abs(lam));
  std::sort(mods.begin(), mods.end());
  std::vector<double> out;
  for (double a : mods)
    if (out.empty() || a - out.back() > 5e-7) out.push_back(a);
  return out;
}

// Tiny weighted graph whose operator block is exactly X (d = 1, weights =
// entries, only nonzero entries become edges).
struct TinyInstance {
  BipartiteGraph graph;
  ModelParams params;
};

TinyInstance instance_from_x(const Eigen::MatrixXd& X) {
  TinyInstance t;
  t.graph.n = static_cast<int>(X.rows());
  t.graph.m = static_cast<int>(X.cols());
  t.graph.weighted = true;
  for (int u = 0; u < t.graph.n; ++u)
    for (int v = 0; v < t.graph.m; ++v)
      if (X(u, v) != 0.0) {
        t.graph.eu.push_back(u);
        t.graph.ev.push_back(v);
        t.graph.ew.push_back(X(u, v));
      }
  t.graph.build_adjacency();
  t.params.n = t.graph.n;
  t.params.m = t.graph.m;
  t.params.N = t.graph.n + t.graph.m;
  t.params.d = 1.0;
  t.params.q = 1.0;
  return t;
}

Eigen::MatrixXd x_4cycle() {
  Eigen::MatrixXd X(2, 2);
  X << 1.0, 1.0, 1.0, 0.5;
  return X;
}

// Admissibility mirror of the reduced-determinant guards: lambda must stay
// away from 0 and from every +/-X_jl.
bool admissible(const Eigen::MatrixXd& X, std::complex<double> lam) {
  if (std::norm(lam) <= 1e-12) return false;
  const double scale = 1.0 + std::norm(lam);
  for (int j = 0; j < X.rows(); ++j)
    for (int l = 0; l < X.cols(); ++l)
      if (std::abs(lam * lam - X(j, l) * X(j, l)) <= 1e-8 * scale) return false;
  return true;
}

struct AnnihilationStats {
  int checked = 0;
  int skipped = 0;
  double worst_score = 0.0;
};

AnnihilationStats annihilation_stats(const Eigen::MatrixXd& X,
                                     const std::vector<std::complex<double>>& eig) {
  AnnihilationStats st;
  for (auto lam : eig) {
    if (!admissible(X, lam)) {
      ++st.skipped;
      continue;
    }
    try {
      const ReducedDeterminant rd = reduced_determinant(X, lam);
      st.worst_score = std::max(st.worst_score, rd.singular_score);
      ++st.checked;
    } catch (const ForbiddenLambda&) {
      ++st.skipped;  // collision tighter than the pre-filter
    } catch (const SingularM1&) {
      ++st.skipped;  // an M1 diagonal entry vanishes at this eigenvalue
    }
  }
  return st;
}

}  // namespace

TEST_CASE("dense B matches the defining formula", "[nb][dense]") {
  Eigen::MatrixXd H(3, 3);
  H << 0.0, 2.0, -1.0,
       2.0, 0.0, 0.5,
      -1.0, 0.5, 0.0;
  const Eigen::MatrixXd B = nb_dense_from_matrix(H);
  const int N = 3;
  REQUIRE(B.rows() == N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          const double want = (j == k && i != l) ? H(j, l) : 0.0;
          CHECK(B(i * N + j, k * N + l) == want);
        }

  CHECK_THROWS_AS(nb_dense_from_matrix(Eigen::MatrixXd::Zero(2, 3)), DomainError);
  CHECK_THROWS_AS(nb_dense_from_matrix(Eigen::MatrixXd::Zero(65, 65)),
                  PreconditionFailed);
}

TEST_CASE("a single edge is nilpotent", "[nb][radius]") {
  Eigen::MatrixXd X(1, 1);
  X << 1.0;
  const TinyInstance t = instance_from_x(X);
  const CenteredOperator op = build_operator(t.graph, t.params);
  const NbOperator nb = nb_build(op);

  const Eigen::MatrixXd B = nb_dense(nb);
  CHECK((B * B).cwiseAbs().maxCoeff() == 0.0);

  const NbRadius r = nb_spectral_radius(nb);
  CHECK(r.converged);
  CHECK(r.rho == 0.0);
}

TEST_CASE("triangle spectrum lies on the unit circle", "[nb][dense]") {
  Eigen::MatrixXd H(3, 3);
  H << 0, 1, 1,
       1, 0, 1,
       1, 1, 0;
  const auto eig = dense_eigenvalues(nb_dense_from_matrix(H));
  // frozen from tests/oracles/oracle_nb.py
  CHECK(max_modulus(eig) == Approx(1.0).margin(1e-9));
  int on_circle = 0, at_zero = 0;
  for (auto lam : eig) {
    if (std::abs(std::abs(lam) - 1.0) < 1e-9) ++on_circle;
    if (std::abs(lam) < 1e-9) ++at_zero;
  }
  CHECK(on_circle == 6);
  CHECK(at_zero == 3);
}

TEST_CASE("weighted 4-cycle: radius, annihilation, theta*", "[nb][identity]") {
  const Eigen::MatrixXd X = x_4cycle();
  const TinyInstance t = instance_from_x(X);
  const CenteredOperator op = build_operator(t.graph, t.params);
  const NbOperator nb = nb_build(op);

  // Graph route and matrix route agree.
  const Eigen::MatrixXd B = nb_dense(nb);
  CHECK((B - nb_dense_from_matrix(h_from_x(X))).cwiseAbs().maxCoeff() <= 1e-14);

  // Matrix-free apply against dense B.
  const int dim = 16;
  SplitMix64 rng(4242);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.next_symmetric();
  Eigen::VectorXd out(dim);
  nb_apply(nb, v.data(), out.data());
  CHECK((out - B * v).cwiseAbs().maxCoeff() <= 1e-12);

  // Every nonzero eigenvalue has modulus 0.5^(1/4); the two-cycle structure
  // of the weighted square makes the whole nonzero spectrum one orbit.
  // frozen from tests/oracles/oracle_nb.py
  const auto eig = dense_eigenvalues(B);
  const double rho = max_modulus(eig);
  CHECK(rho == Approx(0.840896415253715).margin(1e-9));
  CHECK(rho == Approx(std::pow(0.5, 0.25)).margin(1e-9));
  const auto mods = distinct_moduli(eig);
  REQUIRE(mods.size() == 1);
  CHECK(mods[0] == Approx(0.840896415253715).margin(1e-6));

  // With every modulus equal, the growth factor is constant and the power
  // iteration locks on exactly.
  const NbRadius pr = nb_spectral_radius(nb);
  CHECK(pr.converged);
  CHECK(pr.rho == Approx(rho).margin(1e-6));

  // All admissible eigenvalues annihilate the reduced determinant; generic
  // control points do not.
  const AnnihilationStats st = annihilation_stats(X, eig);
  CHECK(st.checked == 8);
  CHECK(st.worst_score <= 1e-9);
  // frozen from tests/oracles/oracle_nb.py
  const ReducedDeterminant c1 = reduced_determinant(X, {0.31, 0.17});
  CHECK(std::abs(c1.det) == Approx(0.992785).margin(1e-4));
  CHECK(c1.singular_score == Approx(0.370332).margin(1e-4));
  CHECK(reduced_determinant(X, {1.9, 0.0}).singular_score ==
        Approx(0.260003).margin(1e-4));
  CHECK(reduced_determinant(X, {0.0, 2.3}).singular_score ==
        Approx(0.322852).margin(1e-4));

  // theta* here is NOT the spectral radius: the onset is pinned by a pole of
  // an M1 diagonal entry at theta = 1 (the row with |X_0l| = 1 twice makes
  // M1_00(i theta) vanish there), strictly above rho(B).  The bound
  // rho <= theta* still holds.
  // frozen from tests/oracles/oracle_nb.py
  const ThetaStarResult th = theta_star(X);
  CHECK(th.theta == Approx(1.000000138).margin(2e-6));
  CHECK(th.theta > rho);
  CHECK(rho <= th.theta + 1e-9);

  // Excluded points: the identity needs lambda != 0 and lambda^2 != X_jl^2.
  CHECK_THROWS_AS(reduced_determinant(X, {0.0, 0.0}), ForbiddenLambda);
  CHECK_THROWS_AS(reduced_determinant(X, {1.0, 0.0}), ForbiddenLambda);
  CHECK_THROWS_AS(reduced_determinant(X, {-1.0, 0.0}), ForbiddenLambda);
  CHECK_THROWS_AS(reduced_determinant(X, {0.5, 0.0}), ForbiddenLambda);
  // At lambda = i the M1 entry of the unit-weight row vanishes exactly.
  CHECK_THROWS_AS(reduced_determinant(X, {0.0, 1.0}), SingularM1);
}

TEST_CASE("the deformed block uses the plain transpose", "[nb][identity]") {
  const Eigen::MatrixXd X = x_4cycle();
  const std::complex<double> lam(0.0, std::pow(0.5, 0.25));

  // The eigenvalue i*rho of B annihilates the reduced determinant only with
  // the unconjugated transpose; conjugating it breaks the identity.
  // frozen from tests/oracles/oracle_nb.py
  const ReducedDeterminant good = reduced_determinant(X, lam);
  CHECK(std::abs(good.det) <= 1e-20);
  CHECK(good.singular_score <= 1e-9);

  const IharaBassData data = ihara_bass_blocks(X, lam);
  Eigen::MatrixXcd Rbad = data.M2.asDiagonal();
  Rbad.noalias() -=
      data.Xlam.adjoint() * (data.M1.cwiseInverse().asDiagonal() * data.Xlam);
  const std::complex<double> bad_det =
      Eigen::PartialPivLU<Eigen::MatrixXcd>(Rbad).determinant();
  CHECK(std::abs(bad_det) == Approx(0.105009248042038).margin(1e-9));
}

TEST_CASE("fixed 3x4 instance", "[nb][identity]") {
  Eigen::MatrixXd X(3, 4);
  X << 0.5, -1.0, 0.0, 2.0,
       1.0, 0.25, -0.5, 0.0,
       0.0, 1.0, 1.0, -0.75;
  const auto eig = dense_eigenvalues(nb_dense_from_matrix(h_from_x(X)));

  // frozen from tests/oracles/oracle_nb.py
  CHECK(max_modulus(eig) == Approx(1.127361917491331).margin(1e-9));
  const std::vector<double> want_mods = {0.5108928064, 0.7599464554, 0.8395775936,
                                         1.0137227214, 1.0665612691, 1.1089431343,
                                         1.1273619175};
  const auto mods = distinct_moduli(eig);
  REQUIRE(mods.size() == want_mods.size());
  for (std::size_t k = 0; k < mods.size(); ++k)
    CHECK(mods[k] == Approx(want_mods[k]).margin(1e-6));

  const AnnihilationStats st = annihilation_stats(X, eig);
  CHECK(st.checked == 18);
  CHECK(st.worst_score <= 1e-9);
  CHECK(reduced_determinant(X, {1.9, 0.0}).singular_score >= 0.05);

  // frozen from tests/oracles/oracle_nb.py
  const ThetaStarResult th = theta_star(X);
  CHECK(th.theta == Approx(1.569131112).margin(2e-6));
  CHECK(max_modulus(eig) <= th.theta + 1e-9);
}

TEST_CASE("centered-style 4x3 instance", "[nb][identity]") {
  Eigen::MatrixXd X(4, 3);
  X << 0.9, -0.1, -0.1,
      -0.1, 0.8, -0.1,
      -0.1, -0.1, 1.1,
       0.7, -0.1, 0.6;
  const auto eig = dense_eigenvalues(nb_dense_from_matrix(h_from_x(X)));

  // frozen from tests/oracles/oracle_nb.py
  CHECK(max_modulus(eig) == Approx(0.539195263617111).margin(1e-9));
  const AnnihilationStats st = annihilation_stats(X, eig);
  CHECK(st.checked == 22);
  CHECK(st.worst_score <= 1e-9);

  // frozen from tests/oracles/oracle_nb.py
  CHECK(theta_star(X).theta == Approx(0.662752138).margin(2e-6));
}

TEST_CASE("trees are nilpotent", "[nb][radius]") {
  const RootedTree t = make_biregular_tree(2, 3, Side::v2, 3, 2);
  ModelParams P;
  P.n = t.graph.n;
  P.m = t.graph.m;
  P.N = t.graph.n + t.graph.m;
  P.d = 1.0;
  P.q = 1.0;
  const CenteredOperator op = build_operator(t.graph, P);
  const NbOperator nb = nb_build(op);

  const Eigen::MatrixXd B = nb_dense(nb);
  // Non-backtracking walks on a tree are simple paths.  B acts on all
  // ordered pairs and the source pair contributes no edge factor, so a
  // k-step product covers k graph edges: with diameter 4 the operator dies
  // at the fifth power and not before.
  const Eigen::MatrixXd B4 = B * B * B * B;
  CHECK(B4.cwiseAbs().maxCoeff() > 0.0);
  CHECK((B4 * B).cwiseAbs().maxCoeff() <= 1e-12);
  // Numerical eigenvalues of a defective nilpotent matrix smear like
  // eps^(1/k) for a length-k Jordan chain, so only a loose bound is honest.
  for (auto lam : dense_eigenvalues(B)) CHECK(std::abs(lam) <= 1e-2);

  const NbRadius r = nb_spectral_radius(nb);
  CHECK(r.converged);
  CHECK(r.rho == 0.0);
}

TEST_CASE("matrix-free apply on a centered sampled instance", "[nb][apply]") {
  const ModelParams P = make_params(1.0, 1.0, 6);
  const BipartiteGraph g = sample_graph(P, 42);
  const CenteredOperator op = build_operator(g, P);  // beta != 0 path
  const NbOperator nb = nb_build(op);
  const Eigen::MatrixXd B = nb_dense(nb);

  SplitMix64 rng(5151);
  for (int rep = 0; rep < 3; ++rep) {
    Eigen::VectorXd v(144), out(144);
    for (int i = 0; i < 144; ++i) v[i] = rng.next_symmetric();
    nb_apply(nb, v.data(), out.data());
    CHECK((out - B * v).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // On tiny instances the moduli cluster and the windowed power iteration
  // may time out before the drift test clears; it still lands close.
  NbRadiusOptions opt;
  opt.max_iter = 400;
  const NbRadius r = nb_spectral_radius(nb, opt);
  const double rho = max_modulus(dense_eigenvalues(B));
  CHECK(r.rho == Approx(rho).margin(0.05 * rho));
}

TEST_CASE("ensemble semantics: skip-and-count, theta* vs rho", "[nb][ensemble]") {
  // Small centered instances at aspect 3: every admissible eigenvalue of B
  // annihilates the reduced determinant, and theta* bounds rho from above
  // (here the PD onset is spectral, not pole-driven).  Instances that are
  // forests have rho = 0 and no PD bracket; they count as theta* = 0.
  const ModelParams P = make_params(3.0, 1.0, 2);  // n = 6, m = 2, N = 8
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const BipartiteGraph g = sample_graph(P, seed);
    const CenteredOperator op = build_operator(g, P);
    const Eigen::MatrixXd X = dense_x(op);
    const auto eig = dense_eigenvalues(nb_dense(nb_build(op)));

    const AnnihilationStats st = annihilation_stats(X, eig);
    CHECK(st.checked > 0);
    CHECK(st.worst_score <= 1e-6);

    double theta = 0.0;
    try {
      theta = theta_star(X).theta;
    } catch (const BracketError&) {
      theta = 0.0;
    }
    CHECK(theta <= max_modulus(eig) + 1e-4);
  }
}

TEST_CASE("theta* guards", "[nb][thetastar]") {
  // A single weak entry is PD on the whole axis: no onset to find.
  Eigen::MatrixXd weak(1, 1);
  weak << 0.001;
  CHECK_THROWS_AS(theta_star(weak), BracketError);

  // Refusing to expand the probe window also brackets out.
  ThetaStarOptions opt;
  opt.theta_hi0 = 0.5;  // onset is at 1.0 for the weighted 4-cycle
  opt.max_expand = 0;
  CHECK_THROWS_AS(theta_star(x_4cycle(), opt), BracketError);

  // Larger graphs cannot materialize B.
  const ModelParams P = make_params(1.0, 1.0, 40);  // N = 80
  const BipartiteGraph g = sample_graph(P, 1);
  const CenteredOperator op = build_operator(g, P);
  CHECK_THROWS_AS(nb_dense(nb_build(op)), PreconditionFailed);
}
