// SPDX-License-Identifier: MIT
//
// test_spectra.cpp -- unit tests for the centered operator, the dense and
// matrix-free spectral routes, the empirical-law distance, and the
// Loewner-order sandwich checks.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rmtlab/graph.hpp"
#include "rmtlab/operators.hpp"
#include "rmtlab/solvers.hpp"
#include "rmtlab/spectrum.hpp"

using namespace rmtlab;
using Catch::Approx;

namespace {

// Dense H = [[0, X], [X^T, 0]] for a small instance.
Eigen::MatrixXd dense_h(const CenteredOperator& op) {
  const Eigen::MatrixXd X = dense_x(op);
  const int N = op.n + op.m;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
  H.topRightCorner(op.n, op.m) = X;
  H.bottomLeftCorner(op.m, op.n) = X.transpose();
  return H;
}

Eigen::VectorXd random_vector(int dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.next_symmetric();
  return v;
}

// Relabel both vertex classes by seeded random permutations; the operator
// spectrum is invariant under this.
BipartiteGraph permuted_copy(const BipartiteGraph& g, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<int> pu(g.n), pv(g.m);
  for (int i = 0; i < g.n; ++i) pu[i] = i;
  for (int i = 0; i < g.m; ++i) pv[i] = i;
  for (int i = g.n - 1; i > 0; --i)
    std::swap(pu[i], pu[rng.next_below(static_cast<std::uint64_t>(i + 1))]);
  for (int i = g.m - 1; i > 0; --i)
    std::swap(pv[i], pv[rng.next_below(static_cast<std::uint64_t>(i + 1))]);
  BipartiteGraph h;
  h.n = g.n;
  h.m = g.m;
  h.weighted = g.weighted;
  std::vector<int> order(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::pair(pu[g.eu[a]], pv[g.ev[a]]) < std::pair(pu[g.eu[b]], pv[g.ev[b]]);
  });
  for (int e : order) {
    h.eu.push_back(pu[g.eu[e]]);
    h.ev.push_back(pv[g.ev[e]]);
    h.ew.push_back(g.ew[e]);
  }
  h.build_adjacency();
  return h;
}

}  // namespace

TEST_CASE("operator construction and entries", "[spectra][operator]") {
  const ModelParams P = make_params(2.0, 1.0, 8);
  const BipartiteGraph g = sample_graph(P, 3);
  const CenteredOperator op = build_operator(g, P);

  CHECK(op.beta == Approx(P.p / std::sqrt(P.d)).epsilon(1e-15));

  // Entries: (1 - p)/sqrt(d) on edges, -p/sqrt(d) off edges, 0 within a side.
  const Eigen::MatrixXd X = dense_x(op);
  for (int u = 0; u < P.n; ++u)
    for (int v = 0; v < P.m; ++v)
      CHECK(op.entry(u, P.n + v) == Approx(X(u, v)).margin(1e-15));
  CHECK(op.entry(0, 1) == 0.0);                  // V1-V1
  CHECK(op.entry(P.n, P.n + 1) == 0.0);          // V2-V2
  CHECK(op.entry(P.n + 1, 0) == Approx(X(0, 1)).margin(1e-15));  // symmetric

  const double isd = 1.0 / std::sqrt(P.d);
  bool found_edge = false;
  for (int u = 0; u < P.n && !found_edge; ++u)
    for (int s = g.off1[u]; s < g.off1[u + 1]; ++s) {
      CHECK(X(u, g.adj1[s]) == Approx((1.0 - P.p) * isd).epsilon(1e-13));
      found_edge = true;
      break;
    }
  REQUIRE(found_edge);

  // Weighted model: no background, entries are w/sqrt(d).
  const ModelParams Pw = make_params(2.0, 1.0, 8, WeightDistribution::rademacher);
  const BipartiteGraph gw = sample_graph(Pw, 3);
  const CenteredOperator opw = build_operator(gw, Pw);
  CHECK(opw.beta == 0.0);
  const Eigen::MatrixXd Xw = dense_x(opw);
  for (int e = 0; e < gw.num_edges(); ++e)
    CHECK(Xw(gw.eu[e], gw.ev[e]) == Approx(gw.ew[e] * isd).epsilon(1e-13));

  // Dimension mismatch is rejected.
  const ModelParams Pbad = make_params(2.0, 1.0, 9);
  CHECK_THROWS_AS(build_operator(g, Pbad), MismatchError);
  CHECK_THROWS_AS(dense_x(op, 4), PreconditionFailed);
}

TEST_CASE("matrix-free applies agree with the dense realization", "[spectra][operator]") {
  for (auto wd : {WeightDistribution::none, WeightDistribution::uniform_sym}) {
    const ModelParams P = make_params(2.0, 1.0, 10, wd);
    const BipartiteGraph g = sample_graph(P, 17);
    const CenteredOperator op = build_operator(g, P);
    const Eigen::MatrixXd X = dense_x(op);

    const Eigen::VectorXd vin = random_vector(P.m, 101);
    Eigen::VectorXd out1(P.n);
    op.apply_x(vin.data(), out1.data());
    CHECK((out1 - X * vin).norm() <= 1e-12 * std::max(1.0, out1.norm()));

    const Eigen::VectorXd uin = random_vector(P.n, 202);
    Eigen::VectorXd out2(P.m);
    op.apply_xt(uin.data(), out2.data());
    CHECK((out2 - X.transpose() * uin).norm() <= 1e-12 * std::max(1.0, out2.norm()));

    const Eigen::VectorXd hin = random_vector(P.n + P.m, 303);
    Eigen::VectorXd out3(P.n + P.m);
    op.apply_h(hin.data(), out3.data());
    const Eigen::MatrixXd H = dense_h(op);
    CHECK((out3 - H * hin).norm() <= 1e-12 * std::max(1.0, out3.norm()));

    std::vector<double> scratch;
    Eigen::VectorXd out4(P.m);
    op.apply_gram(vin.data(), out4.data(), scratch);
    const Eigen::VectorXd want = X.transpose() * (X * vin);
    CHECK((out4 - want).norm() <= 1e-12 * std::max(1.0, want.norm()));

    // The assembled Gram matrix matches X^T X entrywise.
    const Eigen::MatrixXd G = gram_dense(op);
    CHECK((G - X.transpose() * X).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("spectrum of H is symmetric with a null space of size n - m",
          "[spectra][symmetry]") {
  for (auto wd : {WeightDistribution::none, WeightDistribution::rademacher}) {
    const ModelParams P = make_params(2.0, 1.0, 8, wd);  // n = 16, m = 8
    const BipartiteGraph g = sample_graph(P, 21);
    const CenteredOperator op = build_operator(g, P);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_h(op), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = es.eigenvalues();  // ascending
    const int N = P.n + P.m;
    REQUIRE(lam.size() == N);
    for (int i = 0; i < N; ++i)
      CHECK(lam[i] == Approx(-lam[N - 1 - i]).margin(1e-12));
    int zeros = 0;
    for (int i = 0; i < N; ++i)
      if (std::abs(lam[i]) < 1e-10) ++zeros;
    CHECK(zeros >= P.n - P.m);
  }
}

TEST_CASE("dense singular values match a direct SVD and imply Spec(H)",
          "[spectra][dense]") {
  const ModelParams P = make_params(2.0, 1.0, 8);
  const BipartiteGraph g = sample_graph(P, 21);
  const CenteredOperator op = build_operator(g, P);

  const SpectralReport rep = singular_values(op);
  REQUIRE(rep.dense);
  REQUIRE(static_cast<int>(rep.sigma.size()) == P.m);
  CHECK(rep.graph_fingerprint == graph_hash(g));
  CHECK(std::is_sorted(rep.sigma.rbegin(), rep.sigma.rend()));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense_x(op));
  for (int i = 0; i < P.m; ++i)
    CHECK(rep.sigma[i] == Approx(svd.singularValues()(i)).margin(1e-10));

  // h_eigenvalues reproduces the direct diagonalization of H.
  const std::vector<double> hev = h_eigenvalues(rep);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_h(op), Eigen::EigenvaluesOnly);
  REQUIRE(static_cast<int>(hev.size()) == P.n + P.m);
  for (int i = 0; i < P.n + P.m; ++i)
    CHECK(hev[i] == Approx(es.eigenvalues()(P.n + P.m - 1 - i)).margin(1e-10));

  CHECK(rep.largest() == rep.sigma.front());
  CHECK(rep.smallest() == rep.sigma.back());
}

TEST_CASE("Lanczos path agrees with the dense route", "[spectra][lanczos]") {
  const ModelParams P = make_params(1.0, 1.5, 60);
  const BipartiteGraph g = sample_graph(P, 33);
  const CenteredOperator op = build_operator(g, P);

  const SpectralReport dense_rep = singular_values(op);
  REQUIRE(dense_rep.dense);

  SolveOptions lopts;
  lopts.dense_limit = 0;  // force the matrix-free route
  const SpectralReport lz = singular_values(op, lopts);
  REQUIRE_FALSE(lz.dense);
  REQUIRE(lz.converged);
  REQUIRE(lz.sigma.size() >= 4);
  REQUIRE(lz.sigma_bottom.size() >= 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(lz.sigma[i] == Approx(dense_rep.sigma[i]).margin(1e-7));
    CHECK(lz.sigma_bottom[i] ==
          Approx(dense_rep.sigma[dense_rep.sigma.size() - 1 - i]).margin(1e-7));
  }
  CHECK(lz.largest() == lz.sigma.front());
  CHECK(lz.smallest() == lz.sigma_bottom.front());

  SolveOptions toponly = lopts;
  toponly.want_smallest = false;
  CHECK(singular_values(op, toponly).sigma_bottom.empty());

  // Full-spectrum consumers refuse the partial report.
  CHECK_THROWS_AS(h_eigenvalues(lz), PreconditionFailed);
  CHECK_THROWS_AS(esd_distance(lz, P.q), PreconditionFailed);
}

TEST_CASE("Lanczos on a generic symmetric operator", "[spectra][lanczos]") {
  const int dim = 80;
  SplitMix64 rng(99);
  Eigen::MatrixXd A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = rng.next_symmetric();
  auto apply = [&](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> vi(in, dim);
    Eigen::Map<Eigen::VectorXd> vo(out, dim);
    vo = A * vi;
  };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lam = es.eigenvalues();  // ascending

  LanczosOptions opt;
  opt.k = 5;
  const LanczosResult top = lanczos_extreme(apply, dim, SpectralEnd::largest, opt);
  REQUIRE(top.converged);
  REQUIRE(top.values.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(top.values[i] == Approx(lam[dim - 1 - i]).margin(1e-6));
  CHECK(std::is_sorted(top.values.rbegin(), top.values.rend()));

  const LanczosResult bot = lanczos_extreme(apply, dim, SpectralEnd::smallest, opt);
  REQUIRE(bot.converged);
  for (int i = 0; i < 5; ++i)
    CHECK(bot.values[i] == Approx(lam[i]).margin(1e-6));

  // Exhausting the space reproduces the full spectrum exactly.
  const int small = 10;
  Eigen::MatrixXd B = A.topLeftCorner(small, small);
  auto applyB = [&](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> vi(in, small);
    Eigen::Map<Eigen::VectorXd> vo(out, small);
    vo = B * vi;
  };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(B, Eigen::EigenvaluesOnly);
  LanczosOptions all;
  all.k = small;
  const LanczosResult full = lanczos_extreme(applyB, small, SpectralEnd::smallest, all);
  REQUIRE(full.converged);
  REQUIRE(full.values.size() == static_cast<std::size_t>(small));
  for (int i = 0; i < small; ++i)
    CHECK(full.values[i] == Approx(esB.eigenvalues()(i)).margin(1e-9));

  CHECK_THROWS_AS(lanczos_extreme(apply, 0, SpectralEnd::largest), DomainError);
}

TEST_CASE("empirical-law distance", "[spectra][esd]") {
  const double q = std::sqrt(3.0);

  // A perfect inverse-CDF sample sits at KS distance ~ 1/(2 M).
  const int M = 10000;
  std::vector<double> sample(M);
  for (int i = 0; i < M; ++i)
    sample[i] = mp_quantile((i + 0.5) / M, q);
  CHECK(esd_distance(sample, q) <= 0.01);

  // A point mass in the middle of the bulk is far from the law.
  const std::vector<double> point(M, q);
  CHECK(esd_distance(point, q) >= 0.4);

  CHECK_THROWS_AS(esd_distance(std::vector<double>{}, q), DomainError);

  // A moderate sampled instance lands near the limit.
  const ModelParams P = make_params(9.0, 5.0, 300);
  const BipartiteGraph g = sample_graph(P, 11);
  const SpectralReport rep = singular_values(build_operator(g, P));
  // measured 0.050 at this seed; finite-size scale, generous headroom
  CHECK(esd_distance(rep, P.q) <= 0.12);
}

TEST_CASE("Loewner sandwich checks", "[spectra][loewner]") {
  const ModelParams P = make_params(9.0, 5.0, 60);
  const BipartiteGraph g = sample_graph(P, 5);
  const CenteredOperator op = build_operator(g, P);
  const DegreeProfile prof = degree_profile(g, P);

  const LoewnerReport up = loewner_upper_check(op, prof);
  CHECK(up.converged);
  CHECK(up.ok);
  CHECK(up.margin <= up.bound);
  CHECK(up.bound == Approx(10.0 * std::pow(P.d, -1.5) * (prof.max_degree + P.d)).epsilon(1e-12));

  const LoewnerReport lo = loewner_lower_check(op, prof);
  CHECK(lo.ok);
  CHECK(lo.margin >= lo.bound);
  CHECK(lo.bound == Approx(-10.0 / std::sqrt(P.d)).epsilon(1e-12));

  // A stricter constant shrinks the allowance.
  const LoewnerReport tight = loewner_upper_check(op, prof, 0.001);
  CHECK(tight.bound < up.bound);

  // Degrees at or above d break the lower comparison's hypothesis.
  const ModelParams Ptiny = make_params(1.0, 0.5, 6);
  BipartiteGraph crowded;
  crowded.n = 6;
  crowded.m = 6;
  crowded.eu = {0, 0, 0};
  crowded.ev = {0, 1, 2};
  crowded.ew = {1.0, 1.0, 1.0};
  crowded.build_adjacency();
  const DegreeProfile cprof = degree_profile(crowded, Ptiny);
  CHECK_THROWS_AS(loewner_lower_check(build_operator(crowded, Ptiny), cprof),
                  PreconditionFailed);
}

TEST_CASE("relabeling vertices moves nothing observable", "[spectra][invariance]") {
  // gamma = 9 keeps every V1 degree far below d, as the lower check needs.
  const ModelParams P = make_params(9.0, 5.0, 40);
  const BipartiteGraph g = sample_graph(P, 55);
  const BipartiteGraph h = permuted_copy(g, 777);
  REQUIRE(h.num_edges() == g.num_edges());
  REQUIRE(graph_hash(h) != graph_hash(g));  // genuinely relabeled

  const CenteredOperator opg = build_operator(g, P);
  const CenteredOperator oph = build_operator(h, P);

  // Full singular spectrum is permutation-invariant (dense route).
  const SpectralReport rg = singular_values(opg);
  const SpectralReport rh = singular_values(oph);
  REQUIRE(rg.sigma.size() == rh.sigma.size());
  for (std::size_t i = 0; i < rg.sigma.size(); ++i)
    CHECK(rg.sigma[i] == Approx(rh.sigma[i]).margin(1e-12));

  // Dense lower margin is exactly invariant; the iterative upper margin
  // agrees to its convergence tolerance.
  const DegreeProfile pg = degree_profile(g, P);
  const DegreeProfile ph = degree_profile(h, P);
  CHECK(loewner_lower_check(opg, pg).margin ==
        Approx(loewner_lower_check(oph, ph).margin).margin(1e-12));
  CHECK(loewner_upper_check(opg, pg).margin ==
        Approx(loewner_upper_check(oph, ph).margin).margin(1e-6));
}
