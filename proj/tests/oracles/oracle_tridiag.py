#!/usr/bin/env python3
"""Independent oracle for the tridiagonal radial models, the coefficient
recurrences, and exact biregular-tree residuals.

Values printed here are frozen into tests/test_localtree.cpp.
"""

import math

import numpy as np


def build_z(alpha, q, side, r):
    """(r+1)-dim tridiagonal: off[0]=sqrt(alpha); odd k -> 1/q, even k -> q
    for a V2 root; swapped for V1."""
    off = [math.sqrt(alpha)]
    for k in range(1, r):
        if side == 2:
            off.append(1.0 / q if k % 2 == 1 else q)
        else:
            off.append(q if k % 2 == 1 else 1.0 / q)
    T = np.zeros((r + 1, r + 1))
    for k, e in enumerate(off):
        T[k, k + 1] = T[k + 1, k] = e
    return T


def lambda_q(t, q):
    return math.sqrt(t + q**-2 + 1.0 / (t - q**2))


def lambda_q_inv(t, q):
    return math.sqrt(t + q**2 + 1.0 / (t - q**-2))


def coefficients(alpha, q, side, r):
    qq = q if side == 2 else 1.0 / q
    lam = lambda_q(alpha, q) if side == 2 else lambda_q_inv(alpha, q)
    s = alpha - qq * qq
    u = [1.0, lam / math.sqrt(alpha), math.sqrt(alpha) / (qq * s)]
    while len(u) <= r:
        u.append(u[-2] / s)
    return np.array(u[: r + 1]), lam


def tree_residual(d1, d2, root_degree, r):
    """Exact biregular tree, root on V2 with root_degree children; coupling
    model d = sqrt(d1*d2), q = (d2/d1)^(1/4).  Build the tree out to depth
    r+1, place the layered vector supported on layers 0..r, and measure
    ||Av/sqrt(d) - lam v||."""
    d = math.sqrt(d1 * d2)
    q = (d2 / d1) ** 0.25
    alpha = root_degree / d

    # Layer sizes: S0=1 (V2), children alternate V1 (d1 kids) / V2 (d2 kids).
    sizes = [1, root_degree]
    side = [2, 1]
    for j in range(2, r + 2):
        kids = d1 if side[-1] == 1 else d2
        sizes.append(sizes[-1] * kids)
        side.append(2 if side[-1] == 1 else 1)

    u, lam = coefficients(alpha, q, 2, r)
    u = u / np.linalg.norm(u)

    # Radial reduction is exact: the residual vector has one component on
    # layer r (the eigen equation there is missing its downward term) and one
    # on layer r+1 (mass pushed out of the support).  Work per layer with
    # c_j = u_j / sqrt(|S_j|).
    c = [u[j] / math.sqrt(sizes[j]) for j in range(r + 1)]
    dd = math.sqrt(d)

    res2 = 0.0
    # Interior layers 0..r-1 satisfy the equation exactly by construction;
    # verify that while we are here.
    kids0 = root_degree
    lhs = kids0 * c[1] / dd
    assert abs(lhs - lam * c[0]) < 1e-12 * max(1.0, abs(lam * c[0]))
    for j in range(1, r):
        kids = d1 if side[j] == 1 else d2
        lhs = (c[j - 1] + kids * c[j + 1]) / dd
        assert abs(lhs - lam * c[j]) < 1e-12, (j, lhs, lam * c[j])
    # Layer r defect: (c_{r-1}) / sqrt(d) - lam c_r  (no c_{r+1} term in v).
    defect_r = c[r - 1] / dd - lam * c[r]
    res2 += sizes[r] * defect_r**2
    # Layer r+1 receives c_r / sqrt(d) along each of its parent edges.
    spill = c[r] / dd
    res2 += sizes[r + 1] * spill**2
    return math.sqrt(res2), lam, alpha, q


def main():
    s3 = math.sqrt(3.0)

    print("== Z extreme eigenvalues ==")
    for r in (10, 30, 60):
        T = build_z(5.0, s3, 2, r)
        ev = np.linalg.eigvalsh(T)
        print(f"Z2(alpha=5, q=sqrt3, r={r}): top = {ev[-1]:.15f}  err = {ev[-1] - lambda_q(5, s3):.3e}")
    for r in (30, 60):
        T = build_z(1.0, s3, 2, r)
        ev = np.linalg.eigvalsh(T)
        sp = ev[ev > 1e-9].min()
        print(f"Z2(alpha=1, q=sqrt3, r={r}): smallest positive = {sp:.15f}  target = {lambda_q(1, s3):.15f}")
    T = build_z(4.0, math.sqrt(2.0), 1, 60)
    ev = np.linalg.eigvalsh(T)
    print(f"Z1(alpha=4, q=sqrt2, r=60): top = {ev[-1]:.15f}  Linv = {lambda_q_inv(4, math.sqrt(2.0)):.15f}")

    print("== bulk containment: each side's model at its own mean degree ==")
    # Measure distance to bulk UNION {0}: small models of the V1-rooted chain
    # carry a near-zero eigenvalue pair that decays geometrically in r, so the
    # honest containment statement allows |lambda| <= tol as well as the bulk.
    lo, hi = s3 - 1 / s3, s3 + 1 / s3

    def worst_distance(alpha, side, r_lo, r_hi):
        worst = 0.0
        for r in range(r_lo, r_hi + 1):
            ev = np.linalg.eigvalsh(build_z(alpha, s3, side, r))
            for lam in ev:
                a = abs(lam)
                dist = min(max(lo - a, a - hi, 0.0), a)
                worst = max(worst, dist)
        return worst

    for r_lo in (2, 5, 8):
        w1 = worst_distance(1.0 / 3.0, 1, r_lo, 200)
        w2 = worst_distance(3.0, 2, r_lo, 200)
        print(f"r in [{r_lo},200]: Z1(q^-2) worst = {w1:.6f}  Z2(q^2) worst = {w2:.6f}")
    # Frozen conclusion: Z2(q^2) is exactly contained for every r >= 2; Z1(q^-2)
    # has a stray pair of 0.174808 / 0.057224 / 0.006336 at r in {2..4}/5/8,
    # within a 0.05 tolerance for all r >= 8.

    print("== doubling improvement (alpha = q^2+1.5) ==")
    for q in (math.sqrt(2.0), s3):
        alpha = q * q + 1.5
        lam = lambda_q(alpha, q)
        for r in (8, 16, 32):
            e1 = abs(np.linalg.eigvalsh(build_z(alpha, q, 2, r))[-1] - lam)
            e2 = abs(np.linalg.eigvalsh(build_z(alpha, q, 2, 2 * r))[-1] - lam)
            print(f"q={q:.4f} r={r}: err(r)={e1:.3e} err(2r)={e2:.3e} factor={e1 / e2:.1f}")

    print("== coefficients ==")
    u, lam = coefficients(5.0, s3, 2, 6)
    print("u1/u0 =", f"{u[1]:.15f}", " u2/u0 =", f"{u[2]:.15f}")
    print("lam =", f"{lam:.15f}")
    print("u3 =", f"{u[3]:.15f}", " u4 =", f"{u[4]:.15f}")
    # Transfer matrix at eta = Lambda_q(alpha): lower eigenvalue 1/(alpha-q^2).
    eta, q2 = lam, 3.0
    T2 = np.array([[eta * eta - q2, -eta / s3], [eta / s3, -1.0 / q2]])
    evals = np.linalg.eigvals(T2)
    print("det T =", f"{np.linalg.det(T2):.15f}", " eigs =", sorted(abs(evals)))
    # Recurrence: [u4, u3] = T [u2, u1].
    v = T2 @ np.array([u[2], u[1]])
    print("T[u2,u1] =", v, " expect [u4,u3] =", [u[4], u[3]])

    print("== exact tree residuals (d1=2, d2=8, root degree 16) ==")
    for r in (3, 5, 7):
        res, lam, alpha, q = tree_residual(2, 8, 16, r)
        print(f"r={r}: residual = {res:.15f}  lam = {lam:.15f} alpha = {alpha} q = {q}")
    r3 = tree_residual(2, 8, 16, 3)[0]
    r5 = tree_residual(2, 8, 16, 5)[0]
    r7 = tree_residual(2, 8, 16, 7)[0]
    print(f"decay factors: r3/r5 = {r3 / r5:.6f}  r5/r7 = {r5 / r7:.6f}")


if __name__ == "__main__":
    main()
