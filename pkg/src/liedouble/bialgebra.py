"""Lie bialgebras, the bivector/operator dictionary, the Yang-Baxter family
of equations and weight-space decompositions of R-matrices.

A bivector ``C`` and the operator ``R`` correspond by contracting the first
slot of ``C`` with the metric: ``R z = i(g z) C``.  In coordinates
``R = T^T G`` with ``T`` the antisymmetric tensor of ``C``.  With this
choice ``C = sum Y_i ^ X_i`` for a Manin pair of dual bases gives
``R = pr_+ - pr_-`` and the dual bracket of ``b' = dC`` is carried by
``g^-1`` onto ``b_R``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra_core import (LieAlgebra, MetricalLieAlgebra, Report, check_jacobi, eye, inv,
                           is_exact, judge, max_abs, nullspace, zeros, float_array, jacobiator)
from .exterior import (CochainMap, Multivector, ad_action, check_cocycle, coboundary,
                       dual_algebra, pair, schouten_algebraic, check_ad_invariant)

TOL = 1e-10


class Bialgebra:
    """Lie algebra together with a cobracket ``b': g -> /\\^2 g``."""

    def __init__(self, algebra: LieAlgebra, cobracket: CochainMap, validate: bool = True):
        if cobracket.dim != algebra.dim:
            raise ValueError("cobracket dimension does not match the algebra")
        self.algebra = algebra
        self.cobracket = cobracket
        if validate:
            rep = check_bialgebra(self)
            if not rep.passed:
                raise ValueError(f"not a Lie bialgebra: {rep.details}")

    @property
    def dim(self):
        return self.algebra.dim

    def dual(self) -> LieAlgebra:
        """The Lie algebra on the dual space defined by the cobracket."""
        labels = [f"{s}*" for s in self.algebra.labels]
        return dual_algebra(self.cobracket, labels)


def check_bialgebra(B: Bialgebra, tol: float = TOL) -> Report:
    coc = check_cocycle(B.algebra, B.cobracket, tol)
    jac = check_jacobi(B.dual(), tol)
    return Report("bialgebra", max(coc.residual, jac.residual), coc.passed and jac.passed,
                  {"cocycle": coc, "dual_jacobi": jac})


@dataclass
class RMatrix:
    """Endomorphism ``R`` of a metrical Lie algebra.  ``skew`` records
    whether ``G R + R^T G = 0``; non-skew operators are allowed."""

    base: MetricalLieAlgebra
    op: np.ndarray

    def __post_init__(self):
        self.op = np.asarray(self.op)
        n = self.base.dim
        if self.op.shape != (n, n):
            raise ValueError("operator shape does not match the algebra")

    @property
    def skew(self) -> bool:
        d = max_abs(self.base.gram @ self.op + self.op.T @ self.base.gram)
        return d == 0 if (self.base.exact and is_exact(self.op)) else float(d) <= TOL

    @property
    def exact(self) -> bool:
        return self.base.exact and is_exact(self.op)


def r_from_c(M: MetricalLieAlgebra, C: Multivector) -> RMatrix:
    if C.deg != 2:
        raise ValueError("need a bivector")
    T = C.to_tensor()
    return RMatrix(M, T.T @ M.gram)


def c_from_r(M: MetricalLieAlgebra, R) -> Multivector:
    R = R.op if isinstance(R, RMatrix) else np.asarray(R)
    T = (R @ M.gram_inv).T
    asym = max_abs(T + T.T)
    if asym != 0 and (M.exact or float(asym) > TOL):
        raise ValueError("operator is not g-skew, so it has no bivector")
    return Multivector.from_tensor(T)


def _op(R):
    return R.op if isinstance(R, RMatrix) else np.asarray(R)


def r_bracket(L: LieAlgebra, R, x, y) -> np.ndarray:
    """``[x, y]_R = [Rx, y] + [x, Ry]``."""
    R = _op(R)
    return L.bracket(R @ x, y) + L.bracket(x, R @ y)


def yb_form(L: LieAlgebra, R, x, y) -> np.ndarray:
    """``B_R(x, y) = [Rx, Ry] - R [x, y]_R``."""
    R = _op(R)
    return L.bracket(R @ x, R @ y) - R @ r_bracket(L, R, x, y)


def bracket_pullback(L: LieAlgebra, A, B) -> np.ndarray:
    """``T[i, j, :] = [A e_i, B e_j]``."""
    return np.einsum("ai,bj,abk->ijk", A, B, L.c)


def r_bracket_constants(L: LieAlgebra, R) -> np.ndarray:
    """Structure constants of ``b_R`` in the basis of ``L``."""
    R = _op(R)
    one = eye(L.dim, is_exact(R) and L.exact)
    return bracket_pullback(L, R, one) + bracket_pullback(L, one, R)


def yb_tensor(L: LieAlgebra, R) -> np.ndarray:
    """``B[i, j, :] = B_R(e_i, e_j)``."""
    R = _op(R)
    return bracket_pullback(L, R, R) - _bracket_tensor_apply(R, r_bracket_constants(L, R))


def _bracket_tensor_apply(op, c):
    """``op`` applied to the output slot of a bracket tensor."""
    return np.einsum("ijm,km->ijk", c, np.asarray(op))


def invariance_defect(L: LieAlgebra, B: np.ndarray) -> np.ndarray:
    """``[X_i, B(X_j, X_k)] + cyclic``."""
    t = np.einsum("yzn,xnl->xyzl", B, L.c)   # [X_x, B(X_y, X_z)]
    return t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))


def ad_action_on_form(L: LieAlgebra, B: np.ndarray) -> np.ndarray:
    """``(ad(U)B)(Y, Z) = [U, B(Y,Z)] - B([U,Y], Z) - B(Y, [U,Z])`` as
    ``D[u, y, z, :]``."""
    t1 = np.einsum("yzn,unl->uyzl", B, L.c)
    t2 = np.einsum("uym,mzl->uyzl", L.c, B)
    t3 = np.einsum("uzm,yml->uyzl", L.c, B)
    return t1 - t2 - t3


YBE_MODES = ("YBE", "1-mYBE", "c-mYBE", "I-mYBE", "invariance")


def check_ybe(M: MetricalLieAlgebra, R, mode: str = "1-mYBE", tol: float = TOL,
              c=None, I=None) -> Report:
    """Residual of one member of the Yang-Baxter family.

    ``YBE``: ``B_R``; ``1-mYBE``: ``B_R + b``; ``c-mYBE``: ``B_R + c b``;
    ``I-mYBE``: ``B_R + I b``; ``invariance``: the cyclic sum
    ``[X, B_R(Y,Z)] + cyclic``.
    """
    L = M.algebra
    R = _op(R)
    B = yb_tensor(L, R)
    exact = L.exact and is_exact(R)
    if mode == "YBE":
        res = B
    elif mode == "1-mYBE":
        res = B + L.c
    elif mode == "c-mYBE":
        if c is None:
            raise ValueError("c-mYBE needs the constant c")
        res = B + L.c * c
        exact = exact and isinstance(c, (int, Fraction))
    elif mode == "I-mYBE":
        if I is None:
            raise ValueError("I-mYBE needs the invariant operator I")
        res = B + _bracket_tensor_apply(I, L.c)
        exact = exact and is_exact(np.asarray(I))
    elif mode == "invariance":
        res = invariance_defect(L, B)
    else:
        raise ValueError(f"unknown mode {mode!r}; choose from {YBE_MODES}")
    viol = max_abs(res)
    return Report(mode, viol, judge(viol, tol, exact))


def check_bivector_operator_dictionary(M: MetricalLieAlgebra, C: Multivector, tol: float = TOL) -> Report:
    """Check that ``g^-1`` carries the dual bracket of ``dC`` onto ``b_R`` and
    that ``<[C,C], a ^ gU ^ gV> = 2 <B_R(U,V), a>`` on basis elements."""
    L = M.algebra
    R = r_from_c(M, C).op
    n = L.dim
    Gi = M.gram_inv
    dual = dual_algebra(coboundary(L, C))
    viol1 = 0
    for a in range(n):
        for b in range(a + 1, n):
            al, be = L.basis(a), L.basis(b)
            lhs = Gi @ dual.bracket(al, be)
            rhs = r_bracket(L, R, Gi @ al, Gi @ be)
            viol1 = max(viol1, max_abs(lhs - rhs))
    CC = schouten_algebraic(L, C, C) if n >= 3 else None
    viol2 = 0
    for a in range(n):
        for u in range(n):
            for v in range(u + 1, n):
                al, U, V = L.basis(a), L.basis(u), L.basis(v)
                lhs = pair(CC, [al, M.lower(U), M.lower(V)]) if CC is not None else 0
                rhs = 2 * (al @ yb_form(L, R, U, V))
                viol2 = max(viol2, abs(lhs - rhs))
    exact = M.exact and C.exact
    p1, p2 = judge(viol1, tol, exact), judge(viol2, tol, exact)
    return Report("bivector_operator_dictionary", max(viol1, viol2), p1 and p2,
                  {"dual_bracket_is_b_R": Report("dual_bracket_is_b_R", viol1, p1),
                   "schouten_is_2B_R": Report("schouten_is_2B_R", viol2, p2)})


def bialgebra_condition_suite(M: MetricalLieAlgebra, R, tol: float = TOL) -> Report:
    """The five equivalent conditions for ``b' = d(C)``, ``R = C o g``:

    1. ``b'`` is a Lie bracket on the dual;
    2. ``b_R`` is a Lie bracket;
    3. ``[C, C]`` is ad-invariant;
    4. ``B_R`` is ad-invariant as a ``g``-valued 2-form;
    5. ``[X, B_R(Y,Z)] + cyclic = 0``.

    ``agree`` in the details records whether all five give the same verdict.
    """
    L = M.algebra
    R = _op(R)
    C = c_from_r(M, R)
    exact = M.exact and is_exact(R)
    r1 = check_jacobi(dual_algebra(coboundary(L, C)), tol)
    v2 = max_abs(jacobiator(r_bracket_constants(L, R))) if L.dim else 0
    r2 = Report("b_R_jacobi", v2, judge(v2, tol, exact))
    if L.dim >= 3:
        r3 = check_ad_invariant(L, schouten_algebraic(L, C, C), tol)
    else:
        r3 = Report("ad_invariant", 0, True)
    B = yb_tensor(L, R)
    v4 = max_abs(ad_action_on_form(L, B))
    r4 = Report("B_R_invariant", v4, judge(v4, tol, exact))
    v5 = max_abs(invariance_defect(L, B))
    r5 = Report("cyclic_identity", v5, judge(v5, tol, exact))
    reps = {"dual_jacobi": r1, "b_R_jacobi": r2, "schouten_invariant": r3,
            "B_R_invariant": r4, "cyclic_identity": r5}
    return _agreement_report("bialgebra_conditions", reps)


def _agreement_report(name: str, reps: dict) -> Report:
    verdicts = {bool(r.passed) for r in reps.values()}
    agree = len(verdicts) == 1
    res = max(r.residual for r in reps.values())
    return Report(name, res, agree and verdicts == {True}, {**reps, "agree": agree})


LAMBDA_MU_SAMPLES = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(-1)),
                     (Fraction(2), Fraction(3)), (Fraction(-1, 2), Fraction(1, 3)),
                     (Fraction(5, 4), Fraction(-3, 4))]


def rmatrix_condition_suite(M: MetricalLieAlgebra, R, tol: float = TOL, samples=None) -> Report:
    """Four equivalent characterizations of ``B_R + b = 0`` for skew ``R``:

    1. ``B_R + b = 0``;
    2. ``R_+[R_- X, R_- Y] = R_-[R_+ X, R_+ Y]`` with ``R_pm = R pm 1``;
    3. the two-parameter identity in ``(lam, mu)`` at sampled values;
    4. ``b_R`` is a Lie bracket and both ``R_pm`` are homomorphisms
       ``(g, b_R) -> (g, b)``.
    """
    L = M.algebra
    R = _op(R)
    n = L.dim
    exact = M.exact and is_exact(R)
    one = eye(n, exact)
    Rp, Rm = R + one, R - one
    if samples is None:
        samples = LAMBDA_MU_SAMPLES if exact else [(float(a), float(b)) for a, b in LAMBDA_MU_SAMPLES]

    v1 = max_abs(yb_tensor(L, R) + L.c)

    v2 = max_abs(_bracket_tensor_apply(Rp, bracket_pullback(L, Rm, Rm))
                 - _bracket_tensor_apply(Rm, bracket_pullback(L, Rp, Rp)))

    v3 = 0
    for lam, mu in samples:
        Rl, Rmu = R - lam * one, R - mu * one
        lhs = _bracket_tensor_apply(R, L.c) * (lam + mu)
        t1 = bracket_pullback(L, Rl, Rmu)     # [(R-lam)X, (R-mu)Y]
        t2 = bracket_pullback(L, one, Rmu)    # [X, (R-mu)Y]
        t3 = bracket_pullback(L, Rl, one)     # [(R-lam)X, Y]
        rhs = L.c * (1 + lam * mu) + t1 - _bracket_tensor_apply(Rl, t2) - _bracket_tensor_apply(Rmu, t3)
        v3 = max(v3, max_abs(lhs - rhs))

    cR = r_bracket_constants(L, R)
    v4j = max_abs(jacobiator(cR)) if n else 0
    v4h = max(max_abs(_bracket_tensor_apply(A, cR) - bracket_pullback(L, A, A)) for A in (Rp, Rm))
    v4 = max(v4j, v4h)

    reps = {"r_matrix_equation": Report("r_matrix_equation", v1, judge(v1, tol, exact)),
            "intertwining": Report("intertwining", v2, judge(v2, tol, exact)),
            "two_parameter_identity": Report("two_parameter_identity", v3, judge(v3, tol, exact)),
            "homomorphisms": Report("homomorphisms", v4, judge(v4, tol, exact))}
    return _agreement_report("r_matrix_conditions", reps)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


class AmbiguousClusterError(ValueError):
    """Eigenvalues fall into clusters that are too close to separate."""


@dataclass
class WeightDecomposition:
    """Generalized eigenspaces ``ker(R - lam)^N`` as ``(lam, basis rows)``."""

    blocks: list

    @property
    def weights(self):
        return [w for w, _ in self.blocks]

    def dims(self):
        return [b.shape[0] for _, b in self.blocks]

    def space(self, lam, tol: float = 1e-6):
        for w, b in self.blocks:
            if abs(w - lam) <= tol:
                return b
        return None

    def change_of_basis(self) -> np.ndarray:
        """Columns are the concatenated block bases."""
        return np.concatenate([b for _, b in self.blocks], axis=0).T


def weight_decomposition(R, cluster_eps: float = 1e-7) -> WeightDecomposition:
    """Cluster the spectrum of ``R`` and compute the generalized eigenspaces."""
    R = float_array(_op(R))
    n = R.shape[0]
    ev = np.linalg.eigvals(R)
    # eigenvalues of defective blocks spread like eps^(1/k); cluster loosely
    # by single linkage with radius scaled to the multiplicity
    clusters: list[list[complex]] = []
    for v in sorted(ev, key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        for cl in clusters:
            if min(abs(v - w) for w in cl) <= max(cluster_eps, 1e-4 * max(1.0, abs(v))):
                cl.append(v)
                break
        else:
            clusters.append([v])
    centers = [np.mean(cl) for cl in clusters]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) <= 10 * max(cluster_eps, 1e-4 * max(1.0, abs(centers[i]))):
                raise AmbiguousClusterError("eigenvalue clusters too close to separate")
    blocks = []
    for cl, lam in zip(clusters, centers):
        m = len(cl)
        if abs(lam.imag) <= cluster_eps:
            lam = complex(lam.real, 0.0)
            lam_r = lam.real
            if abs(lam_r - round(lam_r)) <= cluster_eps:
                lam_r = float(round(lam_r))
            lam = complex(lam_r, 0.0)
            K = np.linalg.matrix_power(R - lam_r * np.eye(n), m)
            basis = nullspace(K, tol=1e-8)
        else:
            K = np.linalg.matrix_power(R - lam * np.eye(n), m)
            basis = nullspace(K, tol=1e-8)
        if basis.shape[0] != m:
            raise AmbiguousClusterError(f"generalized eigenspace for {lam} has dim {basis.shape[0]}, expected {m}")
        blocks.append((lam, basis))
    if sum(b.shape[0] for _, b in blocks) != n:
        raise AmbiguousClusterError("weight spaces do not span")
    return WeightDecomposition(blocks)


def weight_product(lam, mu):
    """``lam o mu = (1 + lam mu) / (lam + mu)``."""
    s = lam + mu
    if s == 0:
        raise ZeroDivisionError("weight product undefined for lam + mu = 0")
    if isinstance(lam, (int, Fraction)) and isinstance(mu, (int, Fraction)):
        return Fraction(1 + lam * mu) / s
    return (1 + lam * mu) / s


def _component_outside(decomp: WeightDecomposition, v, keep) -> float:
    """Norm of the part of ``v`` lying outside the blocks listed in ``keep``."""
    P = decomp.change_of_basis()
    coef = np.linalg.solve(P, v)
    off = 0
    out = 0.0
    for k, (_, b) in enumerate(decomp.blocks):
        d = b.shape[0]
        if k not in keep:
            out = max(out, float(np.max(np.abs(coef[off:off + d]), initial=0.0)))
        off += d
    return out


def check_weight_brackets(M: MetricalLieAlgebra, R, decomp: WeightDecomposition | None = None,
                          tol: float = 1e-8) -> Report:
    """Bracket containment ``[g_lam, g_mu] in g_(lam o mu)``, orthogonality
    for ``lam + mu != 0``, ``[g_lam, g_-lam] = 0`` for ``lam != +-1`` and the
    subalgebra claims for ``g_(+-1)``."""
    Lf = M.algebra.to_float() if M.exact else M.algebra
    G = float_array(M.gram)
    if decomp is None:
        decomp = weight_decomposition(R)
    blocks = decomp.blocks
    close = lambda a, b: abs(a - b) <= 1e-6
    v_contain = v_orth = v_opp = v_sub = 0.0
    for a, (la, Ba) in enumerate(blocks):
        for b, (mu, Bb) in enumerate(blocks):
            brs = [Lf.bracket(x, y) for x in Ba for y in Bb]
            if not close(la + mu, 0):
                lm = weight_product(la, mu)
                keep = {k for k, (w, _) in enumerate(blocks) if close(w, lm)}
                for v in brs:
                    off = _component_outside(decomp, v, keep)
                    v_contain = max(v_contain, off)
                    if close(la, 1) or close(la, -1) or close(mu, 1) or close(mu, -1):
                        v_sub = max(v_sub, off)
                v_orth = max(v_orth, float(np.max(np.abs(Ba @ G @ Bb.T), initial=0.0)))
            elif not (close(la, 1) or close(la, -1)):
                v_opp = max(v_opp, max((float(np.max(np.abs(v))) for v in brs), default=0.0))
            else:
                pass
        if close(la, 1) or close(la, -1):
            keep = {a}
            for x in Ba:
                for y in Ba:
                    v_sub = max(v_sub, _component_outside(decomp, Lf.bracket(x, y), keep))
    reps = {"containment": Report("containment", v_contain, v_contain <= tol),
            "orthogonality": Report("orthogonality", v_orth, v_orth <= tol),
            "opposite_weights_commute": Report("opposite_weights_commute", v_opp, v_opp <= tol),
            "plus_minus_one_subalgebras": Report("plus_minus_one_subalgebras", v_sub, v_sub <= tol)}
    res = max(v_contain, v_orth, v_opp, v_sub)
    return Report("weight_brackets", res, all(r.passed for r in reps.values()), reps)
