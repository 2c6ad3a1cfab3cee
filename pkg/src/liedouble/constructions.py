"""Builders of metrical Lie algebras and of their decompositions.

Subspaces are carried as arrays whose rows are coordinate vectors.  When a
decomposition is aligned with the basis (the usual case for doubles built
here) the index sets are recorded as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra_core import (LieAlgebra, MetricalLieAlgebra, Report, check_jacobi,
                           check_metric_invariance, eye, inv, is_exact, judge, max_abs,
                           nullspace, rank, zeros, float_array, exact_array, det)
from .bialgebra import (Bialgebra, RMatrix, check_ybe, r_bracket_constants, bracket_pullback,
                        weight_decomposition, AmbiguousClusterError, _op)
from .exterior import CochainMap, Multivector

TOL = 1e-10


# ---------------------------------------------------------------------------
# subspace helpers
# ---------------------------------------------------------------------------

def _rows(B, n, exact):
    B = np.asarray(B)
    if B.size == 0:
        return zeros((0, n), exact)
    return B.reshape(-1, n)


def _vstack(blocks, n, exact):
    blocks = [b for b in blocks if b.shape[0]]
    if not blocks:
        return zeros((0, n), exact)
    return np.concatenate(blocks, axis=0)


def coordinates_in(B: np.ndarray, v: np.ndarray):
    """Least-squares coordinates of ``v`` in the row basis ``B`` and the
    residual of the fit (exact when both are exact)."""
    if is_exact(B) and is_exact(v):
        gram = B @ B.T
        coef = inv(gram) @ (B @ v)
        return coef, max_abs(coef @ B - v)
    Bf, vf = np.asarray(B, dtype=complex if np.iscomplexobj(B) or np.iscomplexobj(v) else float), np.asarray(v)
    coef, *_ = np.linalg.lstsq(Bf.T, vf, rcond=None)
    return coef, float(np.max(np.abs(coef @ Bf - vf), initial=0.0))


def subalgebra_defect(L: LieAlgebra, B: np.ndarray):
    """Largest distance of ``[b_i, b_j]`` from the span of the rows of ``B``."""
    if B.shape[0] == 0:
        return 0
    viol = 0
    for i in range(B.shape[0]):
        for j in range(i + 1, B.shape[0]):
            _, r = coordinates_in(B, L.bracket(B[i], B[j]))
            viol = max(viol, r)
    return viol


def restricted_constants(L: LieAlgebra, B: np.ndarray) -> np.ndarray:
    """Structure constants of the subalgebra spanned by the rows of ``B``."""
    k = B.shape[0]
    c = zeros((k, k, k), is_exact(B) and L.exact)
    for i in range(k):
        for j in range(k):
            coef, r = coordinates_in(B, L.bracket(B[i], B[j]))
            if (r != 0 if (is_exact(B) and L.exact) else r > 1e-8):
                raise ValueError("rows do not span a subalgebra")
            c[i, j] = coef
    return c


def derived_series_dims(L: LieAlgebra) -> list:
    """Dimensions of g, [g,g], [[g,g],[g,g]], ... until it stabilizes."""
    n = L.dim
    B = eye(n, L.exact)
    dims = [n]
    while B.shape[0]:
        vecs = [L.bracket(B[i], B[j]) for i in range(B.shape[0]) for j in range(i + 1, B.shape[0])]
        if not vecs:
            B = zeros((0, n), L.exact)
        else:
            V = np.array(vecs, dtype=B.dtype)
            B = _row_basis(V)
        if B.shape[0] == dims[-1]:
            break
        dims.append(B.shape[0])
    return dims


def _row_basis(V: np.ndarray) -> np.ndarray:
    """A basis of the row space."""
    if is_exact(V):
        import sympy
        from .algebra_core import _to_sympy, _from_sympy
        S = _to_sympy(V).T.columnspace()
        if not S:
            return zeros((0, V.shape[1]), True)
        return np.array([_from_sympy(s.T)[0] for s in S], dtype=object)
    if V.shape[0] == 0:
        return V
    u, s, vh = np.linalg.svd(V)
    r = int(np.sum(s > 1e-10 * max(s[0], 1.0))) if s.size else 0
    return vh[:r]


def is_solvable(L: LieAlgebra) -> bool:
    return derived_series_dims(L)[-1] == 0


# ---------------------------------------------------------------------------
# decompositions
# ---------------------------------------------------------------------------

@dataclass
class ManinDecomposition:
    """``g = g_+ (+) g_-`` with isotropic subalgebras."""

    base: MetricalLieAlgebra
    plus: np.ndarray
    minus: np.ndarray
    plus_idx: list | None = None
    minus_idx: list | None = None

    @classmethod
    def from_indices(cls, M: MetricalLieAlgebra, plus_idx, minus_idx):
        I = eye(M.dim, M.exact)
        return cls(M, I[list(plus_idx)], I[list(minus_idx)], list(plus_idx), list(minus_idx))

    def basis_matrix(self) -> np.ndarray:
        """Columns: plus basis then minus basis."""
        return _vstack([self.plus, self.minus], self.base.dim, self.base.exact).T

    def check(self, tol: float = TOL) -> Report:
        M = self.base
        G = M.gram
        exact = M.exact and is_exact(self.plus)
        iso = max(max_abs(self.plus @ G @ self.plus.T), max_abs(self.minus @ G @ self.minus.T))
        sub = max(subalgebra_defect(M.algebra, self.plus), subalgebra_defect(M.algebra, self.minus))
        span = rank(self.basis_matrix()) == M.dim and self.plus.shape[0] + self.minus.shape[0] == M.dim
        res = max(iso, sub)
        return Report("manin_decomposition", res, judge(res, tol, exact) and span,
                      {"isotropy": iso, "closure": sub, "spans": span})


@dataclass
class GaussDecomposition:
    """``g = g_+ (+) g^0 (+) g_-``: isotropic subalgebras ``g_pm`` orthogonal
    to the nondegenerate subalgebra ``g^0``."""

    base: MetricalLieAlgebra
    plus: np.ndarray
    zero: np.ndarray
    minus: np.ndarray

    def basis_matrix(self) -> np.ndarray:
        """Columns: minus, zero, plus."""
        return _vstack([self.minus, self.zero, self.plus], self.base.dim, self.base.exact).T

    def check(self, tol: float = TOL) -> Report:
        M = self.base
        G = M.gram
        exact = M.exact and is_exact(self.plus) and is_exact(self.zero) and is_exact(self.minus)
        iso = max(max_abs(self.plus @ G @ self.plus.T), max_abs(self.minus @ G @ self.minus.T))
        orth = max(max_abs(self.plus @ G @ self.zero.T), max_abs(self.minus @ G @ self.zero.T))
        sub = max(subalgebra_defect(M.algebra, B) for B in (self.plus, self.zero, self.minus))
        G0 = self.zero @ G @ self.zero.T
        nondeg = self.zero.shape[0] == 0 or rank(G0) == self.zero.shape[0]
        span = rank(self.basis_matrix()) == M.dim if M.dim else True
        res = max(iso, orth, sub)
        return Report("gauss_decomposition", res, judge(res, tol, exact) and nondeg and span,
                      {"isotropy": iso, "orthogonality": orth, "closure": sub,
                       "zero_nondegenerate": nondeg, "spans": span})

    def as_manin(self) -> ManinDecomposition:
        if self.zero.shape[0]:
            raise ValueError("middle block is not trivial")
        return ManinDecomposition(self.base, self.plus, self.minus)

    def zero_algebra(self) -> MetricalLieAlgebra:
        M = self.base
        c = restricted_constants(M.algebra, self.zero)
        G0 = self.zero @ M.gram @ self.zero.T
        return MetricalLieAlgebra(LieAlgebra(c), G0, validate=False)


# ---------------------------------------------------------------------------
# doubles and extensions
# ---------------------------------------------------------------------------

def manin_double(B: Bialgebra, validate: bool = True):
    """Bracket on ``g (+) g*`` pairing both halves through the natural pairing.

    Basis order: ``X_1..X_n`` then the dual basis ``xi^1..xi^n``.
    """
    L = B.algebra
    n = L.dim
    exact = L.exact and B.cobracket.exact
    c = L.c
    d = B.cobracket.tensor()  # d[a, b, k]: [xi^a, xi^b] = sum_k d[a,b,k] xi^k
    C = zeros((2 * n, 2 * n, 2 * n), exact)
    C[:n, :n, :n] = c
    C[n:, n:, n:] = d
    # [X_i, xi^a] = sum_m d[a,m,i] X_m - sum_m c[i,m,a] xi^m
    C[:n, n:, :n] = np.transpose(d, (2, 0, 1))
    C[:n, n:, n:] = -np.transpose(c, (0, 2, 1))
    C[n:, :n] = -np.transpose(C[:n, n:], (1, 0, 2))
    labels = list(L.labels) + [f"{s}*" for s in L.labels]
    double = LieAlgebra(C, labels, name=f"double({L.name})")
    G = zeros((2 * n, 2 * n), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(n):
        G[i, n + i] = one
        G[n + i, i] = one
    if validate:
        rep = check_jacobi(double)
        if not rep.passed:
            raise ValueError(f"double fails Jacobi (violation {float(rep.residual):.3g}); cobracket is not a cocycle")
    M = MetricalLieAlgebra(double, G, validate=validate)
    return M, ManinDecomposition.from_indices(M, range(n), range(n, 2 * n))


def bialgebra_from_manin(dec: ManinDecomposition) -> Bialgebra:
    """Read off ``(g_+, [,], b')`` from a Manin decomposition: the bracket of
    ``g_-`` transported through the pairing is the dual of ``b'``."""
    M = dec.base
    cp = restricted_constants(M.algebra, dec.plus)
    cm = restricted_constants(M.algebra, dec.minus)
    P = dec.plus @ M.gram @ dec.minus.T      # pairing matrix
    # dual basis of g_- w.r.t. the plus basis
    Q = inv(P) if M.exact else np.linalg.inv(P)
    # minus basis m_b = sum_a P[a,b] xi^a  => xi^a = sum_b m_b Q[b,a]
    # [xi^a, xi^b] = sum Q[p,a] Q[q,b] cm[p,q,r] m_r = ... in xi-coords: times P[k,r]
    d = np.einsum("pa,qb,pqr,kr->abk", Q, Q, cm, P)
    cob = CochainMap.from_tensor(d)
    return Bialgebra(LieAlgebra(cp), cob, validate=False)


def cotangent_double(L: LieAlgebra):
    """``T*g``: semidirect product with the coadjoint representation and the
    natural-pairing metric."""
    n = L.dim
    zero = CochainMap([Multivector.zero(n, 2, L.exact) for _ in range(n)], 2)
    return manin_double(Bialgebra(L, zero, validate=False))


def _check_skew_derivation(M: MetricalLieAlgebra, Dop, tol=TOL):
    L = M.algebra
    Dop = np.asarray(Dop)
    one = eye(L.dim, L.exact and is_exact(Dop))
    der = max_abs(np.einsum("ijm,km->ijk", L.c, Dop) - bracket_pullback(L, Dop, one) - bracket_pullback(L, one, Dop))
    skew = max_abs(M.gram @ Dop + Dop.T @ M.gram)
    exact = M.exact and is_exact(Dop)
    return judge(der, tol, exact), judge(skew, tol, exact), der, skew


def double_extension(M: MetricalLieAlgebra, d: LieAlgebra, rho: list, validate: bool = True) -> MetricalLieAlgebra:
    """``g_d = d (+) g (+) d*`` for a representation ``rho`` of ``d`` by skew
    derivations of ``(g, g)``.  Basis order: ``d``, ``g``, ``d*``."""
    k, n = d.dim, M.dim
    if len(rho) != k:
        raise ValueError("need one operator per basis element of d")
    for D in rho:
        isder, isskew, _, _ = _check_skew_derivation(M, D)
        if not (isder and isskew):
            raise ValueError("rho(D) must be a skew derivation")
    exact = M.exact and d.exact and all(is_exact(np.asarray(D)) for D in rho)
    N = 2 * k + n
    C = zeros((N, N, N), exact)
    sD, sX, sA = slice(0, k), slice(k, k + n), slice(k + n, N)
    C[sD, sD, sD] = d.c
    for a, D in enumerate(rho):
        D = np.asarray(D)
        for j in range(n):
            C[a, k + j, sX] = D[:, j]
            C[k + j, a, sX] = -D[:, j]
    C[sX, sX, sX] = M.algebra.c
    # central cocycle <D_a, c(X_i, X_j)> = g(rho(D_a) X_i, X_j)
    for a, D in enumerate(rho):
        cyc = np.asarray(D).T @ M.gram  # cyc[i, j] = g(D X_i, X_j)
        for i in range(n):
            for j in range(n):
                C[k + i, k + j, k + n + a] = C[k + i, k + j, k + n + a] + cyc[i, j]
    # [D_a, xi^b] = coad(D_a) xi^b = -sum_m c_d[a, m, b] xi^m
    for a in range(k):
        for b in range(k):
            for m in range(k):
                v = -d.c[a, m, b]
                C[a, k + n + b, k + n + m] = v
                C[k + n + b, a, k + n + m] = -v
    G = zeros((N, N), exact)
    G[sX, sX] = M.gram
    for a in range(k):
        G[a, k + n + a] = 1
        G[k + n + a, a] = 1
    labels = list(d.labels) + list(M.algebra.labels) + [f"{s}*" for s in d.labels]
    alg = LieAlgebra(C, labels, name="double_extension")
    out = MetricalLieAlgebra(alg, G, validate=False)
    if validate:
        j = check_jacobi(alg)
        inv_ = check_metric_invariance(out)
        if not (j.passed and inv_.passed):
            raise ValueError("double extension failed its checks")
    return out


def trivial_extension(M: MetricalLieAlgebra, scale=1) -> MetricalLieAlgebra:
    """Orthogonal sum with a 1-dimensional abelian algebra."""
    n = M.dim
    C = zeros((n + 1, n + 1, n + 1), M.exact)
    C[:n, :n, :n] = M.algebra.c
    G = zeros((n + 1, n + 1), M.exact)
    G[:n, :n] = M.gram
    G[n, n] = Fraction(scale) if M.exact else float(scale)
    return MetricalLieAlgebra(LieAlgebra(C, list(M.algebra.labels) + ["T"]), G, validate=True)


def cyclicity_defect(w: np.ndarray) -> object:
    """``max |<a, w(b,c)> - <b, w(c,a)>|`` over basis triples, with
    ``w[i, j, m]`` the ``xi^m`` component of ``w(a_i, a_j)``."""
    return max_abs(np.transpose(w, (1, 2, 0)) - np.transpose(w, (2, 0, 1)))


def tstar_extension(a: LieAlgebra, w=None) -> MetricalLieAlgebra:
    """``a (+) a*`` with bracket ``([x,y], w(x,y) + coad(x) beta - coad(y) alpha)``
    and the natural-pairing metric.  Not validated: run Jacobi and
    invariance checks on the result."""
    n = a.dim
    if w is None:
        w = zeros((n, n, n), a.exact)
    w = np.asarray(w)
    exact = a.exact and is_exact(w)
    C = zeros((2 * n, 2 * n, 2 * n), exact)
    C[:n, :n, :n] = a.c
    C[:n, :n, n:] = w
    C[:n, n:, n:] = -np.transpose(a.c, (0, 2, 1))
    C[n:, :n, n:] = -np.transpose(C[:n, n:, n:], (1, 0, 2))
    G = zeros((2 * n, 2 * n), exact)
    for i in range(n):
        G[i, n + i] = 1
        G[n + i, i] = 1
    labels = list(a.labels) + [f"{s}*" for s in a.labels]
    return MetricalLieAlgebra(LieAlgebra(C, labels, name="tstar_extension"), G, validate=False)


# ---------------------------------------------------------------------------
# R-matrices from decompositions
# ---------------------------------------------------------------------------

def r_from_manin(dec: ManinDecomposition) -> RMatrix:
    """``R = pr_+ - pr_-``."""
    M = dec.base
    P = dec.basis_matrix()
    k = dec.plus.shape[0]
    exact = M.exact and is_exact(P)
    S = eye(M.dim, exact)
    for i in range(k, M.dim):
        S[i, i] = -S[i, i]
    R = P @ S @ (inv(P) if exact else np.linalg.inv(P))
    return RMatrix(M, R)


def projections(dec) -> dict:
    """Projection operators onto the blocks of a decomposition."""
    M = dec.base
    if isinstance(dec, ManinDecomposition):
        blocks = {"plus": dec.plus, "minus": dec.minus}
    else:
        blocks = {"minus": dec.minus, "zero": dec.zero, "plus": dec.plus}
    P = _vstack(list(blocks.values()), M.dim, M.exact).T
    exact = M.exact and is_exact(P)
    Pinv = inv(P) if exact else np.linalg.inv(P)
    out = {}
    off = 0
    for name, B in blocks.items():
        k = B.shape[0]
        out[name] = P[:, off:off + k] @ Pinv[off:off + k, :]
        off += k
    return out


def _range_basis(A: np.ndarray) -> np.ndarray:
    return _row_basis(np.asarray(A).T)


def gauss_from_r(R, eps: float = 1e-7):
    """Gauss decomposition of an R-matrix: ``g_pm`` are the generalized
    eigenspaces for ``pm 1`` and ``g^0`` the sum of the others.  Returns the
    decomposition and ``A = (R+1)(R-1)^-1`` on ``g^0`` (in the ``g^0`` row
    basis), after checking that ``A`` is orthogonal, fixed-point free, and
    that ``g^0`` is solvable."""
    if not isinstance(R, RMatrix):
        raise TypeError("need an RMatrix")
    M = R.base
    op = R.op
    n = M.dim
    exact = R.exact
    one = eye(n, exact)
    if not exact:
        # guard against eigenvalues that are nearly but not exactly +-1
        ev = np.linalg.eigvals(float_array(op))
        for s in (1, -1):
            dist = np.abs(ev - s)
            if np.any((dist > eps) & (dist < 10 * eps)):
                raise AmbiguousClusterError(f"eigenvalue cluster near {s} is ambiguous")
    Pp = np.linalg.matrix_power(op - one, n) if not exact else _mpow(op - one, n)
    Pm = np.linalg.matrix_power(op + one, n) if not exact else _mpow(op + one, n)
    plus = nullspace(Pp, tol=1e-8)
    minus = nullspace(Pm, tol=1e-8)
    zero = _range_basis(Pp @ Pm)
    if not exact:
        plus, minus, zero = np.real_if_close(plus), np.real_if_close(minus), np.real_if_close(zero)
    dec = GaussDecomposition(M, _rows(plus, n, exact), _rows(zero, n, exact), _rows(minus, n, exact))
    k = dec.zero.shape[0]
    if k == 0:
        return dec, zeros((0, 0), exact)
    Z = dec.zero
    # R restricted to g^0 in the row basis Z: R Z^T = Z^T R0
    R0 = _restrict(op, Z)
    one0 = eye(k, exact)
    A = (R0 + one0) @ (inv(R0 - one0) if exact else np.linalg.inv(R0 - one0))
    G0 = Z @ M.gram @ Z.T
    orth = max_abs(A.T @ G0 @ A - G0)
    fixed = det(A - one0)
    if not judge(orth, 1e-8, exact):
        raise ValueError("A is not orthogonal on g^0")
    if fixed == 0 or (not exact and abs(fixed) < 1e-12):
        raise ValueError("A has a fixed point")
    if not is_solvable(LieAlgebra(restricted_constants(M.algebra, Z))):
        raise ValueError("g^0 is not solvable")
    return dec, A


def _mpow(A, k):
    out = eye(A.shape[0], True)
    for _ in range(k):
        out = out @ A
    return out


def _restrict(op, Z):
    """Matrix of ``op`` on the invariant subspace with row basis ``Z``."""
    exact = is_exact(op) and is_exact(Z)
    if exact:
        gram = Z @ Z.T
        return (inv(gram) @ Z @ (op @ Z.T))
    coef, *_ = np.linalg.lstsq(Z.T, op @ Z.T, rcond=None)
    return coef


def r_from_gauss(dec: GaussDecomposition, R0=None) -> RMatrix:
    """``R = diag(-1, R0, 1)`` in the (minus, zero, plus) blocks, with ``R0``
    given in the row basis of ``g^0``."""
    M = dec.base
    k = dec.zero.shape[0]
    exact = M.exact and is_exact(dec.basis_matrix())
    if R0 is None:
        R0 = zeros((0, 0), exact)
    R0 = np.asarray(R0)
    if R0.shape != (k, k):
        raise ValueError("R0 has the wrong shape")
    if k:
        one0 = eye(k, exact and is_exact(R0))
        for s in (1, -1):
            dv = det(R0 - s * one0)
            if dv == 0 or (not is_exact(R0) and abs(dv) < 1e-12):
                raise ValueError("R0 has an eigenvalue +-1")
    km, kp = dec.minus.shape[0], dec.plus.shape[0]
    exact = exact and is_exact(R0)
    S = zeros((M.dim, M.dim), exact)
    for i in range(km):
        S[i, i] = -1
    S[km:km + k, km:km + k] = R0
    for i in range(km + k, M.dim):
        S[i, i] = 1
    P = dec.basis_matrix()
    R = P @ S @ (inv(P) if exact else np.linalg.inv(P))
    return RMatrix(M, R)


def r_extension(dec: GaussDecomposition, R0) -> RMatrix:
    """``R = pr_+ + R0 o pr_0 - pr_-`` with ``R0`` an operator on the whole
    space that preserves ``g^0``; equals :func:`r_from_gauss` when ``R0``
    is given on ``g^0``."""
    pr = projections(dec)
    R0 = np.asarray(R0)
    return RMatrix(dec.base, pr["plus"] + R0 @ pr["zero"] - pr["minus"])


def check_nilpotent_chain(L: LieAlgebra, block: np.ndarray, N: np.ndarray, tol: float = 1e-10) -> Report:
    """For a nilpotent ``N`` acting on the block (matrix in its row basis),
    verify that the kernels ``ker N^i`` are ideals of the block subalgebra."""
    k = block.shape[0]
    exact = L.exact and is_exact(block) and is_exact(N)
    c = restricted_constants(L, block)
    sub = LieAlgebra(c)
    viol = 0
    P = eye(k, exact)
    for i in range(1, k + 1):
        P = P @ N
        K = nullspace(P)
        for x in K:
            for j in range(k):
                _, r = coordinates_in(K, sub.bracket(x, sub.basis(j))) if K.shape[0] else (None, 0)
                viol = max(viol, r)
    nil = max_abs(P)
    return Report("nilpotent_chain", max(viol, nil), judge(max(viol, nil), tol, exact))


# ---------------------------------------------------------------------------
# Cayley transforms
# ---------------------------------------------------------------------------

def cayley(A) -> np.ndarray:
    """``(A + 1)(A - 1)^-1``; the same formula inverts itself."""
    A = np.asarray(A)
    exact = is_exact(A)
    one = eye(A.shape[0], exact)
    dv = det(A - one)
    if dv == 0 or (not exact and abs(dv) < 1e-14):
        raise ValueError("A - 1 is singular (fixed point)")
    return (A + one) @ (inv(A - one) if exact else np.linalg.inv(A - one))


def cayley_inverse(R) -> np.ndarray:
    return cayley(_op(R))


def is_orthogonal(G, A, tol: float = 1e-10) -> bool:
    d = max_abs(np.asarray(A).T @ G @ np.asarray(A) - G)
    return judge(d, tol, is_exact(np.asarray(A)) and is_exact(G))


def cotangent_derivation(D) -> np.ndarray:
    """Extend a derivation ``D`` of ``g`` to the skew derivation
    ``(D, -D^T)`` of ``T*g``."""
    D = np.asarray(D)
    n = D.shape[0]
    exact = is_exact(D)
    out = zeros((2 * n, 2 * n), exact)
    out[:n, :n] = D
    out[n:, n:] = -D.T
    return out


def grading_automorphism(weights, q) -> np.ndarray:
    """``exp(t D)`` for a diagonal derivation with integer weights, written
    exactly as ``diag(q^w)`` with ``q = e^t``."""
    exact = isinstance(q, (int, Fraction))
    vals = [(Fraction(q) ** int(w)) if exact else float(q) ** w for w in weights]
    A = zeros((len(vals), len(vals)), exact)
    for i, v in enumerate(vals):
        A[i, i] = v
    return A


def exp_derivation(D, t: float) -> np.ndarray:
    from scipy.linalg import expm
    return expm(t * float_array(D))


# ---------------------------------------------------------------------------
# decompositions from derivations
# ---------------------------------------------------------------------------

def _rational_eigenvalues(D):
    import sympy
    from .algebra_core import _to_sympy
    ev = _to_sympy(D).eigenvals()
    out = []
    for v in ev:
        if not v.is_rational:
            return None
        out.append(Fraction(int(v.p), int(v.q)))
    return out


def decomposition_from_derivation(M: MetricalLieAlgebra, D, eps: float = 1e-7) -> GaussDecomposition:
    """Gauss decomposition attached to a skew derivation: ``g^0`` is the
    generalized kernel, ``g_+`` collects weights with positive real part
    (or zero real part and positive imaginary part) and ``g_-`` the negated
    weights."""
    D = np.asarray(D)
    isder, isskew, der, skew = _check_skew_derivation(M, D)
    if not isder:
        raise ValueError(f"not a derivation (defect {float(der):.3g})")
    if not isskew:
        raise ValueError(f"not g-skew (defect {float(skew):.3g})")
    n = M.dim
    exact = M.exact and is_exact(D)
    ev = _rational_eigenvalues(D) if exact else None
    if ev is not None:
        one = eye(n, True)
        blocks = {}
        for lam in ev:
            blocks[lam] = nullspace(_mpow(D - lam * one, n))
        plus = _vstack([b for l, b in blocks.items() if l > 0], n, True)
        minus = _vstack([b for l, b in blocks.items() if l < 0], n, True)
        zero = blocks.get(Fraction(0), zeros((0, n), True))
        dec = GaussDecomposition(M, plus, zero, minus)
    else:
        wd = weight_decomposition(D, eps)
        P, Z, Mi = [], [], []
        for lam, B in wd.blocks:
            if abs(lam) <= eps:
                Z.append(np.real(B))
            elif abs(lam.real) <= eps:
                raise ValueError("purely imaginary weights do not split over the reals")
            elif lam.real > 0:
                P.append(B)
            else:
                Mi.append(B)
        Ms = M if not M.exact else M.to_float()

        def realify(blocks):
            vecs = []
            for B in blocks:
                if np.iscomplexobj(B) and np.max(np.abs(B.imag), initial=0.0) > 1e-12:
                    vecs.extend([B.real, B.imag])
                else:
                    vecs.append(np.real(B))
            return _row_basis(np.concatenate(vecs, axis=0)) if vecs else np.zeros((0, n))

        dec = GaussDecomposition(Ms, realify(P), realify(Z) if Z else np.zeros((0, n)), realify(Mi))
    rep = dec.check(1e-8)
    if not rep.passed:
        raise ValueError(f"derivation did not give a Gauss decomposition: {rep.details}")
    return dec


def derivation_orthogonality_defect(M: MetricalLieAlgebra, D, mu, l: int, x, y):
    """``g((D - mu)^l x, y) - g(x, (-D - mu)^l y)``."""
    D = np.asarray(D, dtype=complex if isinstance(mu, complex) else None)
    n = D.shape[0]
    one = np.eye(n)
    A = np.linalg.matrix_power(D - mu * one, l)
    B = np.linalg.matrix_power(-D - mu * one, l)
    G = float_array(M.gram)
    return (A @ x) @ G @ y - x @ G @ (B @ y)


# ---------------------------------------------------------------------------
# the diagonal / graph pair in g (+) g
# ---------------------------------------------------------------------------

def direct_sum_double(M: MetricalLieAlgebra) -> MetricalLieAlgebra:
    """``g (+) g`` with the metric ``g (+) (-g)``."""
    n = M.dim
    C = zeros((2 * n, 2 * n, 2 * n), M.exact)
    C[:n, :n, :n] = M.algebra.c
    C[n:, n:, n:] = M.algebra.c
    G = zeros((2 * n, 2 * n), M.exact)
    G[:n, :n] = M.gram
    G[n:, n:] = -M.gram
    labels = [f"{s}'" for s in M.algebra.labels] + [f"{s}''" for s in M.algebra.labels]
    return MetricalLieAlgebra(LieAlgebra(C, labels), G, validate=False)


def diagonal_graph_witness(M: MetricalLieAlgebra, R, tol: float = TOL) -> Report:
    """For an R-matrix, check that the diagonal and the graph
    ``{((R+1)X, (R-1)X)}`` are complementary isotropic subalgebras of
    ``g (+) g`` (metric ``g (+) -g``), and that ``X -> ((R+1)X, (R-1)X)`` is a
    homomorphism from ``(g, b_R)``."""
    R = _op(R)
    n = M.dim
    exact = M.exact and is_exact(R)
    one = eye(n, exact)
    D2 = direct_sum_double(M)
    diag = np.concatenate([one, one], axis=1)
    graph = np.concatenate([(R + one).T, (R - one).T], axis=1)
    dec = ManinDecomposition(D2, diag, graph)
    rep = dec.check(tol)
    # homomorphism: Phi [X, Y]_R = [Phi X, Phi Y]
    cR = r_bracket_constants(M.algebra, R)
    hom = 0
    for i in range(n):
        for j in range(i + 1, n):
            lhs = graph.T @ cR[i, j]
            rhs = D2.algebra.bracket(graph[i], graph[j])
            hom = max(hom, max_abs(lhs - rhs))
    inj = rank(graph) == n
    res = max(rep.residual, hom)
    ok = rep.passed and judge(hom, tol, exact) and inj
    return Report("diagonal_graph_witness", res, ok,
                  {"isotropy": rep.details["isotropy"], "closure": rep.details["closure"],
                   "complementary": rep.details["spans"], "homomorphism": hom, "injective": inj})


def split_in_double(R, U, V):
    """Write ``(U, V) = (X, X) + ((R+1)Y, (R-1)Y)`` using
    ``2X = R(V - U) + V + U`` and ``2Y = U - V``."""
    R = _op(R)
    X = (R @ (V - U) + V + U) / 2
    Y = (U - V) / 2
    return X, Y
