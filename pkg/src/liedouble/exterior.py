"""Exterior algebra over a Lie algebra.

Conventions used throughout the package:

* basis of the degree-p part: strictly increasing index tuples ``(i1,...,ip)``;
* ``X ^ Y = X (x) Y - Y (x) X`` (no 1/2), so the antisymmetric tensor of a
  multivector has ``T[i1,...,ip]`` equal to the coefficient of the sorted
  tuple;
* the pairing with covectors is the determinant pairing
  ``<X1^...^Xp, a1^...^ap> = det(<a_i, X_j>)``, which for bivectors reads
  ``<U, a^b> = sum_ij T_ij a_i b_j``;
* insertion contracts the first slot: ``i(a)(X1^...^Xp) = sum_k (-1)^k
  a(X_{k+1}) X1^..^(omit k)..^Xp`` with ``k`` counted from zero.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .algebra_core import (LieAlgebra, MetricalLieAlgebra, Report, judge, max_abs,
                           nullspace, zeros, is_exact, float_array, format_scalar,
                           parse_scalar)


def _sort_sign(idx):
    """Sign of the permutation sorting ``idx`` and the sorted tuple, or
    ``(0, None)`` on a repeated index."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    # bubble sort parity; degrees are tiny
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class Multivector:
    """Element of the degree-``deg`` part of the exterior algebra of an
    ``dim``-dimensional space, stored as ``{sorted index tuple: coefficient}``.

    Instances are treated as immutable values.
    """

    __slots__ = ("dim", "deg", "terms", "exact")

    def __init__(self, dim: int, deg: int, terms: dict | None = None, exact: bool = True):
        if deg < 0 or deg > dim:
            raise ValueError(f"degree {deg} out of range for dimension {dim}")
        self.dim = dim
        self.deg = deg
        self.exact = exact
        clean = {}
        for idx, v in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != deg:
                raise ValueError("index tuple has the wrong length")
            if any(i < 0 or i >= dim for i in idx):
                raise ValueError("index out of range")
            s, key = _sort_sign(idx)
            if s == 0:
                continue
            clean[key] = clean.get(key, 0) + s * v
        self.terms = {k: (Fraction(v) if exact else v) for k, v in clean.items() if v != 0}

    # construction helpers -------------------------------------------------
    @classmethod
    def scalar(cls, dim: int, v, exact: bool = True):
        return cls(dim, 0, {(): v}, exact)

    @classmethod
    def zero(cls, dim: int, deg: int, exact: bool = True):
        return cls(dim, deg, {}, exact)

    @classmethod
    def basis(cls, dim: int, idx, exact: bool = True):
        return cls(dim, len(idx), {tuple(idx): 1}, exact)

    @classmethod
    def from_vector(cls, x) -> "Multivector":
        x = np.asarray(x)
        exact = is_exact(x)
        return cls(len(x), 1, {(i,): x[i] for i in range(len(x)) if x[i] != 0}, exact)

    @classmethod
    def from_tensor(cls, T) -> "Multivector":
        """Read the coefficients off an antisymmetric tensor (no check)."""
        T = np.asarray(T)
        dim = T.shape[0] if T.ndim else 0
        exact = is_exact(T)
        terms = {idx: T[idx] for idx in itertools.combinations(range(dim), T.ndim) if T[idx] != 0}
        return cls(dim, T.ndim, terms, exact)

    @classmethod
    def from_coords(cls, dim: int, deg: int, coords, exact: bool | None = None) -> "Multivector":
        coords = np.asarray(coords)
        if exact is None:
            exact = is_exact(coords)
        keys = list(itertools.combinations(range(dim), deg))
        return cls(dim, deg, {k: coords[n] for n, k in enumerate(keys) if coords[n] != 0}, exact)

    # arithmetic -------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, Multivector):
            raise TypeError("expected a Multivector")
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")

    def __add__(self, other):
        self._check(other)
        if other.deg != self.deg:
            if not other.terms:
                return self
            if not self.terms:
                return other
            raise ValueError("cannot add multivectors of different degree")
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return Multivector(self.dim, self.deg, t, self.exact and other.exact)

    def __neg__(self):
        return Multivector(self.dim, self.deg, {k: -v for k, v in self.terms.items()}, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return Multivector(self.dim, self.deg, {k: s * v for k, v in self.terms.items()}, self.exact)

    __rmul__ = scale

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if not self.terms and not other.terms:
            return True
        return self.deg == other.deg and (self - other).norm() == 0

    def __hash__(self):
        return hash((self.dim, self.deg, tuple(sorted(self.terms.items()))))

    def norm(self):
        """Max-abs coefficient."""
        if not self.terms:
            return Fraction(0) if self.exact else 0.0
        return max(abs(v) for v in self.terms.values())

    def is_zero(self, tol: float = 0.0) -> bool:
        n = self.norm()
        return n == 0 if self.exact or tol == 0 else float(n) <= tol

    def to_float(self) -> "Multivector":
        return Multivector(self.dim, self.deg, {k: float(v) if not isinstance(v, complex) else v
                                                for k, v in self.terms.items()}, False)

    def coords(self) -> np.ndarray:
        keys = list(itertools.combinations(range(self.dim), self.deg))
        out = zeros(len(keys), self.exact) if not any(isinstance(v, complex) for v in self.terms.values()) \
            else np.zeros(len(keys), dtype=complex)
        for n, k in enumerate(keys):
            if k in self.terms:
                out[n] = self.terms[k]
        return out

    def to_tensor(self) -> np.ndarray:
        """Fully antisymmetric tensor with ``T[sorted I]`` = coefficient."""
        cplx = any(isinstance(v, complex) for v in self.terms.values())
        T = np.zeros((self.dim,) * self.deg, dtype=complex) if cplx else zeros((self.dim,) * self.deg, self.exact)
        for idx, v in self.terms.items():
            for perm in itertools.permutations(range(self.deg)):
                p = tuple(idx[i] for i in perm)
                s, _ = _sort_sign(p)
                T[p] = s * v
        return T

    def to_json(self) -> dict:
        return {"deg": self.deg,
                "terms": [{"idx": list(k), "v": format_scalar(v)} for k, v in sorted(self.terms.items())]}

    @classmethod
    def from_json(cls, d: dict, dim: int) -> "Multivector":
        vals = [(tuple(t["idx"]), parse_scalar(t["v"])) for t in d.get("terms", [])]
        exact = all(isinstance(v, Fraction) for _, v in vals)
        return cls(dim, int(d["deg"]), dict(vals), exact)

    def __repr__(self):
        if not self.terms:
            return f"Multivector(deg={self.deg}, 0)"
        parts = [f"{v}*{'^'.join('e%d' % (i + 1) for i in k) or '1'}" for k, v in sorted(self.terms.items())]
        return "Multivector(" + " + ".join(parts) + ")"


def wedge(u: Multivector, v: Multivector) -> Multivector:
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    if u.deg + v.deg > u.dim:
        raise ValueError("degree overflow")
    t = {}
    for a, x in u.terms.items():
        for b, y in v.terms.items():
            s, key = _sort_sign(a + b)
            if s:
                t[key] = t.get(key, 0) + s * x * y
    return Multivector(u.dim, u.deg + v.deg, t, u.exact and v.exact)


def wedge_all(vs: Iterable[Multivector], dim: int, exact: bool = True) -> Multivector:
    out = Multivector.scalar(dim, 1, exact)
    for v in vs:
        out = wedge(out, v)
    return out


def vectors_wedge(vectors, exact: bool | None = None) -> Multivector:
    """Wedge of coordinate vectors ``x1 ^ x2 ^ ...``."""
    vectors = [np.asarray(x) for x in vectors]
    dim = len(vectors[0])
    if exact is None:
        exact = all(is_exact(x) for x in vectors)
    return wedge_all([Multivector.from_vector(x) for x in vectors], dim, exact)


def insertion(alpha, U: Multivector) -> Multivector:
    """Contract the first slot of ``U`` with the covector ``alpha``."""
    alpha = np.asarray(alpha)
    if U.deg == 0:
        return Multivector.zero(U.dim, 0, U.exact)
    t = {}
    for idx, c in U.terms.items():
        for k, i in enumerate(idx):
            if alpha[i] != 0:
                rest = idx[:k] + idx[k + 1:]
                t[rest] = t.get(rest, 0) + (-1) ** k * alpha[i] * c
    return Multivector(U.dim, U.deg - 1, t, U.exact and is_exact(alpha))


def insertion_map(maps: list, U: Multivector) -> Multivector:
    """Map-valued insertion ``sum_k maps[k] ^ i(eps^k) U`` where ``maps[k]``
    is a multivector attached to the k-th dual basis covector."""
    out = None
    for k, m in enumerate(maps):
        eps = zeros(U.dim, U.exact)
        eps[k] = 1
        term = wedge(m, insertion(eps, U))
        out = term if out is None else out + term
    return out


def pair(U: Multivector, covectors) -> object:
    """Determinant pairing of ``U`` with ``a1 ^ ... ^ ap``."""
    covectors = [np.asarray(a) for a in covectors]
    if len(covectors) != U.deg:
        raise ValueError("need one covector per degree")
    total = 0
    for idx, c in U.terms.items():
        M = np.array([[a[i] for i in idx] for a in covectors], dtype=object)
        total += c * _det_small(M)
    return total


def _det_small(M):
    n = M.shape[0]
    if n == 0:
        return 1
    if n == 1:
        return M[0, 0]
    return sum((-1) ** j * M[0, j] * _det_small(np.delete(M[1:], j, axis=1)) for j in range(n) if M[0, j] != 0)


def apply_linear(A, U: Multivector) -> Multivector:
    """Induced action of a linear map ``A`` on ``U`` (``X1^..^Xp -> AX1^..^AXp``)."""
    A = np.asarray(A)
    out = Multivector.zero(U.dim, U.deg, U.exact and is_exact(A))
    for idx, c in U.terms.items():
        cols = [A[:, i] for i in idx]
        out = out + vectors_wedge(cols, U.exact and is_exact(A)).scale(c) if cols else \
            out + Multivector.scalar(U.dim, c, U.exact)
    return out


def ad_action(L: LieAlgebra, x, U: Multivector) -> Multivector:
    """``ad_x`` extended to ``U`` as a derivation of the wedge product."""
    A = L.ad(x)
    t = {}
    for idx, c in U.terms.items():
        for k, i in enumerate(idx):
            col = A[:, i]
            for m in range(L.dim):
                if col[m] != 0:
                    new = idx[:k] + (m,) + idx[k + 1:]
                    s, key = _sort_sign(new)
                    if s:
                        t[key] = t.get(key, 0) + s * col[m] * c
    return Multivector(U.dim, U.deg, t, U.exact and L.exact)


# ---------------------------------------------------------------------------
# Schouten-Nijenhuis bracket
# ---------------------------------------------------------------------------

def _decomposable_bracket(L: LieAlgebra, I, J, exact: bool) -> Multivector:
    """Bracket of basis wedges ``X_I`` and ``X_J`` by the double-sum formula
    ``sum (-1)^(i+j) [X_i, Y_j] ^ (rest of X) ^ (rest of Y)``."""
    dim = L.dim
    out = Multivector.zero(dim, len(I) + len(J) - 1, exact)
    for a, i in enumerate(I):
        for b, j in enumerate(J):
            br = L.c[i, j]
            if not any(v != 0 for v in br):
                continue
            rest = I[:a] + I[a + 1:] + J[:b] + J[b + 1:]
            if len(set(rest)) != len(rest):
                continue
            s = (-1) ** (a + b)  # zero-based offsets give the same parity as 1-based
            tail = Multivector.basis(dim, rest, exact) if rest else Multivector.scalar(dim, 1, exact)
            out = out + wedge(Multivector.from_vector(br), tail).scale(s)
    return out


def schouten_algebraic(L: LieAlgebra, U: Multivector, V: Multivector) -> Multivector:
    """Algebraic Schouten-Nijenhuis bracket of two multivectors of degree >= 1."""
    if U.deg < 1 or V.deg < 1:
        raise ValueError("degree-0 arguments are not handled at the algebraic layer")
    if U.deg + V.deg - 1 > L.dim:
        return Multivector.zero(L.dim, L.dim, U.exact and V.exact)
    exact = U.exact and V.exact and L.exact
    out = Multivector.zero(L.dim, U.deg + V.deg - 1, exact)
    for I, x in U.terms.items():
        for J, y in V.terms.items():
            out = out + _decomposable_bracket(L, I, J, exact).scale(x * y)
    return out


def schouten_recursive(L: LieAlgebra, U: Multivector, V: Multivector) -> Multivector:
    """Independent evaluation of the same bracket.

    Uses ``[U, v] = -ad_v U`` for a vector ``v`` and the graded Leibniz rule
    ``[U, v ^ W] = [U, v] ^ W + (-1)^(p-1) v ^ [U, W]`` in the second
    argument; no double sum over factors is involved.
    """
    if U.deg < 1 or V.deg < 1:
        raise ValueError("degree-0 arguments are not handled at the algebraic layer")
    exact = U.exact and V.exact and L.exact
    p = U.deg
    out = Multivector.zero(L.dim, min(p + V.deg - 1, L.dim), exact)
    for J, y in V.terms.items():
        out = out + _recursive_basis(L, U, J, exact).scale(y)
    return out


def _recursive_basis(L, U, J, exact):
    dim = L.dim
    e0 = L.basis(J[0])
    first = -ad_action(L, e0, U)
    if len(J) == 1:
        return first
    rest = Multivector.basis(dim, J[1:], exact)
    if first.deg + rest.deg > dim:
        a = Multivector.zero(dim, dim, exact)
    else:
        a = wedge(first, rest)
    inner = _recursive_basis(L, U, J[1:], exact)
    v = Multivector.from_vector(e0)
    if v.deg + inner.deg > dim:
        b = Multivector.zero(dim, dim, exact)
    else:
        b = wedge(v, inner).scale((-1) ** (U.deg - 1))
    return a + b


# ---------------------------------------------------------------------------
# cochains
# ---------------------------------------------------------------------------

class CochainMap:
    """Linear map from the space (degree 1) into multivectors of degree
    ``target_deg``, stored by the images of basis vectors."""

    def __init__(self, images: list, target_deg: int | None = None):
        if not images:
            raise ValueError("need at least one image")
        self.images = list(images)
        self.dim = images[0].dim
        self.target_deg = images[0].deg if target_deg is None else target_deg
        self.exact = all(m.exact for m in images)
        for m in self.images:
            if m.terms and m.deg != self.target_deg:
                raise ValueError("images must share one degree")

    def __call__(self, x) -> Multivector:
        x = np.asarray(x)
        out = Multivector.zero(self.dim, self.target_deg, self.exact and is_exact(x))
        for i, m in enumerate(self.images):
            if x[i] != 0:
                out = out + m.scale(x[i])
        return out

    def tensor(self) -> np.ndarray:
        """``d[a, b, k]`` = component ``(a, b)`` of the antisymmetric tensor of
        the image of ``X_k`` (degree 2 only)."""
        if self.target_deg != 2:
            raise ValueError("tensor form only for maps into bivectors")
        T = np.stack([m.to_tensor() if m.terms else zeros((self.dim, self.dim), self.exact)
                      for m in self.images], axis=-1)
        return T

    @classmethod
    def from_tensor(cls, d) -> "CochainMap":
        d = np.asarray(d)
        return cls([Multivector.from_tensor(d[:, :, k]) for k in range(d.shape[2])], 2)

    def __sub__(self, other):
        return CochainMap([a - b for a, b in zip(self.images, other.images)], self.target_deg)

    def __add__(self, other):
        return CochainMap([a + b for a, b in zip(self.images, other.images)], self.target_deg)

    def scale(self, s):
        return CochainMap([a.scale(s) for a in self.images], self.target_deg)

    def norm(self):
        return max(m.norm() for m in self.images)

    def to_json(self) -> dict:
        return {"target_deg": self.target_deg, "images": [m.to_json() for m in self.images]}

    def __repr__(self):
        return f"CochainMap(dim={self.dim}, target_deg={self.target_deg})"


def coboundary(L: LieAlgebra, C: Multivector) -> CochainMap:
    """``X -> ad_X C``."""
    return CochainMap([ad_action(L, L.basis(i), C) for i in range(L.dim)], C.deg)


def cocycle_defect(L: LieAlgebra, bprime: CochainMap, i: int, j: int) -> Multivector:
    """``-b'([X_i,X_j]) + ad_{X_i} b'(X_j) - ad_{X_j} b'(X_i)``."""
    xi, xj = L.basis(i), L.basis(j)
    return (-bprime(L.bracket(xi, xj)) + ad_action(L, xi, bprime.images[j])
            - ad_action(L, xj, bprime.images[i]))


def check_cocycle(L: LieAlgebra, bprime: CochainMap, tol: float = 1e-10) -> Report:
    viol = 0
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            viol = max(viol, cocycle_defect(L, bprime, i, j).norm())
    return Report("cocycle", viol, judge(viol, tol, L.exact and bprime.exact))


def check_ad_invariant(L: LieAlgebra, U: Multivector, tol: float = 1e-10) -> Report:
    viol = 0
    for i in range(L.dim):
        viol = max(viol, ad_action(L, L.basis(i), U).norm())
    return Report("ad_invariant", viol, judge(viol, tol, L.exact and U.exact))


def dual_algebra(bprime: CochainMap, labels=None) -> LieAlgebra:
    """Lie algebra on the dual space with ``<[a, b], X> = <a ^ b, b'(X)>``.

    The constructor enforces antisymmetry only; run ``check_jacobi`` on the
    result to test whether ``b'`` is a cobracket.
    """
    return LieAlgebra(bprime.tensor(), labels)


def cobracket_from_dual(L_dual: LieAlgebra) -> CochainMap:
    """Inverse of :func:`dual_algebra`."""
    return CochainMap.from_tensor(L_dual.c)


def invariant_trivector(M: MetricalLieAlgebra) -> Multivector:
    """``B(a, b, c) = g([g^-1 a, g^-1 b], g^-1 c)`` as a 3-vector."""
    Gi = M.gram_inv
    c = M.algebra.c
    T = _trivector_tensor(Gi, c)
    return Multivector.from_tensor(T)


def _trivector_tensor(Gi, c):
    # T[i,j,k] = sum_ab Gi[a,i] Gi[b,j] c[a,b,k]
    t = np.tensordot(Gi, c, axes=([0], [0]))      # t[i,b,k]
    return np.tensordot(t, Gi, axes=([1], [0])).transpose(0, 2, 1)


def ad_invariant_space(L: LieAlgebra, deg: int) -> np.ndarray:
    """Basis (rows of coordinate vectors) of the ad-invariant multivectors of
    the given degree, obtained by solving ``ad_X U = 0`` for all basis X."""
    keys = list(itertools.combinations(range(L.dim), deg))
    rows = []
    for i in range(L.dim):
        cols = []
        for k in keys:
            cols.append(ad_action(L, L.basis(i), Multivector.basis(L.dim, k, L.exact)).coords())
        rows.append(np.stack(cols, axis=1))
    M = np.concatenate(rows, axis=0)
    return nullspace(M)
