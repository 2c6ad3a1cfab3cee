"""Lie algebras given by structure constants, invariant metrics, and the
elementary operators built from them (ad, coad, musical maps).

Two scalar modes are supported.  Exact mode keeps ``fractions.Fraction``
entries in numpy object arrays; float mode uses float64.  An algebra lives
in exactly one mode.  Going from exact to float is explicit (``to_float``);
the other direction is refused.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

TOL_JACOBI = 1e-10
TOL_INVARIANCE = 1e-10
TOL_DEGENERATE = 1e-12


class ModeError(TypeError):
    """Raised when exact and float data are mixed."""


# ---------------------------------------------------------------------------
# scalars and small dense linear algebra
# ---------------------------------------------------------------------------

def parse_scalar(v):
    """Parse a JSON scalar.  Strings ``"p/q"`` (or ``"3"``) become exact
    Fractions, bare JSON numbers become floats."""
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, Fraction):
        return v
    raise ValueError(f"cannot parse scalar {v!r}")


def format_scalar(v):
    """Inverse of :func:`parse_scalar` for JSON output."""
    if isinstance(v, (Fraction, int)) and not isinstance(v, bool):
        return str(v)
    return float(v)


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def exact_array(a) -> np.ndarray:
    """Object array of Fractions.  Accepts ints, Fractions and "p/q" strings;
    floats are rejected (exact->float is one-way)."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        if isinstance(v, (float, np.floating)):
            raise ModeError("float entry in exact array")
        if isinstance(v, str):
            v = Fraction(v)
        out[idx] = Fraction(v)
    return out


def float_array(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        return np.vectorize(float, otypes=[float])(arr) if arr.size else arr.astype(float)
    return arr.astype(float)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def eye(n: int, exact: bool) -> np.ndarray:
    out = zeros((n, n), exact)
    for i in range(n):
        out[i, i] = Fraction(1) if exact else 1.0
    return out


def same_mode(*arrays) -> bool:
    modes = {is_exact(a) for a in arrays if isinstance(a, np.ndarray)}
    return len(modes) <= 1


def max_abs(a):
    """Largest absolute entry; Fraction in exact mode, float otherwise."""
    a = np.asarray(a)
    if a.size == 0:
        return Fraction(0) if a.dtype == object else 0.0
    if a.dtype == object:
        return max(abs(v) for v in a.flat)
    return float(np.max(np.abs(a)))


def _to_sympy(M):
    import sympy
    return sympy.Matrix(M.shape[0], M.shape[1], [sympy.Rational(v.numerator, v.denominator) for v in M.flat])


def _from_sympy(S) -> np.ndarray:
    out = np.empty(S.shape, dtype=object)
    for i in range(S.shape[0]):
        for j in range(S.shape[1]):
            v = S[i, j]
            out[i, j] = Fraction(int(v.p), int(v.q))
    return out


def inv(M: np.ndarray) -> np.ndarray:
    """Matrix inverse in either mode (exact inverse via sympy)."""
    if is_exact(M):
        S = _to_sympy(M)
        if S.det() == 0:
            raise np.linalg.LinAlgError("singular matrix")
        return _from_sympy(S.inv())
    return np.linalg.inv(M)


def solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    if is_exact(M):
        return inv(M) @ b
    return np.linalg.solve(M, b)


def rank(M: np.ndarray, tol: float = 1e-8) -> int:
    """Rank; exact mode is exact, float mode counts singular values above
    ``tol * sigma_max``."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if is_exact(M):
        return int(_to_sympy(M).rank())
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def nullspace(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Basis of the kernel as rows."""
    M = np.asarray(M)
    if is_exact(M):
        vecs = _to_sympy(M).nullspace()
        if not vecs:
            return zeros((0, M.shape[1]), True)
        return np.array([_from_sympy(v.T)[0] for v in vecs], dtype=object)
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=M.dtype)
    u, s, vh = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    r = int(np.sum(s > tol * max(smax, 1.0)))
    return vh[r:].conj()


def det(M: np.ndarray):
    if is_exact(M):
        v = _to_sympy(M).det()
        return Fraction(int(v.p), int(v.q))
    return float(np.linalg.det(M))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Report:
    """Outcome of a numerical or exact check."""

    check: str
    residual: object
    passed: bool
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.passed)

    def to_dict(self) -> dict:
        d = {"check": self.check, "residual": _jsonable(self.residual), "pass": bool(self.passed)}
        if self.details:
            d["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return d

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.check}: residual={float(self.residual):.3e}"


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, Report):
        return v.to_dict()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def judge(residual, tol, exact: bool) -> bool:
    """Exact mode demands an exact zero, float mode ``residual <= tol``."""
    if exact:
        return residual == 0
    return float(residual) <= tol


# ---------------------------------------------------------------------------
# Lie algebras
# ---------------------------------------------------------------------------

class LieAlgebra:
    """Finite dimensional Lie algebra with ``[X_i, X_j] = sum_k c[i,j,k] X_k``.

    ``c`` is stored dense (dims are small); the sparse triple form is used
    for serialization only.
    """

    def __init__(self, c, labels: Sequence[str] | None = None, name: str = ""):
        c = np.asarray(c)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError("structure constants must have shape (n, n, n)")
        self.c = c
        self.dim = c.shape[0]
        self.exact = is_exact(c)
        self.labels = list(labels) if labels is not None else [f"X{i + 1}" for i in range(self.dim)]
        if len(self.labels) != self.dim:
            raise ValueError("label count does not match dimension")
        self.name = name
        anti = c + np.transpose(c, (1, 0, 2))
        if max_abs(anti) != 0 and (self.exact or max_abs(anti) > TOL_JACOBI):
            raise ValueError("structure constants are not antisymmetric")

    @classmethod
    def from_brackets(cls, dim: int, entries: Iterable, labels=None, exact: bool = True, name: str = ""):
        """Build from ``(i, j, k, v)`` entries meaning ``[X_i, X_j]`` has
        ``v`` on ``X_k``.  The antisymmetric partner is filled in."""
        c = zeros((dim, dim, dim), exact)
        for i, j, k, v in entries:
            v = Fraction(v) if exact else float(v)
            if i == j:
                raise ValueError("[X_i, X_i] must vanish")
            c[i, j, k] = c[i, j, k] + v
            c[j, i, k] = c[j, i, k] - v
        return cls(c, labels, name)

    @classmethod
    def abelian(cls, dim: int, exact: bool = True, labels=None):
        return cls(zeros((dim, dim, dim), exact), labels, name="abelian")

    def triples(self):
        """Sparse form: list of ``(i, j, k, v)`` with ``i < j`` and ``v != 0``."""
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                for k in range(self.dim):
                    if self.c[i, j, k] != 0:
                        out.append((i, j, k, self.c[i, j, k]))
        return out

    def to_float(self) -> "LieAlgebra":
        return LieAlgebra(float_array(self.c), self.labels, self.name)

    def basis(self, i: int) -> np.ndarray:
        e = zeros(self.dim, self.exact)
        e[i] = Fraction(1) if self.exact else 1.0
        return e

    def zero(self) -> np.ndarray:
        return zeros(self.dim, self.exact)

    def bracket(self, x, y) -> np.ndarray:
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape[-1] != self.dim or y.shape[-1] != self.dim:
            raise ValueError("dimension mismatch")
        return np.tensordot(np.tensordot(x, self.c, axes=([0], [0])), y, axes=([0], [0]))

    def ad(self, x) -> np.ndarray:
        """Matrix of ``Y -> [x, Y]`` acting on coordinate columns."""
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise ValueError("dimension mismatch")
        # ad[k, j] = sum_i x_i c[i, j, k]
        return np.tensordot(x, self.c, axes=([0], [0])).T

    def coad(self, x) -> np.ndarray:
        """Coadjoint action on dual coordinates: the transpose of ad(-x)."""
        return -self.ad(x).T

    def ad_matrices(self) -> list:
        return [self.ad(self.basis(i)) for i in range(self.dim)]

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"LieAlgebra(dim={self.dim}, {mode}, name={self.name!r})"


def bracket(L: LieAlgebra, x, y) -> np.ndarray:
    return L.bracket(x, y)


def ad(L: LieAlgebra, x) -> np.ndarray:
    return L.ad(x)


def coad(L: LieAlgebra, x) -> np.ndarray:
    return L.coad(x)


def jacobiator(c: np.ndarray) -> np.ndarray:
    """J[i,j,k,:] = [[X_i,X_j],X_k] + [[X_j,X_k],X_i] + [[X_k,X_i],X_j]."""
    t = np.tensordot(c, c, axes=([2], [0]))  # t[i,j,k,m] = [[X_i,X_j],X_k]_m
    return t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))


def check_jacobi(L: LieAlgebra, tol: float = TOL_JACOBI) -> Report:
    viol = max_abs(jacobiator(L.c)) if L.dim else 0
    return Report("jacobi", viol, judge(viol, tol, L.exact))


def structure_from_realization(mats, exact: bool = False, tol: float = 1e-10):
    """Structure constants of the span of the given matrices under the
    commutator, or raise if the span is not closed."""
    mats = [np.asarray(m) for m in mats]
    d = len(mats)
    if exact:
        B = np.array([exact_array(m).ravel() for m in mats], dtype=object).T
        gram = B.T @ B
        ginv = inv(gram)
        c = zeros((d, d, d), True)
        for i in range(d):
            for j in range(d):
                comm = (exact_array(mats[i]) @ exact_array(mats[j]) - exact_array(mats[j]) @ exact_array(mats[i])).ravel()
                coef = ginv @ (B.T @ comm)
                if max_abs(B @ coef - comm) != 0:
                    raise ValueError("realization is not closed under the commutator")
                c[i, j] = coef
        return c
    B = np.array([np.concatenate([np.real(m).ravel(), np.imag(m).ravel()]) for m in mats]).T
    pinv = np.linalg.pinv(B)
    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            v = np.concatenate([np.real(comm).ravel(), np.imag(comm).ravel()])
            coef = pinv @ v
            if np.max(np.abs(B @ coef - v), initial=0.0) > tol:
                raise ValueError("realization is not closed under the commutator")
            c[i, j] = coef
    return c


# ---------------------------------------------------------------------------
# metrical Lie algebras
# ---------------------------------------------------------------------------

class MetricalLieAlgebra:
    """A Lie algebra with a symmetric bilinear form ``G[i,j] = g(X_i, X_j)``.

    With ``validate=True`` (the default) the form must be symmetric,
    nondegenerate and ad-invariant.  ``killing_form`` builds instances with
    ``validate=False`` since the Killing form can be degenerate.
    """

    def __init__(self, algebra: LieAlgebra, gram, validate: bool = True, name: str = ""):
        gram = np.asarray(gram)
        if gram.shape != (algebra.dim, algebra.dim):
            raise ValueError("Gram matrix shape does not match the algebra")
        if is_exact(gram) != algebra.exact:
            raise ModeError("algebra and Gram matrix are in different scalar modes")
        self.algebra = algebra
        self.gram = gram
        self.name = name or algebra.name
        d = det(gram) if algebra.dim else 1
        self.degenerate = (d == 0) if algebra.exact else abs(d) <= TOL_DEGENERATE
        if validate:
            if max_abs(gram - gram.T) != 0 and (algebra.exact or max_abs(gram - gram.T) > TOL_INVARIANCE):
                raise ValueError("Gram matrix is not symmetric")
            if self.degenerate:
                raise ValueError("Gram matrix is degenerate")
            rep = check_metric_invariance(self)
            if not rep.passed:
                raise ValueError(f"metric is not ad-invariant (violation {float(rep.residual):.3g})")
        self._gram_inv = None

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def exact(self) -> bool:
        return self.algebra.exact

    @property
    def gram_inv(self) -> np.ndarray:
        if self._gram_inv is None:
            if self.degenerate:
                raise np.linalg.LinAlgError("degenerate Gram matrix")
            self._gram_inv = inv(self.gram)
        return self._gram_inv

    def inner(self, x, y):
        return np.asarray(x) @ self.gram @ np.asarray(y)

    def lower(self, v) -> np.ndarray:
        """Vector to covector, ``v -> g(v, .)``."""
        return self.gram @ np.asarray(v)

    def raise_(self, alpha) -> np.ndarray:
        """Covector to vector (inverse of :meth:`lower`)."""
        return self.gram_inv @ np.asarray(alpha)

    def to_float(self) -> "MetricalLieAlgebra":
        return MetricalLieAlgebra(self.algebra.to_float(), float_array(self.gram), validate=False, name=self.name)

    def __repr__(self):
        return f"MetricalLieAlgebra(dim={self.dim}, exact={self.exact}, name={self.name!r})"


def metric_invariance_defect(c: np.ndarray, G: np.ndarray) -> np.ndarray:
    """D[i,j,k] = g([X_i,X_j],X_k) - g(X_i,[X_j,X_k])."""
    t1 = np.tensordot(c, G, axes=([2], [0]))
    t2 = np.tensordot(G, c, axes=([1], [2]))  # t2[i,j,k] = sum_m G[i,m] c[j,k,m]
    return t1 - t2


def check_metric_invariance(M: MetricalLieAlgebra, tol: float = TOL_INVARIANCE) -> Report:
    viol = max_abs(metric_invariance_defect(M.algebra.c, M.gram)) if M.dim else 0
    return Report("metric", viol, judge(viol, tol, M.exact),
                  {"symmetric": bool(max_abs(M.gram - M.gram.T) == 0 if M.exact
                                     else max_abs(M.gram - M.gram.T) <= tol),
                   "degenerate": bool(M.degenerate)})


def killing_form(L: LieAlgebra) -> MetricalLieAlgebra:
    """Gram matrix of ``tr(ad x ad y)``; degeneracy is flagged on the result."""
    ads = L.ad_matrices()
    K = zeros((L.dim, L.dim), L.exact)
    for i in range(L.dim):
        for j in range(L.dim):
            K[i, j] = np.trace(ads[i] @ ads[j])
    return MetricalLieAlgebra(L, K, validate=False, name=f"killing({L.name})")


def lower(M: MetricalLieAlgebra, v) -> np.ndarray:
    return M.lower(v)


def raise_(M: MetricalLieAlgebra, alpha) -> np.ndarray:
    return M.raise_(alpha)


def dual_basis(M: MetricalLieAlgebra, basis, target) -> np.ndarray:
    """Vectors ``Y_j`` in the span of the rows of ``target`` with
    ``g(X_i, Y_j) = delta_ij`` for the rows ``X_i`` of ``basis``."""
    X = np.asarray(basis)
    W = np.asarray(target)
    P = X @ M.gram @ W.T
    if P.shape[0] != P.shape[1]:
        raise ValueError("basis and target must have equal dimension")
    return inv(P).T @ W


def random_skew_operator(M: MetricalLieAlgebra, rng, scale: int = 3) -> np.ndarray:
    """Random g-skew operator R (G R + R^T G = 0), small integer/rational
    entries in exact mode."""
    n = M.dim
    if M.exact:
        S = zeros((n, n), True)
        for i in range(n):
            for j in range(i + 1, n):
                v = Fraction(int(rng.integers(-scale, scale + 1)), int(rng.integers(1, 3)))
                S[i, j] = v
                S[j, i] = -v
    else:
        A = rng.standard_normal((n, n))
        S = A - A.T
    return M.gram_inv @ S


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _matrix_from_json(rows, exact: bool) -> np.ndarray:
    vals = [[parse_scalar(v) for v in r] for r in rows]
    if exact:
        if any(isinstance(v, float) for r in vals for v in r):
            raise ModeError("float entry in an exact matrix")
        return exact_array(vals)
    return np.array([[float(v) for v in r] for r in vals])


def algebra_from_json(d: dict):
    """Parse ``{"dim", "basis", "brackets", "metric"?}``.

    Returns a :class:`LieAlgebra`, or a :class:`MetricalLieAlgebra` when a
    metric is present.  The algebra is exact iff every bracket value is a
    string.
    """
    try:
        dim = int(d["dim"])
        entries = [(int(e["i"]), int(e["j"]), int(e["k"]), parse_scalar(e["v"])) for e in d.get("brackets", [])]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed algebra JSON: {exc}") from exc
    exact = all(isinstance(v, Fraction) for *_, v in entries)
    if not exact and any(isinstance(v, Fraction) for *_, v in entries):
        raise ModeError("mixed exact and float bracket values")
    L = LieAlgebra.from_brackets(dim, entries, d.get("basis"), exact=exact, name=d.get("name", ""))
    if "metric" in d:
        return MetricalLieAlgebra(L, _matrix_from_json(d["metric"], exact))
    return L


def algebra_to_json(A) -> dict:
    """Inverse of :func:`algebra_from_json`."""
    L = A.algebra if isinstance(A, MetricalLieAlgebra) else A
    out = {"dim": L.dim, "basis": list(L.labels),
           "brackets": [{"i": i, "j": j, "k": k, "v": format_scalar(v)} for i, j, k, v in L.triples()]}
    if L.name:
        out["name"] = L.name
    if isinstance(A, MetricalLieAlgebra):
        out["metric"] = [[format_scalar(v) for v in r] for r in A.gram]
    return out
