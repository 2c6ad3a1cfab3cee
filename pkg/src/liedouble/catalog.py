"""Built-in double groups with their reference data.

Three entries are available:

``sl2c_su2_sb2``
    ``SL(2,C)`` as a 6-dimensional real double of ``su(2)`` and the upper
    triangular group ``SB(2,C)``, with the Iwasawa factorizations.
``gl2r_axb``
    ``GL+(2,R)`` as the double of the ``ax+b`` algebra; the factorization is
    only local.
``cotangent``
    ``T*G_+`` for a user supplied algebra, realized as the semidirect
    product ``G_+ x| g_+*`` acting affinely.

``load_catalog`` builds an entry and runs its invariant suite; an entry that
fails any check is refused.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra_core import LieAlgebra, MetricalLieAlgebra, Report, float_array, max_abs
from .bialgebra import Bialgebra, check_bialgebra
from .constructions import ManinDecomposition, manin_double
from .exterior import CochainMap, Multivector
from .groups import DoubleGroup, MatrixGroup, NotFactorizable, left_derivative
from .poisson import (CoordinateFunction, DoubleGroupContext, _restricted, lam_matrix, matrix_rank)

CATALOG_NAMES = ("sl2c_su2_sb2", "gl2r_axb", "cotangent")
ALIASES = {"sl2c": "sl2c_su2_sb2", "axb": "gl2r_axb", "gl2r": "gl2r_axb"}
TOL_LOAD = 1e-10
ARCOSH_CLAMP = 1e-12


class CatalogLoadError(RuntimeError):
    """An entry failed its load-time invariant suite."""


@dataclass
class CatalogEntry:
    """A double group with its exact algebra and reference data.

    Attributes
    ----------
    context : DoubleGroupContext
        Numerical double group (matrix realization, tensors ``C``).
    algebra : MetricalLieAlgebra
        Exact double whose constants the realization must reproduce.
    decomposition : ManinDecomposition
    bialgebra : Bialgebra
        The ``g_+`` half with the cobracket read off the double.
    expected : dict
        Reference results; each item records a ``source`` of either
        ``"reference table"`` or ``"derived"``.
    checks : list of Report
        Invariant suite run at load time.
    """

    name: str
    context: DoubleGroupContext
    algebra: MetricalLieAlgebra
    decomposition: ManinDecomposition
    bialgebra: Bialgebra
    expected: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    sampler: object = None

    @property
    def group(self) -> MatrixGroup:
        return self.context.G

    @property
    def double(self) -> DoubleGroup:
        return self.context.D

    def points(self, rng, count: int, domain: str = "group") -> list:
        """Seeded sample points; ``domain`` is ``group``, ``phi`` (inside
        ``G_+ G_-``) or ``psi`` (inside ``G_- G_+``)."""
        return [self.sampler(rng, domain) for _ in range(count)]

    def summary(self) -> dict:
        return {"name": self.name, "dim": self.context.n, "complete": self.double.complete,
                "checks": [r.to_dict() for r in self.checks]}


# ---------------------------------------------------------------------------
# SL(2,C) = SU(2) . SB(2,C)
# ---------------------------------------------------------------------------

def sl2c_basis() -> list:
    """``e_1, e_2, e_3`` spanning ``su(2)`` then the dual basis spanning
    ``sb(2,C)``."""
    i = 1j
    e = [0.5 * np.array([[i, 0], [0, -i]]), 0.5 * np.array([[0, 1], [-1, 0]]),
         0.5 * np.array([[0, i], [i, 0]])]
    f = [0.5 * np.array([[1, 0], [0, -1]]), np.array([[0, -i], [0, 0]]), np.array([[0, 1], [0, 0]])]
    return [np.asarray(b, dtype=complex) for b in e + f]


def im_trace_metric(U, V) -> float:
    """``2 Im tr(UV)``."""
    return float(2 * np.imag(np.trace(U @ V)))


def iwasawa_phi(a):
    """``a = g u`` with ``g`` unitary and ``u`` upper triangular with
    positive real diagonal."""
    z1, z2, z3, z4 = np.asarray(a).ravel()
    s = 1 / np.sqrt(abs(z1) ** 2 + abs(z3) ** 2)
    g = np.array([[s * z1, -s * np.conj(z3)], [s * z3, s * np.conj(z1)]])
    u = np.array([[1 / s, s * (np.conj(z1) * z2 + np.conj(z3) * z4)], [0, s]])
    return g, u


def iwasawa_psi(a):
    """``a = v h`` with ``v`` upper triangular and ``h`` unitary."""
    z1, z2, z3, z4 = np.asarray(a).ravel()
    t = 1 / np.sqrt(abs(z3) ** 2 + abs(z4) ** 2)
    v = np.array([[t, t * (z1 * np.conj(z3) + z2 * np.conj(z4))], [0, 1 / t]])
    h = np.array([[t * np.conj(z4), -t * np.conj(z3)], [t * z3, t * z4]])
    return v, h


def _su2_member(a, tol):
    return (np.max(np.abs(a @ a.conj().T - np.eye(2))) <= tol and abs(np.linalg.det(a) - 1) <= tol)


def _sb2_member(a, tol):
    return (abs(a[1, 0]) <= tol and abs(a[0, 0].imag) <= tol and a[0, 0].real > 0
            and abs(a[0, 0] * a[1, 1] - 1) <= tol)


def _sl2c_member(a, tol):
    return abs(np.linalg.det(a) - 1) <= tol


def su2_bialgebra() -> Bialgebra:
    """``[e_1,e_2]=e_3`` cyclic, ``b'(e_2)=e_1^e_2``, ``b'(e_3)=e_1^e_3``."""
    su2 = LieAlgebra.from_brackets(3, [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)], ["e1", "e2", "e3"], name="su2")
    cob = CochainMap([Multivector.zero(3, 2), Multivector(3, 2, {(0, 1): 1}), Multivector(3, 2, {(0, 2): 1})], 2)
    return Bialgebra(su2, cob)


def _z(k, part="z"):
    return CoordinateFunction((k - 1) // 2, (k - 1) % 2, part)


def _zb(k):
    return _z(k, "zbar")


# (f, g, right-hand side in terms of the entries w = (z1, z2, z3, z4))
_I = 1j
SL2C_BRACKET_TABLE = (
    (_z(1), _z(2), lambda w: -0.5 * _I * w[0] * w[1]),
    (_z(1), _z(3), lambda w: 0.5 * _I * w[0] * w[2]),
    (_z(1), _z(4), lambda w: 0j),
    (_z(2), _z(3), lambda w: _I * w[0] * w[3]),
    (_z(2), _z(4), lambda w: 0.5 * _I * w[1] * w[3]),
    (_z(3), _z(4), lambda w: -0.5 * _I * w[2] * w[3]),
    (_z(1), _zb(1), lambda w: -0.5 * _I * abs(w[0]) ** 2 - _I * abs(w[2]) ** 2),
    (_z(2), _zb(2), lambda w: -0.5 * _I * abs(w[1]) ** 2 - _I * abs(w[0]) ** 2 - _I * abs(w[3]) ** 2),
    (_z(3), _zb(3), lambda w: -0.5 * _I * abs(w[2]) ** 2),
    (_z(4), _zb(4), lambda w: -0.5 * _I * abs(w[3]) ** 2 - _I * abs(w[2]) ** 2),
    (_z(1), _zb(2), lambda w: -_I * w[2] * np.conj(w[3])),
    (_z(2), _zb(3), lambda w: 0.5 * _I * w[1] * np.conj(w[2])),
    (_z(1), _zb(3), lambda w: 0j),
    (_z(2), _zb(4), lambda w: -_I * w[0] * np.conj(w[2])),
    (_z(1), _zb(4), lambda w: 0.5 * _I * w[0] * np.conj(w[3])),
    (_z(3), _zb(4), lambda w: 0j),
)

# Lie-Poisson brackets on the subgroups; SU(2) entries g = [[al, -conj(nu)], [nu, conj(al)]],
# SB(2,C) entries u = [[t, ga], [0, 1/t]].
SU2_BRACKET_TABLE = (
    ((0, 0, "z"), (0, 0, "zbar"), lambda g: -_I * abs(g[1, 0]) ** 2),
    ((1, 0, "z"), (1, 0, "zbar"), lambda g: 0j),
    ((0, 0, "z"), (1, 0, "z"), lambda g: 0.5 * _I * g[0, 0] * g[1, 0]),
    ((0, 0, "zbar"), (1, 0, "zbar"), lambda g: -0.5 * _I * np.conj(g[0, 0] * g[1, 0])),
    ((0, 0, "z"), (1, 0, "zbar"), lambda g: 0.5 * _I * g[0, 0] * np.conj(g[1, 0])),
    ((0, 0, "zbar"), (1, 0, "z"), lambda g: -0.5 * _I * np.conj(g[0, 0]) * g[1, 0]),
)
SB2_BRACKET_TABLE = (
    ((0, 1, "z"), (0, 0, "re"), lambda u: 0.5 * _I * u[0, 1] * u[0, 0].real),
    ((0, 1, "zbar"), (0, 1, "z"), lambda u: _I * (u[0, 0].real ** 2 - 1 / u[0, 0].real ** 2)),
)


def _sl2c_sampler(G):
    def sample(rng, domain="group"):
        return G.random_point(rng)
    return sample


def build_sl2c(scale: str = "half") -> CatalogEntry:
    B = su2_bialgebra()
    M, dec = manin_double(B)
    G = MatrixGroup("SL(2,C)", sl2c_basis(), member=_sl2c_member,
                    metric=float_array(M.gram), labels=["e1", "e2", "e3", "e1*", "e2*", "e3*"])
    D = DoubleGroup(G, [0, 1, 2], [3, 4, 5], phi_closed=iwasawa_phi, psi_closed=iwasawa_psi,
                    plus_member=_su2_member, minus_member=_sb2_member, name="sl2c_su2_sb2", complete=True)
    ctx = DoubleGroupContext(D, scale=scale, ambient_metric=im_trace_metric, name="sl2c_su2_sb2")
    expected = {
        "complete": {"value": True, "source": "reference table"},
        "metric": {"value": "2 Im tr(AB)", "source": "reference table"},
        "bracket_table": {"rows": [f"{{{f.label},{g.label}}}" for f, g, _ in SL2C_BRACKET_TABLE],
                          "source": "reference table"},
        "casimirs": {"value": ["det", "conj(det)"], "source": "reference table"},
        "degeneracy_locus": {"value": "empty (globally symplectic)", "source": "derived"},
        "closed_forms": {"phi": "iwasawa_phi", "psi": "iwasawa_psi", "source": "reference table"},
    }
    return CatalogEntry("sl2c_su2_sb2", ctx, M, dec, B, expected, sampler=_sl2c_sampler(G))


# ---------------------------------------------------------------------------
# GL+(2,R) as the double of ax+b
# ---------------------------------------------------------------------------

def _E(i, j):
    M = np.zeros((2, 2))
    M[i, j] = 1.0
    return M


def axb_basis() -> list:
    """``X_1 = E11``, ``X_2 = E12``, ``Y_1 = -E22``, ``Y_2 = E21``."""
    return [_E(0, 0), _E(0, 1), -_E(1, 1), _E(1, 0)]


def trace_metric(U, V) -> float:
    """``tr(UV) - tr U tr V``, ad-invariant on ``gl(2)``."""
    return float(np.real(np.trace(U @ V) - np.trace(U) * np.trace(V)))


def trace_j_metric(U, V) -> float:
    """``tr(U J V J)`` with ``J`` the swap matrix (not ad-invariant on gl(2))."""
    J = np.array([[0.0, 1.0], [1.0, 0.0]])
    return float(np.trace(U @ J @ V @ J))


def axb_phi(a):
    """``[[x, y], [a, b]] = [[det/b, y/b], [0, 1]] [[1, 0], [a, b]]``; needs ``b > 0``."""
    x, y, p, b = np.asarray(a, dtype=float).ravel()
    if not b > 0:
        raise NotFactorizable("a = g u needs b > 0")
    d = x * b - y * p
    return np.array([[d / b, y / b], [0.0, 1.0]]), np.array([[1.0, 0.0], [p, b]])


def axb_psi(a):
    """``[[x, y], [a, b]] = [[1, 0], [a/x, det/x]] [[x, y], [0, 1]]``; needs ``x > 0``."""
    x, y, p, b = np.asarray(a, dtype=float).ravel()
    if not x > 0:
        raise NotFactorizable("a = v h needs x > 0")
    d = x * b - y * p
    return np.array([[1.0, 0.0], [p / x, d / x]]), np.array([[x, y], [0.0, 1.0]])


def _axb_plus_member(a, tol):
    return abs(a[1, 0]) <= tol and abs(a[1, 1] - 1) <= tol and a[0, 0] > 0


def _axb_minus_member(a, tol):
    return abs(a[0, 0] - 1) <= tol and abs(a[0, 1]) <= tol and a[1, 1] > 0


def _gl2p_member(a, tol):
    return np.linalg.det(np.real(a)) > 0


def axb_bialgebra(sign: int = -1) -> Bialgebra:
    """``[X_1, X_2] = X_2`` with ``b'(X_2) = sign X_1 ^ X_2``.

    ``sign=-1`` is the cobracket realized by :func:`axb_basis`; ``sign=+1``
    is the one listed in the reference data.
    """
    L = LieAlgebra.from_brackets(2, [(0, 1, 1, 1)], ["X1", "X2"], name="ax+b")
    cob = CochainMap([Multivector.zero(2, 2), Multivector(2, 2, {(0, 1): sign})], 2)
    return Bialgebra(L, cob)


# Reference brackets of the ax+b double, basis (X1, X2, Y1, Y2): pair -> coefficients.
AXB_LISTED_BRACKETS = {
    (0, 1): (0, 1, 0, 0),
    (2, 3): (0, 0, 0, 1),
    (0, 2): (0, 0, 0, 0),
    (0, 3): (0, 0, -1, 0),
    (1, 2): (0, 1, 0, 0),
    (1, 3): (-1, 0, 1, 0),
}


def axb_listed_constants() -> np.ndarray:
    """Exact structure constants built from :data:`AXB_LISTED_BRACKETS`."""
    entries = [(i, j, k, v) for (i, j), vec in AXB_LISTED_BRACKETS.items() for k, v in enumerate(vec) if v]
    c = LieAlgebra.from_brackets(4, entries, exact=True).c
    return c


def axb_listed_comparison(sign: int = 1) -> Report:
    """Compare the Manin double of the ax+b bialgebra with the listed
    brackets, exactly, bracket by bracket."""
    M, _ = manin_double(axb_bialgebra(sign))
    listed = axb_listed_constants()
    per = {}
    labels = ["X1", "X2", "Y1", "Y2"]
    for (i, j) in AXB_LISTED_BRACKETS:
        d = max_abs(M.algebra.c[i, j] - listed[i, j])
        per[f"[{labels[i]},{labels[j]}]"] = {"double": [str(v) for v in M.algebra.c[i, j]],
                                            "listed": [str(v) for v in listed[i, j]], "match": d == 0}
    from .algebra_core import jacobiator
    jac = max_abs(jacobiator(listed))
    res = max(max_abs(M.algebra.c[i, j] - listed[i, j]) for i, j in AXB_LISTED_BRACKETS)
    return Report("axb_double_vs_listed", res, res == 0,
                  {"brackets": per, "listed_jacobi_violation": jac,
                   "mismatches": [k for k, v in per.items() if not v["match"]]})


def axb_chart_formula(a) -> np.ndarray:
    """Coefficient matrix in the entry chart ``(x, y, a, b)`` of
    ``xy dx^dy + ab da^db + xb (dx^db + da^dy)``."""
    x, y, p, b = np.asarray(a, dtype=float).ravel()
    F = np.zeros((4, 4))
    for i, j, v in ((0, 1, x * y), (2, 3, p * b), (0, 3, x * b), (2, 1, x * b)):
        F[i, j] += v
        F[j, i] -= v
    return F


def chart_bivector(ctx: DoubleGroupContext, variant: str, a) -> np.ndarray:
    """Push a left-trivialized bivector into the matrix-entry chart of a real
    matrix group (row-major entries)."""
    legs = np.array([np.real(a @ b).ravel() for b in ctx.G.basis])
    return legs.T @ lam_matrix(ctx, variant, a) @ legs


def axb_dressing_x1(ctx: DoubleGroupContext, a, pairing: str = "ambient") -> np.ndarray:
    """Left dressing field of ``X_1`` for ``Lambda_+`` as an ambient matrix."""
    from .poisson import dressing_field
    v = dressing_field(ctx, "plus", "X", 0, "left", a, pairing=pairing)
    return a @ ctx.G.mat(v)


def axb_restricted_field(x):
    """``-x^2 d/dx``: the ``X_1`` dressing field on ``G_+`` in the ``x`` chart."""
    x = np.asarray(x, dtype=float)
    return -x ** 2


def _axb_sampler(G, D):
    def sample(rng, domain="group"):
        for _ in range(1000):
            a = G.random_point(rng)
            if domain == "group":
                return a
            if domain == "phi" and a[1, 1] > 0.05:
                return a
            if domain == "psi" and a[0, 0] > 0.05:
                return a
        raise RuntimeError("sampling failed")
    return sample


def build_axb(scale: str = "half") -> CatalogEntry:
    B = axb_bialgebra(-1)
    M, dec = manin_double(B)
    G = MatrixGroup("GL+(2,R)", axb_basis(), member=_gl2p_member, metric=float_array(M.gram),
                    labels=["X1", "X2", "Y1", "Y2"])
    D = DoubleGroup(G, [0, 1], [2, 3], phi_closed=axb_phi, psi_closed=axb_psi,
                    plus_member=_axb_plus_member, minus_member=_axb_minus_member, name="gl2r_axb",
                    complete=False)
    ctx = DoubleGroupContext(D, scale=scale, ambient_metric=trace_metric, name="gl2r_axb")
    expected = {
        "complete": {"value": False, "source": "reference table"},
        "metric": {"value": "tr(AB) - tr A tr B", "source": "derived"},
        "chart_formula": {"value": "xy dx^dy + ab da^db + xb(dx^db + da^dy)", "source": "reference table"},
        "degeneracy_locus": {"value": "xb = 0", "source": "reference table"},
        "factorization_domains": {"phi": "b > 0", "psi": "x > 0", "source": "reference table"},
        "listed_brackets": {"value": {str(k): v for k, v in AXB_LISTED_BRACKETS.items()},
                            "source": "reference table"},
        "incomplete_flow": {"field": "-x^2 d/dx", "solution": "x0 / (t x0 + 1)", "source": "reference table"},
    }
    return CatalogEntry("gl2r_axb", ctx, M, dec, B, expected, sampler=_axb_sampler(G, D))


# ---------------------------------------------------------------------------
# cotangent double T*G_+
# ---------------------------------------------------------------------------

def _center_dim(L: LieAlgebra) -> int:
    ads = np.array([float_array(A).ravel() for A in L.ad_matrices()])
    return L.dim - int(np.linalg.matrix_rank(ads)) if L.dim else 0


def cotangent_realization(L: LieAlgebra, rho=None) -> list:
    """Matrices for ``X_1..X_n, xi^1..xi^n`` of ``g x| g*``.

    ``(x, xi)`` goes to ``[[coad x, xi], [0, 0]]`` plus a block ``rho(x)``
    keeping the realization faithful: none for centerless ``g``, ``diag(x)``
    for abelian ``g``, otherwise ``rho`` must be a list of matrices of a
    faithful representation.
    """
    n = L.dim
    Lf = L.to_float() if L.exact else L
    if rho is None:
        zc = _center_dim(Lf)
        if zc == 0:
            rho = []
        elif zc == n:
            rho = [np.diag(np.eye(n)[i]) for i in range(n)]
        else:
            raise ValueError("g has a center; pass a faithful representation rho")
    r = rho[0].shape[0] if len(rho) else 0
    N = n + 1 + r
    out = []
    for i in range(n):
        M = np.zeros((N, N))
        M[:n, :n] = Lf.coad(np.eye(n)[i])
        if r:
            M[n + 1:, n + 1:] = rho[i]
        out.append(M)
    for a in range(n):
        M = np.zeros((N, N))
        M[a, n] = 1.0
        out.append(M)
    return out


def build_cotangent(L: LieAlgebra | None = None, rho=None, scale: str = "half") -> CatalogEntry:
    if L is None:
        L = axb_bialgebra().algebra
    n = L.dim
    Bz = Bialgebra(L, CochainMap([Multivector.zero(n, 2, L.exact) for _ in range(n)], 2), validate=False)
    M, dec = manin_double(Bz)
    basis = cotangent_realization(L, rho)
    N = basis[0].shape[0]

    def plus_member(a, tol):
        return np.max(np.abs(a[:n, n]), initial=0.0) <= tol and abs(a[n, n] - 1) <= tol

    def minus_member(a, tol):
        b = a.copy()
        b[:n, n] = 0
        return np.max(np.abs(b - np.eye(N))) <= tol

    def g_member(a, tol):
        return np.max(np.abs(a[n, :n]), initial=0.0) <= tol and abs(a[n, n] - 1) <= tol

    def phi(a):
        g = np.array(a, dtype=float)
        g[:n, n] = 0
        return g, np.linalg.solve(g, a)

    def psi(a):
        h = np.array(a, dtype=float)
        h[:n, n] = 0
        return a @ np.linalg.inv(h), h

    labels = list(L.labels) + [f"{s}*" for s in L.labels]
    G = MatrixGroup(f"T*({L.name or 'g'})", basis, member=g_member, metric=float_array(M.gram), labels=labels)
    D = DoubleGroup(G, range(n), range(n, 2 * n), phi_closed=phi, psi_closed=psi, plus_member=plus_member,
                    minus_member=minus_member, name="cotangent", complete=True)
    ctx = DoubleGroupContext(D, scale=scale, name="cotangent")
    expected = {
        "complete": {"value": True, "source": "reference table"},
        "factorization": {"phi": "left trivialization", "psi": "right trivialization", "source": "reference table"},
        "flat_when_abelian": {"value": _center_dim(L.to_float() if L.exact else L) == n, "source": "derived"},
    }

    def sample(rng, domain="group"):
        return G.random_point(rng)

    return CatalogEntry("cotangent", ctx, M, dec, Bz, expected, sampler=sample)


# ---------------------------------------------------------------------------
# load-time invariant suite
# ---------------------------------------------------------------------------

def invariant_suite(entry: CatalogEntry, samples: int = 8, seed: int = 0) -> list:
    """Realization, metric, decomposition, bialgebra and factorization checks."""
    ctx = entry.context
    G = ctx.G
    reps = []
    r = G.check_realization()
    reps.append(Report("realization_homomorphism", r, r <= TOL_LOAD))
    d = float(np.max(np.abs(G.lie.c - float_array(entry.algebra.algebra.c))))
    reps.append(Report("realization_matches_exact_double", d, d <= TOL_LOAD))
    if ctx.ambient_metric is not None:
        gram = np.array([[ctx.ambient_metric(U, V) for V in G.basis] for U in G.basis])
        d = float(np.max(np.abs(gram - ctx.gram)))
        reps.append(Report("ambient_metric_matches_gram", d, d <= TOL_LOAD))
    reps.append(entry.decomposition.check())
    reps.append(check_bialgebra(entry.bialgebra))
    rng = np.random.default_rng(seed)
    pts = entry.points(rng, samples)
    reps.append(ctx.check(pts))
    worst = 0.0
    inside = True
    for dom, fact in (("phi", entry.double.factorize_phi), ("psi", entry.double.factorize_psi)):
        for a in entry.points(rng, samples, dom):
            p, q = fact(a)
            worst = max(worst, float(np.max(np.abs(p @ q - a))))
            first, second = (entry.double.Gplus, entry.double.Gminus) if dom == "phi" else \
                (entry.double.Gminus, entry.double.Gplus)
            inside = inside and first.member(p, 1e-8) and second.member(q, 1e-8)
    reps.append(Report("closed_factorizations", worst, worst <= TOL_LOAD and inside, {"in_subgroups": inside}))
    return reps


def load_catalog(name: str, algebra: LieAlgebra | None = None, rho=None, scale: str = "half",
                 verify: bool = True) -> CatalogEntry:
    """Build a catalog entry and run its invariant suite.

    Raises
    ------
    KeyError
        Unknown name.
    CatalogLoadError
        Some invariant check failed.
    """
    key = ALIASES.get(name, name)
    if key == "sl2c_su2_sb2":
        entry = build_sl2c(scale)
    elif key == "gl2r_axb":
        entry = build_axb(scale)
    elif key == "cotangent":
        entry = build_cotangent(algebra, rho, scale)
    else:
        raise KeyError(f"unknown catalog entry {name!r}; choose from {CATALOG_NAMES}")
    if verify:
        entry.checks = invariant_suite(entry)
        failed = [r.check for r in entry.checks if not r.passed]
        if failed:
            raise CatalogLoadError(f"{key}: failed load checks {failed}")
    return entry


# ---------------------------------------------------------------------------
# bracket-table harness
# ---------------------------------------------------------------------------

def _all_functions():
    return [_z(k) for k in range(1, 5)] + [_zb(k) for k in range(1, 5)]


def bracket_table(entry: CatalogEntry, samples: int = 100, tol: float = 1e-9, seed: int = 0,
                  points=None, variant: str = "plus", context: DoubleGroupContext | None = None) -> Report:
    """Residual of every listed bracket identity plus the reality rule
    ``{conj f, conj g} = conj {f, g}`` over all coordinate pairs."""
    if entry.name != "sl2c_su2_sb2":
        raise ValueError("the bracket table belongs to the sl2c entry")
    ctx = context or entry.context
    if points is None:
        points = entry.points(np.random.default_rng(seed), samples)
    funcs = _all_functions()
    rows = [0.0] * len(SL2C_BRACKET_TABLE)
    closure = 0.0
    for a in points:
        lam = lam_matrix(ctx, variant, a)
        dz = {f: f.differential(ctx, a) for f in funcs}
        w = np.asarray(a).ravel()
        for k, (f, g, rhs) in enumerate(SL2C_BRACKET_TABLE):
            rows[k] = max(rows[k], float(abs(dz[f] @ lam @ dz[g] - rhs(w))))
        Bm = np.array([[dz[f] @ lam @ dz[g] for g in funcs] for f in funcs])
        conj_idx = [4, 5, 6, 7, 0, 1, 2, 3]
        closure = max(closure, float(np.max(np.abs(Bm[np.ix_(conj_idx, conj_idx)] - np.conj(Bm)))))
    table = [{"row": f"{{{f.label},{g.label}}}", "residual": r, "pass": r <= tol}
             for (f, g, _), r in zip(SL2C_BRACKET_TABLE, rows)]
    table.append({"row": "conjugate_closure", "residual": closure, "pass": closure <= tol})
    worst = max(t["residual"] for t in table)
    return Report("bracket_table", worst, all(t["pass"] for t in table),
                  {"rows": table, "samples": len(points), "failing": [t["row"] for t in table if not t["pass"]]})


def inversion_symmetry(entry: CatalogEntry, samples: int = 50, seed: int = 0, tol: float = 1e-9) -> Report:
    """``z1 <-> z4``, ``z2 -> -z2``, ``z3 -> -z3`` (the inverse on SL(2,C))
    preserves all coordinate brackets: ``{F_i, F_j}(a) = {z_i, z_j}(a^-1)``."""
    ctx = entry.context
    funcs = _all_functions()
    perm = [3, 1, 2, 0]
    sign = [1, -1, -1, 1]
    P = np.zeros((8, 8))
    for half in (0, 4):
        for i in range(4):
            P[half + i, half + perm[i]] = sign[i]
    worst = 0.0
    anti = 0.0
    for a in entry.points(np.random.default_rng(seed), samples):
        ai = np.linalg.inv(a)
        B1 = np.array([[f.differential(ctx, a) @ lam_matrix(ctx, "plus", a) @ g.differential(ctx, a)
                        for g in funcs] for f in funcs])
        B2 = np.array([[f.differential(ctx, ai) @ lam_matrix(ctx, "plus", ai) @ g.differential(ctx, ai)
                        for g in funcs] for f in funcs])
        T = P @ B1 @ P.T
        worst = max(worst, float(np.max(np.abs(T - B2))))
        anti = max(anti, float(np.max(np.abs(T + B2))))
    return Report("inversion_symmetry", worst, worst <= tol, {"anti_symmetry_residual": anti})


def perturbed_context(entry: CatalogEntry, index=(3, 0), delta: float = 0.01) -> DoubleGroupContext:
    """Copy of the context with one coefficient of ``C_+`` shifted by ``delta``."""
    ctx = DoubleGroupContext(entry.double, scale=entry.context.scale, ambient_metric=entry.context.ambient_metric,
                             name=f"{entry.name}-perturbed")
    ctx.C_plus = ctx.C_plus.copy()
    ctx.C_plus[index] += delta
    ctx.C = ctx.C_plus - ctx.C_minus
    return ctx


def perturbation_probe(entry: CatalogEntry, samples: int = 20, seed: int = 0, delta: float = 0.01,
                       tol: float = 1e-9) -> Report:
    """The table harness must reject a perturbed ``C``; passes when at
    least one row fails."""
    rep = bracket_table(entry, samples, tol, seed, context=perturbed_context(entry, delta=delta))
    failing = rep.details["failing"]
    return Report("perturbation_probe", rep.residual, len(failing) > 0, {"failing_rows": failing})


def subgroup_bracket_table(entry: CatalogEntry, side: str, samples: int = 50, seed: int = 0,
                           tol: float = 1e-9) -> Report:
    """Listed Lie-Poisson brackets on ``SU(2)`` (``side="plus"``) or
    ``SB(2,C)`` (``side="minus"``)."""
    ctx = entry.context
    sub = entry.double.Gplus if side == "plus" else entry.double.Gminus
    table = SU2_BRACKET_TABLE if side == "plus" else SB2_BRACKET_TABLE
    rng = np.random.default_rng(seed)
    rows = [0.0] * len(table)
    for _ in range(samples):
        a = entry.sampler(rng)
        p = entry.double.factorize_phi(a)[0 if side == "plus" else 1]
        lam = _restricted(ctx, side, p)

        def d(args):
            f = CoordinateFunction(*args)
            return np.array([f.value(p @ b) for b in sub.basis])

        for k, (f, g, rhs) in enumerate(table):
            rows[k] = max(rows[k], float(abs(d(f) @ lam @ d(g) - rhs(p))))
    worst = max(rows)
    return Report(f"subgroup_brackets[{side}]", worst, worst <= tol, {"rows": rows})


# ---------------------------------------------------------------------------
# linearization of SB(2,C)
# ---------------------------------------------------------------------------

def linearize_sb2c(t: float, gamma: complex) -> np.ndarray:
    """``(log t, Re w, Im w)`` with ``w = sqrt((R^2 - log^2 t) / |gamma|^2) gamma``
    and ``R = arcosh((|gamma|^2 + t^2 + t^-2) / 2) / 2``; ``w = 0`` at
    ``gamma = 0``."""
    if not t > 0:
        raise ValueError("t must be positive")
    arg = (abs(gamma) ** 2 + t ** 2 + t ** -2) / 2
    if arg < 1:
        if arg < 1 - ARCOSH_CLAMP:
            raise ValueError("arcosh argument below 1")
        arg = 1.0
    R = 0.5 * np.arccosh(arg)
    lt = np.log(t)
    if gamma == 0:
        return np.array([lt, 0.0, 0.0])
    w = np.sqrt(max(R ** 2 - lt ** 2, 0.0) / abs(gamma) ** 2) * gamma
    return np.array([lt, np.real(w), np.imag(w)])


def sb2c_point(t: float, gamma: complex) -> np.ndarray:
    return np.array([[t, gamma], [0, 1 / t]], dtype=complex)


def linear_su2_dual(v) -> np.ndarray:
    """``z dx^dy + y dz^dx + x dy^dz`` at ``(x, y, z)``."""
    x, y, z = v
    return np.array([[0, z, -y], [-z, 0, x], [y, -x, 0]])


def linearization_check(entry: CatalogEntry, samples: int = 100, seed: int = 0, tol: float = 1e-6,
                        h: float = 1e-6) -> Report:
    """Push ``Lambda^{G_-}`` forward along :func:`linearize_sb2c` with a
    finite-difference Jacobian and compare with the linear structure.

    ``details["scale_fit"]`` is the least-squares factor ``k`` in
    ``pushforward = k * target``.
    """
    ctx = entry.context
    sub = entry.double.Gminus
    rng = np.random.default_rng(seed)
    worst = 0.0
    num = den = 0.0
    F = lambda u: linearize_sb2c(u[0, 0].real, u[0, 1])
    for _ in range(samples):
        u = sb2c_point(np.exp(rng.uniform(-1, 1)), complex(*rng.uniform(-1, 1, 2)))
        J = np.column_stack([left_derivative(sub, F, u, e, h) for e in np.eye(sub.dim)])
        P = J @ _restricted(ctx, "minus", u) @ J.T
        T = linear_su2_dual(F(u))
        worst = max(worst, float(np.max(np.abs(P - T))))
        num += float(np.sum(P * T))
        den += float(np.sum(T * T))
    fit = num / den if den else float("nan")
    return Report("sb2c_linearization", worst, worst <= tol, {"scale_fit": fit, "samples": samples})


def characteristic_rank_on_chart(entry: CatalogEntry, a, rtol: float = 1e-8) -> int:
    return matrix_rank(chart_bivector(entry.context, "plus", a), rtol)
