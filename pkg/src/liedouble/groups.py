"""Matrix Lie groups given by a basis of their Lie algebra inside gl(n).

Group elements are plain ambient ``n x n`` arrays (complex for SL(2,C)).
Tangent data at a point ``a`` is left-trivialized: a vector ``a X`` is
stored as the coordinate vector of ``X`` and a bivector as the
antisymmetric coefficient matrix of ``a^-1 Lambda(a)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm, logm

from .algebra_core import LieAlgebra, MetricalLieAlgebra, structure_from_realization, float_array
from .exterior import Multivector, insertion, wedge, schouten_algebraic

H_STEP = 1e-5
TOL_MEMBER = 1e-9


class NotFactorizable(ValueError):
    """The point lies outside the open set where the factorization exists."""


def _stack(m):
    m = np.asarray(m)
    return np.concatenate([np.real(m).ravel(), np.imag(m).ravel()])


class MatrixGroup:
    """Connected matrix group with Lie algebra spanned by ``basis``.

    Parameters
    ----------
    name : str
    basis : list of (n, n) arrays
        Matrix realization of the algebra basis.
    member : callable, optional
        Extra membership predicate ``a -> bool`` (e.g. positivity of an entry).
    metric : array, optional
        Gram matrix of an invariant form in this basis.
    """

    def __init__(self, name: str, basis, member: Callable | None = None, metric=None, labels=None):
        self.name = name
        self.basis = [np.asarray(b) for b in basis]
        self.dim = len(self.basis)
        self.n = self.basis[0].shape[0]
        self.complex = any(np.iscomplexobj(b) and np.max(np.abs(np.imag(b))) > 0 for b in self.basis)
        self._B = np.array([_stack(b) for b in self.basis]).T
        if np.linalg.matrix_rank(self._B) != self.dim:
            raise ValueError("realization is not injective")
        self._pinv = np.linalg.pinv(self._B)
        c = structure_from_realization(self.basis)
        self.lie = LieAlgebra(c, labels)
        self.metric = None if metric is None else MetricalLieAlgebra(self.lie, float_array(metric), validate=True)
        self._member = member

    # algebra <-> matrices ------------------------------------------------
    def mat(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.tensordot(x, np.array(self.basis), axes=(0, 0))

    def coords(self, X, tol: float = 1e-8) -> np.ndarray:
        v = _stack(X)
        x = self._pinv @ v
        res = np.max(np.abs(self._B @ x - v), initial=0.0)
        if res > tol * max(1.0, np.max(np.abs(v), initial=0.0)):
            raise ValueError(f"matrix leaves the algebra span (residual {res:.3g})")
        return x

    def identity(self) -> np.ndarray:
        return np.eye(self.n, dtype=complex if self.complex else float)

    def exp(self, x) -> np.ndarray:
        return expm(self.mat(x))

    def log(self, a) -> np.ndarray:
        L = logm(a)
        if not self.complex:
            if np.max(np.abs(np.imag(L)), initial=0.0) > 1e-9:
                raise ValueError("no real logarithm")
            L = np.real(L)
        return self.coords(L)

    def Ad(self, a) -> np.ndarray:
        """Matrix of ``X -> a X a^-1`` in algebra coordinates."""
        ai = np.linalg.inv(a)
        return np.column_stack([self.coords(a @ b @ ai) for b in self.basis])

    def member(self, a, tol: float = TOL_MEMBER) -> bool:
        a = np.asarray(a)
        if a.shape != (self.n, self.n):
            return False
        if not self.complex and np.max(np.abs(np.imag(a)), initial=0.0) > tol:
            return False
        if self._member is not None and not self._member(a, tol):
            return False
        return True

    def random_point(self, rng, scale: float = 1.0) -> np.ndarray:
        return self.exp(rng.uniform(-scale, scale, self.dim))

    def check_realization(self) -> float:
        """Largest deviation between the commutator and the bracket."""
        viol = 0.0
        for i in range(self.dim):
            for j in range(self.dim):
                comm = self.basis[i] @ self.basis[j] - self.basis[j] @ self.basis[i]
                viol = max(viol, float(np.max(np.abs(comm - self.mat(self.lie.c[i, j])))))
        return viol

    def __repr__(self):
        return f"MatrixGroup({self.name!r}, dim={self.dim}, n={self.n})"


def product_group(H: MatrixGroup, K: MatrixGroup, name: str | None = None) -> MatrixGroup:
    """``H x K`` realized by block-diagonal matrices, basis of ``H`` first."""
    n1, n2 = H.n, K.n
    cplx = H.complex or K.complex
    dt = complex if cplx else float

    def block(b, first):
        M = np.zeros((n1 + n2, n1 + n2), dtype=dt)
        if first:
            M[:n1, :n1] = b
        else:
            M[n1:, n1:] = b
        return M

    basis = [block(b, True) for b in H.basis] + [block(b, False) for b in K.basis]

    def member(a, tol):
        a = np.asarray(a)
        off = max(np.max(np.abs(a[:n1, n1:]), initial=0.0), np.max(np.abs(a[n1:, :n1]), initial=0.0))
        return off <= tol and H.member(a[:n1, :n1], tol) and K.member(a[n1:, n1:], tol)

    P = MatrixGroup(name or f"{H.name}x{K.name}", basis, member)
    P.factors = (H, K)
    return P


def split_product(P: MatrixGroup, a):
    """Blocks ``(h, k)`` of a point of a product group."""
    n1 = P.factors[0].n
    return a[:n1, :n1], a[n1:, n1:]


def join_product(h, k) -> np.ndarray:
    n1, n2 = h.shape[0], k.shape[0]
    dt = np.result_type(h, k)
    M = np.zeros((n1 + n2, n1 + n2), dtype=dt)
    M[:n1, :n1] = h
    M[n1:, n1:] = k
    return M


# ---------------------------------------------------------------------------
# tangent bivectors
# ---------------------------------------------------------------------------

@dataclass
class TangentBivector:
    """Bivector at ``base``, left-trivialized: ``Lambda(a) = a . coeff``."""

    base: np.ndarray
    coeff: np.ndarray

    def __post_init__(self):
        self.coeff = np.asarray(self.coeff)
        if np.max(np.abs(self.coeff + self.coeff.T), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(self.coeff))):
            raise ValueError("coefficient matrix is not antisymmetric")

    def ambient(self, group: MatrixGroup) -> np.ndarray:
        """``sum_ij T_ij (a B_i) (x) (a B_j)`` as an (n, n, n, n) array."""
        legs = np.array([self.base @ b for b in group.basis])
        return np.einsum("ij,iab,jcd->abcd", self.coeff, legs, legs)

    def right_trivialized(self, group: MatrixGroup) -> np.ndarray:
        A = group.Ad(self.base)
        return A @ self.coeff @ A.T


def translate(group: MatrixGroup, U, a, side: str = "left") -> TangentBivector:
    """``a U`` (left) or ``U a`` (right) for a bivector ``U`` at the identity,
    given as a Multivector or an antisymmetric coefficient matrix."""
    T = U.to_tensor().astype(float) if isinstance(U, Multivector) else np.asarray(U, dtype=float)
    if side == "left":
        return TangentBivector(a, T)
    if side == "right":
        Ai = group.Ad(np.linalg.inv(a))
        return TangentBivector(a, Ai @ T @ Ai.T)
    raise ValueError("side must be 'left' or 'right'")


def translate_vector(group: MatrixGroup, x, a, side: str = "left") -> np.ndarray:
    """Left-trivialized coordinates of ``a X`` or ``X a``."""
    x = np.asarray(x, dtype=float)
    if side == "left":
        return x
    return group.Ad(np.linalg.inv(a)) @ x


# ---------------------------------------------------------------------------
# left derivatives and the group Schouten bracket
# ---------------------------------------------------------------------------

def left_derivative(group: MatrixGroup, f: Callable, x, X, h: float = H_STEP):
    """``d/dt f(x exp(tX))`` at ``t = 0`` by central differences with one
    Richardson step."""
    X = np.asarray(X, dtype=float)

    def central(s):
        return (np.asarray(f(x @ group.exp(s * X))) - np.asarray(f(x @ group.exp(-s * X)))) / (2 * s)

    return (4 * central(h / 2) - central(h)) / 3


def left_derivatives(group: MatrixGroup, f: Callable, x, h: float = H_STEP) -> list:
    """``[delta f(x) e_k for each basis vector e_k]``."""
    I = np.eye(group.dim)
    return [left_derivative(group, f, x, I[k], h) for k in range(group.dim)]


def _as_multivector(v, dim, deg):
    if isinstance(v, Multivector):
        return v.to_float()
    v = np.asarray(v, dtype=float)
    if deg == 1:
        return Multivector.from_vector(v).to_float() if v.any() else Multivector.zero(dim, 1, False)
    return Multivector.from_tensor(v).to_float()


def group_schouten(group: MatrixGroup, u: Callable, v: Callable, x, p: int, q: int,
                   h: float = H_STEP) -> Multivector:
    """Schouten bracket of left-trivialized multivector fields at ``x``:
    ``[u, v] - i(du) v + (-1)^((p-1)(q-1)) i(dv) u`` with
    ``i(du) v = sum_k (d_k u) ^ i(eps^k) v``.

    ``u`` and ``v`` return coefficient arrays (vectors or antisymmetric
    tensors) or Multivectors of degrees ``p`` and ``q``.
    """
    n = group.dim
    if p + q - 1 > n:
        raise ValueError(f"bracket degree {p + q - 1} exceeds the dimension {n}")
    L = group.lie
    ux = _as_multivector(u(x), n, p)
    vx = _as_multivector(v(x), n, q)
    fu = lambda a: _as_multivector(u(a), n, p).coords()
    fv = lambda a: _as_multivector(v(a), n, q).coords()
    du = [Multivector.from_coords(n, p, c, exact=False) for c in left_derivatives(group, fu, x, h)]
    dv = [Multivector.from_coords(n, q, c, exact=False) for c in left_derivatives(group, fv, x, h)]
    out = schouten_algebraic(L, ux, vx)
    I = np.eye(n)
    for k in range(n):
        out = out - wedge(du[k], insertion(I[k], vx))
        out = out + wedge(dv[k], insertion(I[k], ux)).scale((-1) ** ((p - 1) * (q - 1)))
    return out


def jacobi_defect(group: MatrixGroup, u: Callable, x, p: int = 2, h: float = H_STEP) -> float:
    """Max-abs coefficient of ``[u, u]`` at ``x``; zero by degree when
    ``2p - 1`` exceeds the group dimension."""
    if 2 * p - 1 > group.dim:
        return 0.0
    return float(group_schouten(group, u, u, x, p, p, h).norm())


def vector_field_bracket_ambient(group: MatrixGroup, fu: Callable, fv: Callable, x, h: float = 1e-5) -> np.ndarray:
    """Lie bracket of two vector fields given in ambient form ``x -> V(x)``
    (matrices), by finite differences in the ambient space, returned
    left-trivialized."""
    def D(F, G):
        # directional derivative of F along G at x
        g = G(x)
        return (F(x + h * g) - F(x - h * g)) / (2 * h)
    br = D(fv, fu) - D(fu, fv)
    return group.coords(np.linalg.inv(x) @ br, tol=1e-4)


# ---------------------------------------------------------------------------
# double groups and factorizations
# ---------------------------------------------------------------------------

class DoubleGroup:
    """Group ``G`` whose algebra has basis ``X_1..X_m, Y_1..Y_m`` with
    ``g_+ = span X``, ``g_- = span Y`` and ``gamma(X_i, Y_j) = delta_ij``.

    ``phi_closed`` / ``psi_closed`` are optional exact factorizations
    ``a -> (g, u)`` with ``a = g u`` and ``a -> (v, h)`` with ``a = v h``.
    """

    def __init__(self, group: MatrixGroup, plus_idx, minus_idx, phi_closed=None, psi_closed=None,
                 plus_member=None, minus_member=None, name: str = "", complete: bool = False):
        self.G = group
        self.plus_idx = list(plus_idx)
        self.minus_idx = list(minus_idx)
        self.m = len(self.plus_idx)
        self.name = name or group.name
        self.phi_closed = phi_closed
        self.psi_closed = psi_closed
        self.complete = complete
        n = group.dim
        self.Pp = np.zeros((n, n))
        self.Pm = np.zeros((n, n))
        for i in self.plus_idx:
            self.Pp[i, i] = 1
        for i in self.minus_idx:
            self.Pm[i, i] = 1
        self.Gplus = MatrixGroup(f"{group.name}+", [group.basis[i] for i in self.plus_idx], plus_member)
        self.Gminus = MatrixGroup(f"{group.name}-", [group.basis[i] for i in self.minus_idx], minus_member)
        if group.metric is not None:
            G = group.metric.gram
            pair = G[np.ix_(self.plus_idx, self.minus_idx)]
            if np.max(np.abs(pair - np.eye(self.m))) > 1e-10:
                raise ValueError("basis halves are not dual under the metric")
            if np.max(np.abs(G[np.ix_(self.plus_idx, self.plus_idx)])) > 1e-10 or \
                    np.max(np.abs(G[np.ix_(self.minus_idx, self.minus_idx)])) > 1e-10:
                raise ValueError("halves are not isotropic")

    @property
    def dim(self):
        return self.G.dim

    def C_tensor(self) -> np.ndarray:
        """Antisymmetric tensor of ``C = sum Y_i ^ X_i``."""
        n = self.dim
        T = np.zeros((n, n))
        for x, y in zip(self.plus_idx, self.minus_idx):
            T[y, x] += 1
            T[x, y] -= 1
        return T

    def embed_plus(self, x) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.plus_idx] = x
        return out

    def embed_minus(self, y) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.minus_idx] = y
        return out

    # factorizations -------------------------------------------------------
    def factorize_phi(self, a, method: str = "auto", log_hint=None):
        """``a = g u`` with ``g`` in ``G_+`` and ``u`` in ``G_-``."""
        if method in ("auto", "closed") and self.phi_closed is not None:
            return self.phi_closed(a)
        if method == "closed":
            raise ValueError("no closed form available")
        return newton_factorize(self, a, log_hint=log_hint)

    def factorize_psi(self, a, method: str = "auto", log_hint=None):
        """``a = v h`` with ``v`` in ``G_-`` and ``h`` in ``G_+``."""
        if method in ("auto", "closed") and self.psi_closed is not None:
            return self.psi_closed(a)
        if method == "closed":
            raise ValueError("no closed form available")
        ai = np.linalg.inv(a)
        hint = None if log_hint is None else -np.asarray(log_hint)
        g, u = newton_factorize(self, ai, log_hint=hint)
        return np.linalg.inv(u), np.linalg.inv(g)

    # the four projections
    def p_plus_left(self, a, **kw):
        return self.factorize_phi(a, **kw)[0]

    def p_minus_right(self, a, **kw):
        return self.factorize_phi(a, **kw)[1]

    def p_minus_left(self, a, **kw):
        return self.factorize_psi(a, **kw)[0]

    def p_plus_right(self, a, **kw):
        return self.factorize_psi(a, **kw)[1]

    def projection(self, name: str) -> Callable:
        return {"plus_left": self.p_plus_left, "minus_right": self.p_minus_right,
                "minus_left": self.p_minus_left, "plus_right": self.p_plus_right}[name]


def _path(group: MatrixGroup, a, log_hint):
    """Path ``s -> a(s)`` from the identity to ``a`` inside the group."""
    if log_hint is not None:
        x = np.asarray(log_hint, dtype=float)
        return lambda s: group.exp(s * x)
    try:
        x = group.log(a)
        if np.max(np.abs(group.exp(x) - a)) <= 1e-8 * max(1.0, np.max(np.abs(a))):
            return lambda s: group.exp(s * x)
    except ValueError:
        pass
    # polar path a = U P: rotate and stretch separately
    from scipy.linalg import polar
    U, P = polar(a)
    LU, LP = logm(U), logm(P)
    if not group.complex:
        LU, LP = np.real(LU), np.real(LP)
    return lambda s: expm(s * LU) @ expm(s * LP)


def newton_factorize(D: DoubleGroup, a, log_hint=None, steps: int | None = None, max_stagnant: int = 50,
                     tol: float = 1e-13):
    """Damped Newton for ``a = g u`` continued along a path from ``e``.

    Each correction uses ``delta = log(g^-1 a u^-1)`` split as
    ``g <- g exp(pr_+ delta)``, ``u <- exp(pr_- delta) u``.  Without an
    explicit ``steps`` a direct solve is tried first and the 16-step
    continuation is the fallback.
    """
    if steps is None:
        try:
            return newton_factorize(D, a, log_hint, 1, max_stagnant, tol)
        except NotFactorizable:
            return newton_factorize(D, a, log_hint, 16, max_stagnant, tol)
    G = D.G
    path = _path(G, a, log_hint)
    g = G.identity()
    u = G.identity()
    for k in range(1, steps + 1):
        target = path(k / steps) if k < steps else np.asarray(a)
        g, u = _newton_solve(D, target, g, u, max_stagnant, tol if k == steps else 1e-10)
    res = np.max(np.abs(g @ u - a))
    if res > 1e-9 * max(1.0, np.max(np.abs(a))):
        raise NotFactorizable(f"Newton did not converge (residual {res:.3g})")
    if not (D.Gplus.member(g) and D.Gminus.member(u)):
        raise NotFactorizable("factors leave the subgroups")
    return g, u


def _newton_solve(D: DoubleGroup, a, g, u, max_stagnant, tol):
    G = D.G
    best = np.inf
    stagnant = 0
    step = 1.0
    for _ in range(200):
        M = np.linalg.solve(g, a) @ np.linalg.inv(u)
        try:
            Lm = logm(M)
        except Exception as exc:  # pragma: no cover - scipy raises rarely
            raise NotFactorizable(str(exc))
        if not G.complex:
            Lm = np.real(Lm)
        try:
            delta = G.coords(Lm, tol=1e-6)
        except ValueError:
            raise NotFactorizable("correction leaves the algebra")
        r = np.linalg.norm(delta)
        if not np.isfinite(r):
            raise NotFactorizable("non-finite correction")
        if r < tol:
            return g, u
        if r < best * (1 - 1e-3):
            best = r
            stagnant = 0
            step = min(1.0, step * 2)
        else:
            stagnant += 1
            step = max(step / 2, 1e-3)
            if stagnant >= max_stagnant:
                raise NotFactorizable("Newton stagnated")
        g = g @ G.exp(step * (D.Pp @ delta))
        u = G.exp(step * (D.Pm @ delta)) @ u
    if best < 1e-9:
        return g, u
    raise NotFactorizable("Newton did not converge")


def maurer_cartan_check(group: MatrixGroup, a, X) -> float:
    """``|kappa_r(aX) - Ad(a) kappa_l(aX)|`` for the tangent vector ``aX``."""
    xi = a @ group.mat(X)
    kl = group.coords(np.linalg.solve(a, xi))
    kr = group.coords(xi @ np.linalg.inv(a))
    return float(np.max(np.abs(kr - group.Ad(a) @ kl)))
