"""Poisson tensors on a double group and the geometry built from them.

Conventions
-----------
* Bivectors are left-trivialized: ``Lambda(a) = a . lam`` where ``lam`` is
  the antisymmetric coefficient matrix in the algebra basis.  A vector
  ``Z a`` has left-trivialized coordinates ``Ad(a^-1) Z``.
* The basis is ``X_1..X_m`` spanning ``g_+`` and ``Y_1..Y_m`` spanning
  ``g_-`` (positions given by the double group), ``gamma(X_i, Y_j) = delta_ij``.
* ``C_+ = sum Y_i (x) X_i``, ``C_- = sum X_i (x) Y_i``, ``C = C_+ - C_-``.
* ``Lambda_(+/-)(a) = s (aC +/- Ca)`` with ``s = 1/2`` by default
  (``scale="half"``) and ``s = 1`` for ``scale="unit"``.
* The sharp map contracts the first slot: ``alpha^# = alpha @ lam``.
* A covector ``gamma(a xi, .)`` has left-trivialized coefficients
  ``G xi``; ``gamma(xi a, .)`` has ``Ad(a)^T G xi``.
* ``{f, g} = df @ lam @ dg`` with ``df_k = d/dt f(a exp(t B_k))``.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .algebra_core import Report
from .exterior import CochainMap, Multivector
from .groups import (DoubleGroup, MatrixGroup, NotFactorizable, TangentBivector, join_product,
                     left_derivative, product_group, split_product)

VARIANTS = ("plus", "minus", "left_affine_part", "right_affine_part", "Gplus", "Gminus",
            "phi_plus", "phi_minus", "psi_plus", "psi_minus")
GROUP_VARIANTS = VARIANTS[:6]
PRODUCT_VARIANTS = VARIANTS[6:]
RANK_RTOL = 1e-8
TOL_ANALYTIC = 1e-9
TOL_FD = 1e-5


class DegeneratePoint(ValueError):
    """The Poisson tensor is not invertible at the requested point."""


def _skew_defect(M) -> float:
    return float(np.max(np.abs(M + M.T), initial=0.0))


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------

class DoubleGroupContext:
    """A double group together with the tensors ``C``, ``C_+``, ``C_-``.

    Parameters
    ----------
    double : DoubleGroup
    scale : {"half", "unit"}
        Normalization of ``Lambda_(+/-)``.
    ambient_metric : callable, optional
        ``(U, V) -> float`` extending ``gamma`` to ambient matrices; enables
        the ambient covector pairing for dressing fields.
    """

    def __init__(self, double: DoubleGroup, scale: str = "half", ambient_metric: Callable | None = None,
                 name: str = ""):
        if scale not in ("half", "unit"):
            raise ValueError("scale must be 'half' or 'unit'")
        if double.G.metric is None:
            raise ValueError("the group needs an invariant metric")
        self.D = double
        self.G = double.G
        self.name = name or double.name
        self.n = double.dim
        self.m = double.m
        self.scale = scale
        self.s = 0.5 if scale == "half" else 1.0
        self.gram = np.asarray(self.G.metric.gram, dtype=float)
        self.ambient_metric = ambient_metric
        I = np.eye(self.n)
        self.X = I[:, double.plus_idx].T
        self.Y = I[:, double.minus_idx].T
        self.Pp, self.Pm = double.Pp, double.Pm
        self.C_plus = sum(np.outer(y, x) for x, y in zip(self.X, self.Y))
        self.C_minus = sum(np.outer(x, y) for x, y in zip(self.X, self.Y))
        self.C = self.C_plus - self.C_minus

    # group helpers ---------------------------------------------------------
    def Ad(self, a) -> np.ndarray:
        return self.G.Ad(a)

    def Adi(self, a) -> np.ndarray:
        return self.G.Ad(np.linalg.inv(a))

    def xi(self, kind: str, i: int) -> np.ndarray:
        """Coordinate vector of ``X_i`` (``kind="X"``) or ``Y_i``."""
        return (self.X if kind == "X" else self.Y)[i]

    def check(self, points) -> Report:
        """Duality, antisymmetry of ``C`` and ``aC_+ + aC_- = C_+a + C_-a``."""
        duality = float(np.max(np.abs(self.X @ self.gram @ self.Y.T - np.eye(self.m))))
        skew = _skew_defect(self.C)
        S = self.C_plus + self.C_minus
        ident = 0.0
        for a in points:
            Ai = self.Adi(a)
            ident = max(ident, float(np.max(np.abs(S - Ai @ S @ Ai.T))))
        res = max(duality, skew, ident)
        return Report("double_group_context", res, res <= 1e-10,
                      {"duality": duality, "skew": skew, "translation_identity": ident})


# ---------------------------------------------------------------------------
# Poisson tensors on G
# ---------------------------------------------------------------------------

def lambda_forms(ctx: DoubleGroupContext, variant: str, a) -> dict:
    """All equivalent closed expressions for ``lam_(+/-)(a)``, each scaled."""
    Ai = ctx.Adi(a)
    k = 2 * ctx.s
    T = lambda M: Ai @ M @ Ai.T
    if variant == "plus":
        return {"definition": ctx.s * (ctx.C + T(ctx.C)),
                "left_C_plus": k * (ctx.C_plus - T(ctx.C_minus)),
                "right_C_plus": k * (T(ctx.C_plus) - ctx.C_minus)}
    if variant == "minus":
        return {"definition": ctx.s * (ctx.C - T(ctx.C)),
                "left_C_plus": k * (ctx.C_plus - T(ctx.C_plus)),
                "right_C_minus": k * (T(ctx.C_minus) - ctx.C_minus)}
    raise ValueError(f"no alternative forms for variant {variant!r}")


def alternative_forms_defect(ctx: DoubleGroupContext, variant: str, a) -> float:
    forms = list(lambda_forms(ctx, variant, a).values())
    return max(float(np.max(np.abs(f - forms[0]))) for f in forms[1:])


def subgroup_forms(ctx: DoubleGroupContext, side: str, p) -> dict:
    """The four equivalent expressions for ``lam^{G_+}(g)`` or ``lam^{G_-}(u)``
    as full ``n x n`` coefficient matrices."""
    A, Ai = ctx.Ad(p), ctx.Adi(p)
    k = 2 * ctx.s
    if side == "plus":
        P, Cs, first, second = ctx.Pp, ctx.C_minus, ctx.X, ctx.Y
    elif side == "minus":
        P, Cs, first, second = ctx.Pm, ctx.C_plus, ctx.Y, ctx.X
    else:
        raise ValueError("side must be 'plus' or 'minus'")
    M = Ai @ P @ A
    return {
        "conjugated_projection": k * (Cs @ M.T),
        "sum_left": k * sum(np.outer(f, M @ s) for f, s in zip(first, second)),
        "translated_C": -k * (Ai @ Cs @ (P @ Ai).T),
        "sum_right": -k * sum(np.outer(Ai @ f, P @ Ai @ s) for f, s in zip(first, second)),
    }


def in_subgroup(ctx: DoubleGroupContext, side: str, p, tol: float = 1e-8) -> bool:
    sub = ctx.D.Gplus if side == "plus" else ctx.D.Gminus
    if not sub.member(p, tol):
        return False
    A = ctx.Ad(p)
    inside, outside = (ctx.Pp, ctx.Pm) if side == "plus" else (ctx.Pm, ctx.Pp)
    return float(np.max(np.abs(outside @ A @ inside))) <= tol * max(1.0, float(np.max(np.abs(A))))


def lam_matrix(ctx: DoubleGroupContext, variant: str, a) -> np.ndarray:
    """Left-trivialized coefficient matrix of a structure on ``G`` (or on a
    subgroup, embedded in the full basis)."""
    if variant in ("plus", "minus"):
        return lambda_forms(ctx, variant, a)["definition"]
    if variant == "left_affine_part":
        return lam_matrix(ctx, "plus", a) - ctx.s * 2 * ctx.C
    if variant == "right_affine_part":
        Ai = ctx.Adi(a)
        return lam_matrix(ctx, "plus", a) - Ai @ (2 * ctx.s * ctx.C) @ Ai.T
    if variant == "Gplus":
        return subgroup_forms(ctx, "plus", a)["sum_left"]
    if variant == "Gminus":
        return subgroup_forms(ctx, "minus", a)["sum_left"]
    raise ValueError(f"unknown variant {variant!r}")


def eval_lambda(ctx: DoubleGroupContext, variant: str, a) -> TangentBivector:
    """Evaluate one of the structures on ``G`` at ``a``."""
    if variant not in GROUP_VARIANTS[:4]:
        raise ValueError(f"variant {variant!r} does not live on G")
    return TangentBivector(np.asarray(a), lam_matrix(ctx, variant, a))


def eval_subgroup_lie_poisson(ctx: DoubleGroupContext, side: str, p) -> TangentBivector:
    """``Lambda^{G_+}`` or ``Lambda^{G_-}`` at a subgroup point, in the
    subgroup basis (``X_i`` resp. ``Y_i``)."""
    if not in_subgroup(ctx, side, p):
        raise ValueError(f"point is not in the {side} subgroup")
    idx = ctx.D.plus_idx if side == "plus" else ctx.D.minus_idx
    full = lam_matrix(ctx, "Gplus" if side == "plus" else "Gminus", p)
    return TangentBivector(np.asarray(p), full[np.ix_(idx, idx)])


def subgroup_forms_defect(ctx: DoubleGroupContext, side: str, p) -> dict:
    forms = subgroup_forms(ctx, side, p)
    ref = forms["sum_left"]
    out = {k: float(np.max(np.abs(v - ref))) for k, v in forms.items()}
    idx = ctx.D.minus_idx if side == "plus" else ctx.D.plus_idx
    out["tangency"] = float(np.max(np.abs(ref[idx, :]), initial=0.0))
    out["skew"] = _skew_defect(ref)
    return out


# ---------------------------------------------------------------------------
# structures on the product groups
# ---------------------------------------------------------------------------

def product_space(ctx: DoubleGroupContext, variant: str) -> MatrixGroup:
    """``G_+ x G_-`` for the phi variants, ``G_- x G_+`` for psi."""
    D = ctx.D
    if variant.startswith("phi"):
        return product_group(D.Gplus, D.Gminus, f"{D.name}:G+xG-")
    return product_group(D.Gminus, D.Gplus, f"{D.name}:G-xG+")


def _restricted(ctx, side, p):
    idx = ctx.D.plus_idx if side == "plus" else ctx.D.minus_idx
    full = lam_matrix(ctx, "Gplus" if side == "plus" else "Gminus", p)
    return full[np.ix_(idx, idx)]


def eval_product_structure(ctx: DoubleGroupContext, variant: str, p, q) -> np.ndarray:
    """Coefficient matrix on the product, first factor's basis first.

    ``phi_*`` take ``(g, u)`` in ``G_+ x G_-``; ``psi_*`` take ``(v, h)``
    in ``G_- x G_+``.
    """
    m = ctx.m
    k = 2 * ctx.s
    M = np.zeros((2 * m, 2 * m))
    if variant in ("phi_plus", "phi_minus"):
        g, u = p, q
        Lg, Lu = _restricted(ctx, "plus", g), _restricted(ctx, "minus", u)
        if variant == "phi_minus":
            M[:m, :m], M[m:, m:] = -Lg, Lu
            return M
        M[:m, :m], M[m:, m:] = Lg, Lu
        Aui = ctx.Adi(u)
        # sum Y_i u ^ g X_i ; Y_i u = u Ad(u^-1) Y_i lies in g_- coordinates
        W = np.array([(Aui @ y)[ctx.D.minus_idx] for y in ctx.Y]).T
        M[m:, :m] += k * W
        M[:m, m:] -= k * W.T
        return M
    if variant in ("psi_plus", "psi_minus"):
        v, h = p, q
        Lv, Lh = _restricted(ctx, "minus", v), _restricted(ctx, "plus", h)
        if variant == "psi_minus":
            M[:m, :m], M[m:, m:] = Lv, -Lh
            return M
        M[:m, :m], M[m:, m:] = -Lv, -Lh
        Ahi = ctx.Adi(h)
        # sum v Y_i ^ X_i h ; X_i h = h Ad(h^-1) X_i lies in g_+ coordinates
        Z = np.array([(Ahi @ x)[ctx.D.plus_idx] for x in ctx.X])
        M[:m, m:] += k * Z
        M[m:, :m] -= k * Z.T
        return M
    raise ValueError(f"unknown product variant {variant!r}")


def product_pushforward(ctx: DoubleGroupContext, variant: str, p, q) -> np.ndarray:
    """Tangent map of ``(p, q) -> p q`` in left-trivialized coordinates."""
    I = np.eye(ctx.n)
    if variant.startswith("phi"):
        return np.hstack([ctx.Adi(q)[:, ctx.D.plus_idx], I[:, ctx.D.minus_idx]])
    return np.hstack([ctx.Adi(q)[:, ctx.D.minus_idx], I[:, ctx.D.plus_idx]])


def product_intertwining_defect(ctx: DoubleGroupContext, variant: str, p, q) -> float:
    """``|T(mult) . Lambda^product - Lambda_(+/-) o mult|`` at ``(p, q)``."""
    M = eval_product_structure(ctx, variant, p, q)
    P = product_pushforward(ctx, variant, p, q)
    target = lam_matrix(ctx, "plus" if variant.endswith("plus") else "minus", p @ q)
    return float(np.max(np.abs(P @ M @ P.T - target)))


# ---------------------------------------------------------------------------
# functions and brackets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateFunction:
    """Matrix entry ``(row, col)``; ``part`` is ``z`` (the complex entry),
    ``zbar`` (its conjugate), ``re`` or ``im``."""

    row: int
    col: int
    part: str = "z"

    def __post_init__(self):
        if self.part not in ("z", "zbar", "re", "im"):
            raise ValueError(f"unknown part {self.part!r}")
        if self.row < 0 or self.col < 0:
            raise ValueError("selector out of range")

    def _apply(self, v):
        return {"z": v, "zbar": np.conj(v), "re": np.real(v), "im": np.imag(v)}[self.part]

    def value(self, a):
        return self._apply(np.asarray(a)[self.row, self.col])

    def differential(self, ctx: DoubleGroupContext, a) -> np.ndarray:
        a = np.asarray(a)
        if self.row >= a.shape[0] or self.col >= a.shape[1]:
            raise ValueError("selector out of range")
        return np.array([self._apply((a @ b)[self.row, self.col]) for b in ctx.G.basis])

    @property
    def label(self) -> str:
        z = f"z{2 * self.row + self.col + 1}"
        return {"z": z, "zbar": f"conj({z})", "re": f"Re {z}", "im": f"Im {z}"}[self.part]


@dataclass(frozen=True)
class DeterminantFunction:
    """``det`` or its conjugate; ``d det(a)(aB) = det(a) tr(B)``."""

    conj: bool = False

    def value(self, a):
        d = np.linalg.det(a)
        return np.conj(d) if self.conj else d

    def differential(self, ctx: DoubleGroupContext, a) -> np.ndarray:
        d = np.linalg.det(a)
        v = np.array([d * np.trace(b) for b in ctx.G.basis])
        return np.conj(v) if self.conj else v

    @property
    def label(self) -> str:
        return "conj(det)" if self.conj else "det"


@dataclass(frozen=True)
class SampledFunction:
    """Arbitrary function with a finite-difference differential."""

    f: Callable
    name: str = "f"

    def value(self, a):
        return self.f(a)

    def differential(self, ctx: DoubleGroupContext, a) -> np.ndarray:
        I = np.eye(ctx.n)
        return np.array([left_derivative(ctx.G, self.f, a, I[k]) for k in range(ctx.n)])

    @property
    def label(self) -> str:
        return self.name


def poisson_bracket(ctx: DoubleGroupContext, variant: str, f, g, a):
    """``{f, g}(a) = <df ^ dg, Lambda(a)>``."""
    lam = lam_matrix(ctx, variant, a)
    return f.differential(ctx, a) @ lam @ g.differential(ctx, a)


def all_coordinates(n: int = 2, complex_entries: bool = True) -> list:
    parts = ("z", "zbar") if complex_entries else ("re",)
    return [CoordinateFunction(r, c, p) for p in parts for r in range(n) for c in range(n)]


def casimir_check(ctx: DoubleGroupContext, variant: str, f, points, tol: float = TOL_ANALYTIC,
                  coordinates=None) -> Report:
    """``max |{f, z}|`` over coordinate functions ``z`` and sample points."""
    coords = coordinates or all_coordinates(ctx.G.n, ctx.G.complex)
    worst = 0.0
    for a in points:
        lam = lam_matrix(ctx, variant, a)
        df = f.differential(ctx, a)
        for z in coords:
            worst = max(worst, float(abs(df @ lam @ z.differential(ctx, a))))
    return Report(f"casimir[{getattr(f, 'label', 'f')}]", worst, worst <= tol, {"points": len(points)})


# ---------------------------------------------------------------------------
# dressing fields
# ---------------------------------------------------------------------------

def dressing_formula(ctx: DoubleGroupContext, variant: str, kind: str, i: int, side: str, a) -> np.ndarray:
    """Closed formulas for the left (``side="left"``) and right dressing
    fields of ``Lambda_(+/-)`` along ``X_i`` or ``Y_i``."""
    A, Ai = ctx.Ad(a), ctx.Adi(a)
    x = ctx.xi(kind, i)
    Pp, Pm = ctx.Pp, ctx.Pm
    table = {
        ("plus", "X", "left"): -Ai @ Pp @ A @ x,
        ("plus", "X", "right"): Pp @ Ai @ x,
        ("plus", "Y", "left"): Ai @ Pm @ A @ x,
        ("plus", "Y", "right"): -Pm @ Ai @ x,
        ("minus", "X", "left"): Ai @ Pm @ A @ x,
        ("minus", "X", "right"): -Pm @ Ai @ x,
        ("minus", "Y", "left"): -Ai @ Pp @ A @ x,
        ("minus", "Y", "right"): Pp @ Ai @ x,
    }
    return 2 * ctx.s * table[(variant, kind, side)]


def dressing_covector(ctx: DoubleGroupContext, kind: str, i: int, side: str, a,
                      pairing: str = "invariant") -> np.ndarray:
    """Left-trivialized coefficients of ``gamma(a xi)`` (left) or
    ``gamma(xi a)`` (right)."""
    x = ctx.xi(kind, i)
    if pairing == "invariant":
        return ctx.gram @ x if side == "left" else ctx.Ad(a).T @ ctx.gram @ x
    if pairing == "ambient":
        if ctx.ambient_metric is None:
            raise ValueError("no ambient metric for this double")
        X = ctx.G.mat(x)
        U = a @ X if side == "left" else X @ a
        return np.array([ctx.ambient_metric(U, a @ b) for b in ctx.G.basis])
    raise ValueError("pairing must be 'invariant' or 'ambient'")


def dressing_field(ctx: DoubleGroupContext, variant: str, kind: str, i: int, side: str, a,
                   method: str = "sharp", pairing: str = "invariant") -> np.ndarray:
    """``lambda(xi)(a) = -(a xi)^#`` or ``rho(xi)(a) = (xi a)^#``.

    ``method="formula"`` returns the closed formula instead of the sharp
    map (only with the invariant pairing).
    """
    if method == "formula":
        if pairing != "invariant":
            raise ValueError("closed formulas assume the invariant pairing")
        return dressing_formula(ctx, variant, kind, i, side, a)
    alpha = dressing_covector(ctx, kind, i, side, a, pairing)
    v = alpha @ lam_matrix(ctx, variant, a)
    return -v if side == "left" else v


def dressing_consistency(ctx: DoubleGroupContext, points, tol: float = TOL_ANALYTIC) -> Report:
    """Closed formulas against sharp contractions for all eight fields."""
    per = {}
    for variant in ("plus", "minus"):
        for kind in ("X", "Y"):
            for side in ("left", "right"):
                key = f"{'lambda' if side == 'left' else 'rho'}_{variant}({kind})"
                r = 0.0
                for a in points:
                    for i in range(ctx.m):
                        d = dressing_formula(ctx, variant, kind, i, side, a) - \
                            dressing_field(ctx, variant, kind, i, side, a)
                        r = max(r, float(np.max(np.abs(d))))
                per[key] = r
    worst = max(per.values())
    return Report("dressing_formula_vs_sharp", worst, worst <= tol,
                  {"per_field": per, "failing": sorted(k for k, v in per.items() if v > tol)})


# ---------------------------------------------------------------------------
# infinitesimal actions, sign dictionary, local actions
# ---------------------------------------------------------------------------

ACTION_KINDS = ("lambda+", "lambda-", "rho+", "rho-")


def infinitesimal_action(ctx: DoubleGroupContext, kind: str, B, a) -> np.ndarray:
    """``lambda^(+/-)_B(a) = -pr_(+/-)(Ad(a)B) a`` and
    ``rho^(+/-)_B(a) = -a pr_(+/-)(Ad(a^-1)B)``, left-trivialized."""
    B = np.asarray(B, dtype=float)
    P = ctx.Pp if kind.endswith("+") else ctx.Pm
    if kind.startswith("lambda"):
        return -ctx.Adi(a) @ P @ ctx.Ad(a) @ B
    if kind.startswith("rho"):
        return -P @ ctx.Adi(a) @ B
    raise ValueError(f"unknown action kind {kind!r}")


# (variant, dressing side, element kind) -> (sign, action kind)
SIGN_DICTIONARY = {
    ("plus", "left", "X"): (1, "lambda+"),
    ("plus", "left", "Y"): (-1, "lambda-"),
    ("plus", "right", "X"): (-1, "rho+"),
    ("plus", "right", "Y"): (-1, "rho-"),
    ("minus", "left", "X"): (-1, "lambda-"),
    ("minus", "left", "Y"): (1, "lambda+"),
    ("minus", "right", "X"): (-1, "rho-"),
    ("minus", "right", "Y"): (1, "rho+"),
}


def sign_dictionary(ctx: DoubleGroupContext, points, tol: float = TOL_ANALYTIC) -> Report:
    """Dressing fields (sharp map) against signed infinitesimal actions."""
    per = {}
    for (variant, side, kind), (sign, act) in SIGN_DICTIONARY.items():
        r = 0.0
        for a in points:
            for i in range(ctx.m):
                lhs = dressing_field(ctx, variant, kind, i, side, a)
                rhs = sign * infinitesimal_action(ctx, act, ctx.xi(kind, i), a)
                r = max(r, float(np.max(np.abs(lhs - rhs))))
        name = f"{'lambda' if side == 'left' else 'rho'}_{variant}({kind}) = {'+' if sign > 0 else '-'}{act}"
        per[name] = r
    worst = max(per.values())
    return Report("dressing_sign_dictionary", worst, worst <= tol,
                  {"per_entry": per, "failing": sorted(k for k, v in per.items() if v > tol)})


def local_action(ctx: DoubleGroupContext, kind: str, b, a, rho_convention: str = "as_stated", **kw) -> np.ndarray:
    """``lambda^+_b(a) = p^+_r(a b^-1 a^-1) a``, ``lambda^-_b(a) = p^-_r(...) a``,
    ``rho^+_b(a) = a p^+_l(a b^-1 a^-1)``, ``rho^-_b(a) = a p^-_l(...)``.

    With ``rho_convention="conjugate_inverse"`` the right actions use
    ``a^-1 b^-1 a`` instead; only that version satisfies the right action
    law and has the generators ``-a pr(Ad(a^-1) B)``.
    """
    ai, bi = np.linalg.inv(a), np.linalg.inv(b)
    w = a @ bi @ ai
    D = ctx.D
    if kind == "lambda+":
        return D.p_plus_right(w, **kw) @ a
    if kind == "lambda-":
        return D.p_minus_right(w, **kw) @ a
    if kind in ("rho+", "rho-"):
        if rho_convention == "conjugate_inverse":
            w = ai @ bi @ a
        elif rho_convention != "as_stated":
            raise ValueError("rho_convention must be 'as_stated' or 'conjugate_inverse'")
        return a @ (D.p_plus_left(w, **kw) if kind == "rho+" else D.p_minus_left(w, **kw))
    raise ValueError(f"unknown action kind {kind!r}")


def local_action_generator(ctx: DoubleGroupContext, kind: str, B, a, h: float = 1e-5,
                           rho_convention: str = "as_stated") -> np.ndarray:
    """``d/dt local_action(exp(tB), a)`` at ``t = 0``, left-trivialized."""
    B = np.asarray(B, dtype=float)
    ai = np.linalg.inv(a)

    def at(t):
        return local_action(ctx, kind, ctx.G.exp(t * B), a, rho_convention)

    d = (4 * (at(h / 2) - at(-h / 2)) / h - (at(h) - at(-h)) / (2 * h)) / 3
    return ctx.G.coords(ai @ d, tol=1e-5)


def check_local_actions(ctx: DoubleGroupContext, triples, tol: float = 1e-9,
                        rho_convention: str = "as_stated") -> Report:
    """Action laws, subgroup invariance and the composition formula for
    ``lambda^+`` and ``lambda^-`` on samples ``(a, b, b')``."""
    law = {k: 0.0 for k in ACTION_KINDS}
    invariant = 0.0
    commute = 0.0
    composed = 0.0
    inv = np.linalg.inv
    for a, b, bp in triples:
        for kind in ACTION_KINDS:
            act = lambda c, x: local_action(ctx, kind, c, x, rho_convention)
            prod = b @ bp if kind.startswith("lambda") else bp @ b
            law[kind] = max(law[kind], float(np.max(np.abs(act(b, act(bp, a)) - act(prod, a)))))
        one = local_action(ctx, "lambda+", b, local_action(ctx, "lambda-", bp, a))
        two = local_action(ctx, "lambda-", bp, local_action(ctx, "lambda+", b, a))
        commute = max(commute, float(np.max(np.abs(one - two))))
        direct = ctx.D.p_minus_right(a @ inv(bp) @ b @ inv(a)) @ a @ inv(b)
        composed = max(composed, float(np.max(np.abs(one - direct))))
        g = ctx.D.p_plus_left(a)
        u = ctx.D.p_minus_right(a)
        moved_g = local_action(ctx, "lambda+", b, g)
        moved_u = local_action(ctx, "lambda-", b, u)
        ok = in_subgroup(ctx, "plus", moved_g, 1e-7) and in_subgroup(ctx, "minus", moved_u, 1e-7)
        invariant = max(invariant, 0.0 if ok else 1.0)
    res = max(max(law.values()), invariant, commute, composed)
    details = {f"action_law[{k}]": v for k, v in law.items()}
    details.update({"subgroups_invariant": invariant, "lambda_commute": commute,
                    "composition_formula": composed, "rho_convention": rho_convention})
    return Report("local_actions", res, res <= tol, details)


# ---------------------------------------------------------------------------
# undressing fields and the symplectic form
# ---------------------------------------------------------------------------

def _factor_data(ctx: DoubleGroupContext, a, **kw):
    g, u = ctx.D.factorize_phi(a, **kw)
    v, h = ctx.D.factorize_psi(a, **kw)
    return g, u, v, h


def undressing_formulas(ctx: DoubleGroupContext, a, factors=None) -> dict:
    """The eight undressing fields at ``a = g u = v h`` by closed formula; each
    entry is an ``(m, n)`` array, row ``i`` for index ``i``."""
    g, u, v, h = factors or _factor_data(ctx, a)
    Ai = ctx.Adi(a)
    Pp, Pm = ctx.Pp, ctx.Pm
    Aui, Ag, Av, Ahi = ctx.Adi(u), ctx.Ad(g), ctx.Ad(v), ctx.Adi(h)
    k = 2 * ctx.s
    rows = lambda f, B: k * np.array([f(x) for x in B])
    return {
        "X_i u": rows(lambda x: Pp @ Aui @ x, ctx.X),
        "Y_i g": rows(lambda y: -Ai @ y, ctx.Y),
        "u X_i": rows(lambda x: x, ctx.X),
        "g Y_i": rows(lambda y: -Ai @ Pm @ Ag @ y, ctx.Y),
        "v X_i": rows(lambda x: Ai @ Pp @ Av @ x, ctx.X),
        "h Y_i": rows(lambda y: -y, ctx.Y),
        "X_i v": rows(lambda x: Ai @ x, ctx.X),
        "Y_i h": rows(lambda y: -Pm @ Ahi @ y, ctx.Y),
    }


def factor_coframes(ctx: DoubleGroupContext, a, factors=None) -> dict:
    """Left-trivialized covectors of the eight translated forms ``X_i u``,
    ``u X_i``, ... pulled back to ``G`` through the factorizations.

    Returns arrays of shape ``(m, n)``.
    """
    g, u, v, h = factors or _factor_data(ctx, a)
    Pp, Pm, Gm = ctx.Pp, ctx.Pm, ctx.gram
    Au, Aui, Ag = ctx.Ad(u), ctx.Adi(u), ctx.Ad(g)
    Ah, Ahi, Av = ctx.Ad(h), ctx.Adi(h), ctx.Ad(v)
    # differentials of the factors, as maps Z -> g-valued 1-forms
    maps = {
        "X_i u": (Pm @ Au, ctx.X),          # d u u^-1
        "u X_i": (Aui @ Pm @ Au, ctx.X),    # u^-1 d u
        "Y_i g": (Ag @ Pp @ Au, ctx.Y),     # d g g^-1
        "g Y_i": (Pp @ Au, ctx.Y),          # g^-1 d g
        "v X_i": (Pm @ Ah, ctx.X),          # v^-1 d v
        "X_i v": (Av @ Pm @ Ah, ctx.X),     # d v v^-1
        "h Y_i": (Ahi @ Pp @ Ah, ctx.Y),    # h^-1 d h
        "Y_i h": (Pp @ Ah, ctx.Y),          # d h h^-1
    }
    return {k: np.array([M.T @ Gm @ x for x in B]) for k, (M, B) in maps.items()}


def maurer_cartan_pullbacks(ctx: DoubleGroupContext, a, factors=None) -> dict:
    """Matrices of the pulled back Maurer-Cartan forms, ``Z -> g``."""
    g, u, v, h = factors or _factor_data(ctx, a)
    Pp, Pm = ctx.Pp, ctx.Pm
    Au, Aui, Ag = ctx.Ad(u), ctx.Adi(u), ctx.Ad(g)
    Ah, Ahi, Av = ctx.Ad(h), ctx.Adi(h), ctx.Ad(v)
    return {"mu_phi_Gminus": Aui @ Pm @ Au, "theta_phi_Gminus": Pm @ Au,
            "mu_phi_Gplus": Pp @ Au, "theta_phi_Gplus": Ag @ Pp @ Au,
            "mu_psi_Gminus": Pm @ Ah, "theta_psi_Gminus": Av @ Pm @ Ah,
            "mu_psi_Gplus": Ahi @ Pp @ Ah, "theta_psi_Gplus": Pp @ Ah}


def undressing_sharp(ctx: DoubleGroupContext, a, factors=None) -> dict:
    """Sharp images of the pulled back coframes under ``Lambda_+``."""
    lam = lam_matrix(ctx, "plus", a)
    return {k: C @ lam for k, C in factor_coframes(ctx, a, factors).items()}


def undressing_consistency(ctx: DoubleGroupContext, points, tol: float = TOL_ANALYTIC) -> Report:
    per = {}
    for a in points:
        fac = _factor_data(ctx, a)
        F = undressing_formulas(ctx, a, fac)
        S = undressing_sharp(ctx, a, fac)
        for k in F:
            per[k] = max(per.get(k, 0.0), float(np.max(np.abs(F[k] - S[k]))))
    worst = max(per.values())
    return Report("undressing_formula_vs_sharp", worst, worst <= tol,
                  {"per_field": per, "failing": sorted(k for k, v in per.items() if v > tol)})


def symplectic_form(ctx: DoubleGroupContext, a, rtol: float = RANK_RTOL) -> np.ndarray:
    """Inverse of ``Lambda_+`` as a 2-form: ``W[j, k] = omega(B_j, B_k)``.

    Normalized by ``omega(alpha^#, beta^#) = Lambda(alpha, beta)``, which
    gives ``W = (lam^-1)^T = -lam^-1`` and ``W @ lam^T = I``.
    """
    lam = lam_matrix(ctx, "plus", a)
    if characteristic_rank(ctx, "plus", a, rtol) < ctx.n:
        raise DegeneratePoint("Lambda_+ is degenerate here")
    return np.linalg.inv(lam).T


def coframe_symplectic_forms(ctx: DoubleGroupContext, a) -> dict:
    """The coframe and Maurer-Cartan expressions for ``omega`` as matrices
    ``W[j, k] = omega(B_j, B_k)``."""
    fac = _factor_data(ctx, a)
    F = factor_coframes(ctx, a, fac)
    outer = lambda P, Q: sum(np.outer(p, q) for p, q in zip(P, Q))
    mc = maurer_cartan_pullbacks(ctx, a, fac)
    Gm = ctx.gram
    pair = lambda M1, M2: M1.T @ Gm @ M2
    return {
        "coframe_line1": outer(F["u X_i"], F["h Y_i"]) + outer(F["X_i v"], F["Y_i g"]),
        "coframe_line2": outer(F["X_i u"], F["g Y_i"]) - outer(F["Y_i h"], F["v X_i"]),
        "maurer_cartan_tensor": pair(mc["mu_phi_Gminus"], mc["mu_psi_Gplus"])
        + pair(mc["theta_psi_Gminus"], mc["mu_phi_Gplus"]),
        # same with the right Maurer-Cartan form of G_+ in the second term
        "maurer_cartan_tensor_theta": pair(mc["mu_phi_Gminus"], mc["mu_psi_Gplus"])
        + pair(mc["theta_psi_Gminus"], mc["theta_phi_Gplus"]),
        "maurer_cartan_wedge": 0.5 * (pair(mc["theta_phi_Gminus"], mc["mu_phi_Gplus"])
                                      - pair(mc["mu_phi_Gplus"], mc["theta_phi_Gminus"])
                                      + pair(mc["mu_psi_Gminus"], mc["theta_psi_Gplus"])
                                      - pair(mc["theta_psi_Gplus"], mc["mu_psi_Gminus"])),
    }


def undressing_tensor_forms(ctx: DoubleGroupContext, a) -> dict:
    """``Lambda_+`` rebuilt from undressing fields (both formula lines)."""
    F = undressing_formulas(ctx, a)
    outer = lambda P, Q: sum(np.outer(p, q) for p, q in zip(P, Q))
    return {"line1": outer(F["u X_i"], F["h Y_i"]) + outer(F["X_i v"], F["Y_i g"]),
            "line2": outer(F["X_i u"], F["g Y_i"]) - outer(F["Y_i h"], F["v X_i"])}


# ---------------------------------------------------------------------------
# ranks and characteristic spaces
# ---------------------------------------------------------------------------

def matrix_rank(M, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def characteristic_rank(ctx: DoubleGroupContext, variant: str, a, rtol: float = RANK_RTOL) -> int:
    return matrix_rank(lam_matrix(ctx, variant, a), rtol)


def characteristic_spaces(ctx: DoubleGroupContext, a) -> tuple:
    """Spanning columns of ``S_+(a)`` and ``S_-(a)`` (left-trivialized)."""
    Ai = ctx.Adi(a)
    Sp = np.hstack([ctx.Pp @ Ai @ ctx.X.T, ctx.Pm @ Ai @ ctx.Y.T])
    Sm = np.hstack([ctx.Pm @ Ai @ ctx.X.T, ctx.Pp @ Ai @ ctx.Y.T])
    return Sp, Sm


def characteristic_checks(ctx: DoubleGroupContext, points, rtol: float = RANK_RTOL) -> Report:
    """``S_+ + S_- = T_aG`` and ``S_(+/-)`` equals the image of the sharp map."""
    sum_ok = 0
    image_defect = 0.0
    for a in points:
        Sp, Sm = characteristic_spaces(ctx, a)
        if matrix_rank(np.hstack([Sp, Sm]), rtol) == ctx.n:
            sum_ok += 1
        for S, variant in ((Sp, "plus"), (Sm, "minus")):
            lam = lam_matrix(ctx, variant, a)
            r1, r2 = matrix_rank(S, rtol), matrix_rank(lam, rtol)
            r12 = matrix_rank(np.hstack([S, lam]), rtol)
            image_defect = max(image_defect, float(max(r12 - r1, r12 - r2)))
    res = float(len(points) - sum_ok) + image_defect
    return Report("characteristic_sum", res, res == 0,
                  {"points": len(points), "full_rank_points": sum_ok, "image_mismatch": image_defect})


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

@dataclass
class FlowTrajectory:
    t: np.ndarray
    states: np.ndarray
    blowup: bool = False
    escape_time: float | None = None
    escape_bracket: tuple | None = None
    message: str = ""

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, os.PathLike))
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            n = self.states.shape[1] if self.states.ndim == 2 else 1
            w.writerow(["t"] + [f"x{k + 1}" for k in range(n)] + ["blowup"])
            for t, s in zip(self.t, np.atleast_2d(self.states.reshape(len(self.t), -1))):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in s] + [int(self.blowup)])
        finally:
            if own:
                fh.close()

    def step_residuals(self, field: Callable, rtol: float = 1e-12) -> np.ndarray:
        """Re-integrate each recorded step independently and compare."""
        out = []
        for k in range(len(self.t) - 1):
            sol = solve_ivp(lambda t, x: field(x), (self.t[k], self.t[k + 1]), self.states[k],
                            rtol=rtol, atol=rtol)
            out.append(float(np.max(np.abs(sol.y[:, -1] - self.states[k + 1]))))
        return np.array(out)


def flow(field: Callable, x0, t0: float, t1: float, dt: float, bound: float = 1e8,
         rtol: float = 1e-12, atol: float = 1e-14) -> FlowTrajectory:
    """Integrate ``x' = field(x)`` from ``t0`` to ``t1`` and sample on a grid
    of spacing ``dt``; escapes beyond ``|x| = bound`` are reported as data.

    Uses an embedded Runge-Kutta 4(5) pair with step rejection.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dt = abs(dt) if t1 >= t0 else -abs(dt)
    nsteps = int(round((t1 - t0) / dt))
    grid = t0 + dt * np.arange(nsteps + 1)
    grid[-1] = t1

    def escape(t, x):
        return bound - np.max(np.abs(x))
    escape.terminal = True

    sol = solve_ivp(lambda t, x: np.asarray(field(x), dtype=float), (t0, t1), x0, method="RK45",
                    rtol=rtol, atol=atol, dense_output=True, events=escape)
    t_end = sol.t[-1]
    blowup = sol.status == 1 or (sol.status == -1)
    keep = grid[(grid - t_end) * np.sign(dt) <= 0] if blowup else grid
    states = sol.sol(keep).T if len(keep) else np.empty((0, x0.size))
    traj = FlowTrajectory(keep, states, blowup=bool(blowup), message=sol.message)
    if blowup:
        traj.escape_time = float(t_end)
        last_ok = sol.t[-2] if len(sol.t) > 1 else t0
        traj.escape_bracket = tuple(sorted((float(last_ok), float(t_end))))
    return traj


# ---------------------------------------------------------------------------
# multiplicativity, Poisson maps, cobrackets
# ---------------------------------------------------------------------------

def multiplicativity_defect(ctx: DoubleGroupContext, variant: str, g, h) -> float:
    """``|lam(gh) - lam(h) - Ad(h^-1) lam(g) Ad(h^-1)^T|``."""
    Ahi = ctx.Adi(h)
    d = lam_matrix(ctx, variant, g @ h) - lam_matrix(ctx, variant, h) - Ahi @ lam_matrix(ctx, variant, g) @ Ahi.T
    return float(np.max(np.abs(d)))


def check_multiplicative(ctx: DoubleGroupContext, variant: str, pairs, tol: float = 1e-8) -> Report:
    worst = max(multiplicativity_defect(ctx, variant, g, h) for g, h in pairs)
    return Report(f"multiplicative[{variant}]", worst, worst <= tol, {"pairs": len(pairs)})


def check_affine_split(ctx: DoubleGroupContext, points, tol: float = 1e-10) -> Report:
    """Compare the affine parts of ``Lambda_+`` with ``+/- Lambda_-``."""
    out = {"left=+minus": 0.0, "left=-minus": 0.0, "right=+minus": 0.0, "right=-minus": 0.0}
    for a in points:
        lm = lam_matrix(ctx, "minus", a)
        ll = lam_matrix(ctx, "left_affine_part", a)
        lr = lam_matrix(ctx, "right_affine_part", a)
        out["left=+minus"] = max(out["left=+minus"], float(np.max(np.abs(ll - lm))))
        out["left=-minus"] = max(out["left=-minus"], float(np.max(np.abs(ll + lm))))
        out["right=+minus"] = max(out["right=+minus"], float(np.max(np.abs(lr - lm))))
        out["right=-minus"] = max(out["right=-minus"], float(np.max(np.abs(lr + lm))))
    res = max(out["left=+minus"], out["right=-minus"])
    return Report("affine_parts[left=+minus,right=-minus]", res, res <= tol, out)


def pushforward_matrix(source: MatrixGroup, target: MatrixGroup, F: Callable, a, h: float = 1e-5) -> np.ndarray:
    """Left-trivialized Jacobian of ``F: source -> target`` at ``a``."""
    Fa = F(a)
    Fi = np.linalg.inv(Fa)
    I = np.eye(source.dim)
    cols = []
    for k in range(source.dim):
        d = left_derivative(source, F, a, I[k], h)
        cols.append(target.coords(Fi @ d, tol=1e-4))
    return np.column_stack(cols)


def poisson_map_defect(source: MatrixGroup, target: MatrixGroup, F: Callable, lam_source: Callable,
                       lam_target: Callable, a, h: float = 1e-5) -> float:
    J = pushforward_matrix(source, target, F, a, h)
    return float(np.max(np.abs(J @ lam_source(a) @ J.T - lam_target(F(a)))))


def check_poisson_map(source: MatrixGroup, target: MatrixGroup, F: Callable, lam_source: Callable,
                      lam_target: Callable, points, tol: float = 1e-6, name: str = "poisson_map") -> Report:
    worst = 0.0
    skipped = 0
    for a in points:
        try:
            worst = max(worst, poisson_map_defect(source, target, F, lam_source, lam_target, a))
        except NotFactorizable:
            skipped += 1
    return Report(name, worst, worst <= tol and skipped == 0, {"points": len(points), "skipped": skipped})


def subgroup_structure(ctx: DoubleGroupContext, side: str, sign: float = 1.0) -> Callable:
    return lambda p: sign * _restricted(ctx, side, p)


# (projection, source variant, target side, reference target sign)
PROJECTION_CLAIMS = (
    ("plus_left", "minus", "plus", -1), ("plus_right", "minus", "plus", -1),
    ("minus_left", "minus", "minus", 1), ("minus_right", "minus", "minus", 1),
    ("plus_left", "plus", "plus", 1), ("plus_right", "plus", "plus", -1),
    ("minus_left", "plus", "minus", 1), ("minus_right", "plus", "minus", -1),
)


def projection_suite(ctx: DoubleGroupContext, points, tol: float = 1e-6) -> list:
    """One report per projection claim, with the residual for the opposite
    target sign in the details."""
    reports = []
    for proj, src, side, sign in PROJECTION_CLAIMS:
        target = ctx.D.Gplus if side == "plus" else ctx.D.Gminus
        F = ctx.D.projection(proj)
        lam_s = lambda a, v=src: lam_matrix(ctx, v, a)
        rep = check_poisson_map(ctx.G, target, F, lam_s, subgroup_structure(ctx, side, sign), points, tol,
                                f"p[{proj}]: Lambda_{src} -> {'+' if sign > 0 else '-'}Lambda^{side}")
        flip = check_poisson_map(ctx.G, target, F, lam_s, subgroup_structure(ctx, side, -sign), points, tol)
        rep.details["opposite_sign_residual"] = flip.residual
        reports.append(rep)
    return reports


def restricted_dressing_check(ctx: DoubleGroupContext, pairs, tol: float = 1e-6, target_sign: float = 1.0,
                              source_sign: float = 1.0) -> Report:
    """``(g, u) -> p^+_r(g u^-1)`` from ``G_+ x G_-`` with
    ``source_sign * (Lambda^{G_+} x Lambda^{G_-})`` into
    ``(G_+, target_sign * Lambda^{G_+})``."""
    P = product_group(ctx.D.Gplus, ctx.D.Gminus)
    m = ctx.m

    def F(x):
        g, u = split_product(P, x)
        return ctx.D.p_plus_right(g @ np.linalg.inv(u))

    def lam_s(x):
        g, u = split_product(P, x)
        M = np.zeros((2 * m, 2 * m))
        M[:m, :m] = _restricted(ctx, "plus", g)
        M[m:, m:] = _restricted(ctx, "minus", u)
        return source_sign * M

    points = [join_product(g, u) for g, u in pairs]
    return check_poisson_map(P, ctx.D.Gplus, F, lam_s, subgroup_structure(ctx, "plus", target_sign), points, tol,
                             f"restricted_dressing: G+xG- -> ({'+' if target_sign > 0 else '-'}Lambda^plus)")


def cobracket_at_identity(ctx: DoubleGroupContext, variant: str, h: float = 1e-5) -> CochainMap:
    """``b'(X) = d/dt lam(exp tX)`` at ``t = 0`` by central differences.

    For ``Gplus`` / ``Gminus`` the map lives on the subgroup algebra."""
    if variant in ("Gplus", "Gminus"):
        side = "plus" if variant == "Gplus" else "minus"
        sub = ctx.D.Gplus if side == "plus" else ctx.D.Gminus
        f = lambda p: _restricted(ctx, side, p)
    else:
        sub = ctx.G
        f = lambda p: lam_matrix(ctx, variant, p)
    e = sub.identity()
    I = np.eye(sub.dim)
    images = [Multivector.from_tensor(0.5 * (D - D.T)) for D in
              (left_derivative(sub, f, e, I[k], h) for k in range(sub.dim))]
    return CochainMap(images, 2)


def product_cobracket_at_identity(ctx: DoubleGroupContext, variant: str = "phi_plus", part: str = "right",
                                  h: float = 1e-5) -> CochainMap:
    """Cobracket of the right (or left) affine part of a product structure
    on ``G_+ x G_-`` computed by differentiating the left-trivialized
    coefficients at ``(e, e)``."""
    P = product_space(ctx, variant)
    e = P.identity()
    n1 = P.factors[0].n

    def lam(x):
        p, q = x[:n1, :n1], x[n1:, n1:]
        M = eval_product_structure(ctx, variant, p, q)
        M0 = eval_product_structure(ctx, variant, p * 0 + np.eye(n1), q * 0 + np.eye(q.shape[0]))
        if part == "left":
            return M - M0
        A = P.Ad(np.linalg.inv(x))
        return M - A @ M0 @ A.T

    I = np.eye(P.dim)
    images = [Multivector.from_tensor(0.5 * (D - D.T)) for D in
              (left_derivative(P, lam, e, I[k], h) for k in range(P.dim))]
    return CochainMap(images, 2)


# ---------------------------------------------------------------------------
# rigidity of the product decomposition
# ---------------------------------------------------------------------------

def rigidity_defects(ctx: DoubleGroupContext, g, u, h: float = 1e-5) -> dict:
    """Lie derivatives of the pieces of the phi decomposition.

    ``L_{X_m^l} Lambda^{G_+}`` (left-trivialized) is compared with the
    structure constants ``d_m`` of ``g_-`` and ``L_{Y_m^r} Lambda^{G_-}``
    (right-trivialized) with those ``c_m`` of ``g_+``.
    """
    D = ctx.D
    m = ctx.m
    Gp, Gm = D.Gplus, D.Gminus
    c, d = Gp.lie.c, Gm.lie.c
    I = np.eye(m)
    lamH = lambda p: _restricted(ctx, "plus", p)

    def rhoK(p):
        A = Gm.Ad(p)
        return A @ _restricted(ctx, "minus", p) @ A.T

    out = {"plus_side": 0.0, "minus_side": 0.0}
    LH = lamH(g)
    RK = rhoK(u)
    for k in range(m):
        adX = Gp.lie.ad(I[k])
        lie = adX @ LH + LH @ adX.T + left_derivative(Gp, lamH, g, I[k], h)
        out["plus_side"] = max(out["plus_side"], float(np.max(np.abs(lie - 2 * ctx.s * d[:, :, k]))))
        adY = Gm.lie.ad(I[k])
        # right derivative d/dt rho(exp(tY) u)
        Y = Gm.mat(I[k])
        dr = (rhoK(expm(h * Y) @ u) - rhoK(expm(-h * Y) @ u)) / (2 * h)
        lie_r = -(adY @ RK + RK @ adY.T) + dr
        out["minus_side"] = max(out["minus_side"], float(np.max(np.abs(lie_r - 2 * ctx.s * c[:, :, k]))))
    return out
