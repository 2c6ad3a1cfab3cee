"""Acceptance suite: one test per criterion, each printing a single
``PASS``/``FAIL`` line.  Tolerances and sample counts are the stated ones."""
import time

import numpy as np

from liedouble.algebra_core import random_skew_operator
from liedouble.bialgebra import bialgebra_condition_suite, rmatrix_condition_suite
from liedouble.catalog import (axb_chart_formula, axb_listed_comparison, axb_restricted_field,
                               bracket_table, chart_bivector, iwasawa_phi, iwasawa_psi,
                               linearization_check)
from liedouble.constructions import cayley, diagonal_graph_witness, r_from_manin
from liedouble.groups import jacobi_defect, newton_factorize
from liedouble.poisson import (DeterminantFunction, casimir_check,
                               characteristic_checks, check_affine_split, check_multiplicative,
                               dressing_consistency, flow, lam_matrix, matrix_rank, projection_suite,
                               restricted_dressing_check, sign_dictionary, subgroup_structure)


def verdict(number: int, title: str, ok: bool, detail: str = "") -> None:
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {number} failed: {detail}"


def _gl2p_points(rng, count, scale=1.5):
    out = []
    while len(out) < count:
        a = rng.uniform(-scale, scale, (2, 2))
        if np.linalg.det(a) > 0.05:
            out.append(a)
    return out


def test_c01_sl2c_bracket_table(sl2c):
    t = time.perf_counter()
    rep = bracket_table(sl2c, samples=100, tol=1e-9, seed=0)
    dt = time.perf_counter() - t
    rows = len(rep.details["rows"])
    verdict(1, "bracket table at 100 points", rep.passed and dt < 5.0,
            f"{rows} rows, residual {rep.residual:.2e}, {dt:.2f} s, failing {rep.details['failing']}")


def test_c02_casimirs(sl2c):
    rng = np.random.default_rng(0)
    pts = sl2c.points(rng, 100)
    # the same samples on SL(2,C) and rescaled into GL(2,C)
    scaled = [complex(*rng.uniform(0.5, 1.5, 2)) * a for a in pts]
    res = {}
    for f in (DeterminantFunction(False), DeterminantFunction(True)):
        r = casimir_check(sl2c.context, "plus", f, pts + scaled, tol=1e-9)
        res[f.label] = r
    ok = all(r.passed for r in res.values())
    verdict(2, "det and conj(det) are Casimirs", ok,
            ", ".join(f"{k} {r.residual:.1e}" for k, r in res.items()))


def test_c03_iwasawa_vs_newton(sl2c):
    G = sl2c.group
    D = sl2c.double
    rng = np.random.default_rng(0)
    agree = recon = 0.0
    for _ in range(200):
        x = rng.uniform(-1, 1, G.dim)
        a = G.exp(x)
        g, u = iwasawa_phi(a)
        v, h = iwasawa_psi(a)
        gn, un = newton_factorize(D, a, log_hint=x)
        # psi(a) from phi(a^-1): a = v h  <=>  a^-1 = h^-1 v^-1
        hn, vn = newton_factorize(D, np.linalg.inv(a), log_hint=-x)
        vn, hn = np.linalg.inv(vn), np.linalg.inv(hn)
        agree = max(agree, *(float(np.max(np.abs(p - q))) for p, q in ((g, gn), (u, un), (v, vn), (h, hn))))
        recon = max(recon, float(np.max(np.abs(g @ u - a))), float(np.max(np.abs(v @ h - a))))
    verdict(3, "closed Iwasawa factorizations vs Newton at 200 points", agree <= 1e-10 and recon <= 1e-10,
            f"agreement {agree:.2e}, reconstruction {recon:.2e}")


def test_c04_axb_chart_formula_and_rank(axb):
    ctx = axb.context
    rng = np.random.default_rng(0)
    pts = _gl2p_points(rng, 100)
    chart = max(float(np.max(np.abs(chart_bivector(ctx, "plus", a) - axb_chart_formula(a)))) for a in pts)
    off = [matrix_rank(chart_bivector(ctx, "plus", a)) for a in pts if abs(a[0, 0] * a[1, 1]) > 1e-3]
    locus = []
    for k in range(50):
        x, y, p, b = rng.uniform(-1.5, 1.5, 4)
        a = np.array([[0.0, y], [p, b]]) if k % 2 else np.array([[x, y], [p, 0.0]])
        if np.linalg.det(a) > 0.05:
            locus.append(matrix_rank(chart_bivector(ctx, "plus", a)))
    ok = chart <= 1e-10 and all(r == 4 for r in off) and locus and all(r < 4 for r in locus)
    verdict(4, "chart formula and degeneracy locus xb = 0", bool(ok),
            f"chart residual {chart:.2e}, ranks off locus {sorted(set(off))}, on locus {sorted(set(locus))}")


def test_c05_incomplete_flow():
    fwd = flow(axb_restricted_field, [1.0], 0.0, 2.0, 0.01)
    err = float(np.max(np.abs(fwd.states[:, 0] - 1 / (fwd.t + 1))))
    back = flow(axb_restricted_field, [1.0], 0.0, -2.0, 0.01)
    ok = (not fwd.blowup and err <= 1e-8 and back.blowup and back.escape_time is not None
          and abs(back.escape_time + 1) <= 1e-3)
    verdict(5, "flow of -x^2 d/dx", ok, f"forward error {err:.2e}, backward escape {back.escape_time}")


def test_c06_axb_double_listed_brackets():
    rep = axb_listed_comparison(1)
    verdict(6, "ax+b double reproduces the listed mixed brackets exactly", rep.passed,
            f"mismatches {rep.details['mismatches']}, listed Jacobi violation "
            f"{rep.details['listed_jacobi_violation']}")


def _catalog_rmatrices(entries, tstar_h3):
    out = [(e.name, e.algebra, r_from_manin(e.decomposition).op) for e in entries]
    M, A = tstar_h3
    out.append(("T*h3 cayley", M, cayley(A)))
    return out


def test_c07_condition_suites_agree(sl2c, axb, cotangent, tstar_h3):
    entries = (sl2c, axb, cotangent)
    rng = np.random.default_rng(0)
    cases = []
    for e in entries:
        for _ in range(20):
            cases.append((e.name, e.algebra, random_skew_operator(e.algebra, rng)))
    cases += _catalog_rmatrices(entries, tstar_h3)
    dis5 = dis4 = 0
    passing = 0
    for name, M, R in cases:
        b = bialgebra_condition_suite(M, R, tol=0)
        r = rmatrix_condition_suite(M, R, tol=0)
        dis5 += not b.details["agree"]
        dis4 += not r.details["agree"]
        passing += r.passed
    verdict(7, "five bialgebra and four R-matrix conditions agree", dis5 == 0 and dis4 == 0,
            f"{len(cases)} operators, disagreements {dis5}/{dis4}, R-matrices among them {passing}")


def test_c08_diagonal_graph_witness(sl2c, axb, tstar_h3):
    reps = {e.name: diagonal_graph_witness(e.algebra, r_from_manin(e.decomposition).op) for e in (sl2c, axb)}
    M, A = tstar_h3
    R = cayley(A)
    ev = np.linalg.eigvals(np.array(R, dtype=float))
    reps["T*h3 cayley"] = diagonal_graph_witness(M, R)
    no_pm1 = bool(np.min(np.abs(np.abs(ev.real) - 1) + np.abs(ev.imag)) > 1e-9)
    isotropy = {k: r.details["isotropy"] for k, r in reps.items()}
    ok = all(r.passed for r in reps.values()) and all(v == 0 for v in isotropy.values()) and no_pm1
    verdict(8, "diagonal/graph witness", ok,
            ", ".join(f"{k} isotropy {v}" for k, v in isotropy.items()) + f", no +-1 weights {no_pm1}")


def test_c09_multiplicative_and_affine_parts(sl2c, axb, cotangent):
    mult = {}
    affine = {}
    for e in (sl2c, axb, cotangent):
        rng = np.random.default_rng(0)
        pairs = [tuple(e.points(rng, 2)) for _ in range(50)]
        mult[e.name] = check_multiplicative(e.context, "minus", pairs, tol=1e-8)
        affine[e.name] = check_affine_split(e.context, e.points(rng, 20), tol=1e-10)
    ok = all(r.passed for r in mult.values()) and all(r.passed for r in affine.values())
    verdict(9, "Lambda_- multiplicative, (Lambda_+)_l = Lambda_-, (Lambda_+)_r = -Lambda_-", ok,
            "; ".join(f"{k}: mult {mult[k].residual:.1e}, affine {affine[k].details}" for k in mult))


def test_c10_group_jacobi(sl2c, axb):
    worst = {}
    for e in (sl2c, axb):
        ctx = e.context
        rng = np.random.default_rng(0)
        for variant in ("plus", "minus"):
            f = lambda a, v=variant: lam_matrix(ctx, v, a)
            w = max(jacobi_defect(ctx.G, f, a) for a in e.points(rng, 20))
            worst[f"{e.name}/{variant}"] = w
        for side, sub in (("plus", e.double.Gplus), ("minus", e.double.Gminus)):
            f = subgroup_structure(ctx, side)
            k = 0 if side == "plus" else 1
            pts = [e.double.factorize_phi(a)[k] for a in e.points(rng, 20, "phi")]
            worst[f"{e.name}/G{side}"] = max(jacobi_defect(sub, f, p) for p in pts)
    ok = all(v <= 1e-5 for v in worst.values())
    verdict(10, "group Schouten [lam, lam] = 0", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_c11_sb2c_linearization(sl2c):
    rep = linearization_check(sl2c, samples=100, seed=0, tol=1e-6)
    verdict(11, "SB(2,C) linearization onto the linear su(2)* structure", rep.passed,
            f"residual {rep.residual:.2e}, least-squares scale {rep.details['scale_fit']:.4f}")


def test_c12_dressing_fields(sl2c):
    ctx = sl2c.context
    rng = np.random.default_rng(0)
    pts = sl2c.points(rng, 50)
    cons = dressing_consistency(ctx, pts, tol=1e-9)
    signs = sign_dictionary(ctx, pts, tol=1e-9)
    ranks = characteristic_checks(ctx, pts)
    ok = cons.passed and signs.passed and ranks.passed
    verdict(12, "dressing formulas, sign dictionary, S+ + S- = TG", ok,
            f"formula failures {cons.details['failing']}, sign failures {signs.details['failing']}, "
            f"full-rank points {ranks.details['full_rank_points']}/{len(pts)}")


def test_c13_poisson_maps(sl2c):
    ctx = sl2c.context
    rng = np.random.default_rng(0)
    pts = sl2c.points(rng, 30)
    reps = projection_suite(ctx, pts, tol=1e-6)
    pairs = [iwasawa_phi(a) for a in sl2c.points(rng, 30)]
    # reference target: the opposite of the subgroup structure
    reps.append(restricted_dressing_check(ctx, pairs, tol=1e-6, target_sign=-1.0))
    failing = [r.check for r in reps if not r.passed]
    verdict(13, "projections and restricted dressing are Poisson maps", not failing,
            f"{len(reps) - len(failing)}/{len(reps)} pass; failing {failing}")
