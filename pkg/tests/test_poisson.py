import io

import numpy as np
import pytest

from liedouble.catalog import (axb_chart_formula, axb_dressing_x1, chart_bivector, characteristic_rank_on_chart,
                               subgroup_bracket_table)
from liedouble.poisson import (CoordinateFunction, DegeneratePoint, DeterminantFunction, SampledFunction,
                               casimir_check, characteristic_rank, check_local_actions, check_multiplicative,
                               check_poisson_map, cobracket_at_identity, coframe_symplectic_forms,
                               dressing_consistency, dressing_field, eval_lambda, eval_product_structure,
                               eval_subgroup_lie_poisson, flow, infinitesimal_action, lam_matrix,
                               alternative_forms_defect, local_action, local_action_generator,
                               multiplicativity_defect, poisson_bracket, product_intertwining_defect,
                               subgroup_forms_defect, subgroup_structure, symplectic_form,
                               undressing_consistency, undressing_formulas, undressing_sharp)


@pytest.fixture(scope="module")
def ctx(sl2c):
    return sl2c.context


@pytest.fixture(scope="module")
def pts(sl2c):
    return sl2c.points(np.random.default_rng(0), 20)


def z(k, part="z"):
    return CoordinateFunction((k - 1) // 2, (k - 1) % 2, part)


# ---------------------------------------------------------------------------
# the structures on G
# ---------------------------------------------------------------------------

def test_values_at_identity(ctx):
    e = ctx.G.identity()
    assert np.allclose(lam_matrix(ctx, "minus", e), 0)
    assert np.allclose(lam_matrix(ctx, "plus", e), ctx.C)
    assert np.allclose(ctx.C, ctx.D.C_tensor())


def test_alternative_forms_agree(sl2c, axb, cotangent):
    for e in (sl2c, axb, cotangent):
        rng = np.random.default_rng(1)
        for a in e.points(rng, 10):
            for v in ("plus", "minus"):
                assert alternative_forms_defect(e.context, v, a) <= 1e-10


def test_context_identities(sl2c, axb, cotangent):
    for e in (sl2c, axb, cotangent):
        assert e.context.check(e.points(np.random.default_rng(2), 5)).passed


def test_axb_chart_formula(axb):
    rng = np.random.default_rng(3)
    for a in axb.points(rng, 10):
        assert np.allclose(chart_bivector(axb.context, "plus", a), axb_chart_formula(a), atol=1e-10)


def test_eval_lambda_rejects_subgroup_variants(ctx):
    with pytest.raises(ValueError):
        eval_lambda(ctx, "Gplus", ctx.G.identity())


def test_unit_scale_doubles(sl2c):
    from liedouble.poisson import DoubleGroupContext
    unit = DoubleGroupContext(sl2c.double, scale="unit")
    a = sl2c.points(np.random.default_rng(4), 1)[0]
    assert np.allclose(lam_matrix(unit, "plus", a), 2 * lam_matrix(sl2c.context, "plus", a))
    with pytest.raises(ValueError):
        DoubleGroupContext(sl2c.double, scale="double")


# ---------------------------------------------------------------------------
# subgroup and product structures
# ---------------------------------------------------------------------------

def test_subgroup_structures_vanish_at_identity(ctx):
    for side in ("plus", "minus"):
        assert np.allclose(eval_subgroup_lie_poisson(ctx, side, ctx.G.identity()).coeff, 0)


def test_subgroup_forms_agree(sl2c):
    rng = np.random.default_rng(5)
    for a in sl2c.points(rng, 10):
        g, u = sl2c.double.factorize_phi(a)
        for side, p in (("plus", g), ("minus", u)):
            assert max(subgroup_forms_defect(sl2c.context, side, p).values()) <= 1e-10


def test_subgroup_point_required(ctx, pts):
    with pytest.raises(ValueError):
        eval_subgroup_lie_poisson(ctx, "plus", pts[0])


@pytest.mark.parametrize("side", ["plus", "minus"])
def test_listed_subgroup_brackets(sl2c, side):
    # {alpha, conj alpha} = -i|nu|^2, {nu, conj nu} = 0 and {conj gamma, gamma} = i(t^2 - 1/t^2)
    assert subgroup_bracket_table(sl2c, side).passed


def test_product_structures_at_identity(ctx):
    e = ctx.D.Gplus.identity()
    m = ctx.m
    M = eval_product_structure(ctx, "phi_plus", e, e)
    C = np.zeros((2 * m, 2 * m))
    C[m:, :m], C[:m, m:] = np.eye(m), -np.eye(m)
    assert np.allclose(M, C)
    assert np.allclose(eval_product_structure(ctx, "phi_minus", e, e), 0)


def test_phi_minus_is_difference(sl2c):
    ctx = sl2c.context
    g, u = sl2c.double.factorize_phi(sl2c.points(np.random.default_rng(6), 1)[0])
    M = eval_product_structure(ctx, "phi_minus", g, u)
    m = ctx.m
    assert np.allclose(M[:m, :m], -eval_subgroup_lie_poisson(ctx, "plus", g).coeff)
    assert np.allclose(M[m:, m:], eval_subgroup_lie_poisson(ctx, "minus", u).coeff)


@pytest.mark.parametrize("variant", ["phi_plus", "phi_minus", "psi_plus", "psi_minus"])
def test_product_pushforward(sl2c, variant):
    rng = np.random.default_rng(7)
    D = sl2c.double
    worst = 0.0
    for a in sl2c.points(rng, 50):
        p, q = D.factorize_phi(a) if variant.startswith("phi") else D.factorize_psi(a)
        worst = max(worst, product_intertwining_defect(sl2c.context, variant, p, q))
    assert worst <= 1e-9


# ---------------------------------------------------------------------------
# brackets of functions and Casimirs
# ---------------------------------------------------------------------------

def test_z1_z4_commute(ctx, sl2c):
    pts = sl2c.points(np.random.default_rng(8), 100)
    assert max(abs(poisson_bracket(ctx, "plus", z(1), z(4), a)) for a in pts) <= 1e-9


def test_z2_z3(ctx, pts):
    for a in pts:
        w = a.ravel()
        assert abs(poisson_bracket(ctx, "plus", z(2), z(3), a) - 1j * w[0] * w[3]) <= 1e-9


def test_z1_z2_at_point(ctx):
    a = np.array([[1, 1], [0, 1]], dtype=complex)
    assert abs(poisson_bracket(ctx, "plus", z(1), z(2), a) - (-0.5j)) <= 1e-12


def test_z1_not_casimir(ctx, pts):
    rep = casimir_check(ctx, "plus", z(1), pts)
    assert not rep.passed and rep.residual > 1e-3


def test_det_casimir_also_for_minus(ctx, pts):
    assert casimir_check(ctx, "minus", DeterminantFunction(), pts).passed


def test_sampled_function_matches_analytic(ctx, pts):
    f = SampledFunction(lambda a: a[0, 1], "z2")
    for a in pts[:3]:
        assert abs(poisson_bracket(ctx, "plus", f, z(3), a) - poisson_bracket(ctx, "plus", z(2), z(3), a)) < 1e-8


def test_coordinate_selector_validation(ctx):
    with pytest.raises(ValueError):
        CoordinateFunction(0, 0, "abs")
    with pytest.raises(ValueError):
        CoordinateFunction(2, 0).differential(ctx, ctx.G.identity())


# ---------------------------------------------------------------------------
# dressing fields and actions
# ---------------------------------------------------------------------------

def test_dressing_at_identity(ctx):
    e = ctx.G.identity()
    for i in range(ctx.m):
        assert np.allclose(dressing_field(ctx, "plus", "X", i, "left", e), -ctx.X[i])


def test_rho_plus_formula(ctx, pts):
    rep = dressing_consistency(ctx, pts)
    assert rep.details["per_field"]["rho_plus(X)"] <= 1e-10
    assert rep.details["per_field"]["lambda_plus(X)"] <= 1e-10


def test_lambda_plus_is_left_action(ctx, pts):
    for a in pts[:5]:
        for i in range(ctx.m):
            lhs = dressing_field(ctx, "plus", "X", i, "left", a)
            assert np.allclose(lhs, infinitesimal_action(ctx, "lambda+", ctx.X[i], a), atol=1e-10)


def test_axb_restricted_dressing(axb):
    # the ambient trace pairing gives -x^2 d/dx on G_+; the invariant pairing gives -x d/dx
    for x in (0.3, 1.0, 1.7):
        g = np.array([[x, 0.4], [0.0, 1.0]])
        amb = axb_dressing_x1(axb.context, g)
        assert np.allclose(amb, [[-x ** 2, 0], [0, 0]], atol=1e-12)
        inv = g @ axb.group.mat(dressing_field(axb.context, "plus", "X", 0, "left", g))
        assert np.allclose(inv, [[-x, 0], [0, 0]], atol=1e-12)


def test_undressing_u_x(sl2c):
    ctx = sl2c.context
    pts = sl2c.points(np.random.default_rng(9), 5)
    for a in pts:
        F = undressing_formulas(ctx, a)
        S = undressing_sharp(ctx, a)
        # (u X_i)^ = a X_i
        assert np.allclose(F["u X_i"], ctx.X)
        assert np.allclose(S["u X_i"], ctx.X, atol=1e-10)
    assert undressing_consistency(ctx, pts).passed


def test_local_action_identity(ctx, pts):
    e = ctx.G.identity()
    for kind in ("lambda+", "lambda-", "rho+", "rho-"):
        assert np.allclose(local_action(ctx, kind, e, pts[0]), pts[0])


def _triples(sl2c, n, seed):
    rng = np.random.default_rng(seed)
    G = sl2c.group
    return [(a, G.exp(0.2 * rng.uniform(-1, 1, 6)), G.exp(0.2 * rng.uniform(-1, 1, 6)))
            for a in sl2c.points(rng, n)]


def test_local_actions_conjugate_inverse(sl2c):
    rep = check_local_actions(sl2c.context, _triples(sl2c, 5, 10), rho_convention="conjugate_inverse")
    assert rep.passed
    assert rep.details["lambda_commute"] <= 1e-9 and rep.details["composition_formula"] <= 1e-9


def test_right_actions_as_written_break_the_action_law(sl2c):
    rep = check_local_actions(sl2c.context, _triples(sl2c, 5, 10))
    assert rep.details["action_law[lambda+]"] <= 1e-9
    assert rep.details["action_law[rho+]"] > 1e-3


@pytest.mark.parametrize("kind", ["lambda+", "lambda-"])
def test_local_action_generators(sl2c, kind):
    ctx = sl2c.context
    rng = np.random.default_rng(11)
    a = sl2c.points(rng, 1)[0]
    B = rng.uniform(-1, 1, 6)
    assert np.allclose(local_action_generator(ctx, kind, B, a), infinitesimal_action(ctx, kind, B, a), atol=1e-7)


def test_rho_generator_needs_conjugate_inverse(sl2c):
    ctx = sl2c.context
    rng = np.random.default_rng(12)
    a = sl2c.points(rng, 1)[0]
    B = rng.uniform(-1, 1, 6)
    gen = local_action_generator(ctx, "rho+", B, a, rho_convention="conjugate_inverse")
    assert np.allclose(gen, infinitesimal_action(ctx, "rho+", B, a), atol=1e-7)


def test_subgroup_invariant_under_lambda_plus(sl2c):
    ctx = sl2c.context
    rng = np.random.default_rng(13)
    g = sl2c.double.factorize_phi(sl2c.points(rng, 1)[0])[0]
    from liedouble.poisson import in_subgroup
    for _ in range(5):
        b = sl2c.group.exp(0.3 * rng.uniform(-1, 1, 6))
        assert in_subgroup(ctx, "plus", local_action(ctx, "lambda+", b, g), 1e-8)


# ---------------------------------------------------------------------------
# ranks and the symplectic form
# ---------------------------------------------------------------------------

def test_sl2c_symplectic(ctx, pts):
    for a in pts:
        assert characteristic_rank(ctx, "plus", a) == 6
        W = symplectic_form(ctx, a)
        assert np.allclose(W @ lam_matrix(ctx, "plus", a).T, np.eye(6), atol=1e-9)


def test_axb_chart_ranks(axb):
    assert characteristic_rank_on_chart(axb, np.array([[0.0, 1.0], [-1.0, 1.0]])) == 2
    assert characteristic_rank_on_chart(axb, np.array([[2.0, 1.0], [1.0, 1.0]])) == 4


def test_degenerate_point(axb):
    a = np.array([[0.0, 1.0], [-1.0, 1.0]])
    with pytest.raises(DegeneratePoint):
        symplectic_form(axb.context, a)


def test_coframe_expressions(sl2c):
    ctx = sl2c.context
    a = sl2c.points(np.random.default_rng(14), 1)[0]
    W = symplectic_form(ctx, a)
    forms = coframe_symplectic_forms(ctx, a)
    skew = lambda M: 0.5 * (M - M.T)
    assert np.allclose(forms["coframe_line2"], W, atol=1e-9)
    assert np.allclose(forms["maurer_cartan_wedge"], W, atol=1e-9)
    # these two agree only after dropping a symmetric part
    assert np.allclose(skew(forms["coframe_line1"]), W, atol=1e-9)
    assert np.allclose(skew(forms["maurer_cartan_tensor_theta"]), W, atol=1e-9)
    # with the left Maurer-Cartan form of G_+ the tensor is off
    assert not np.allclose(skew(forms["maurer_cartan_tensor"]), W, atol=1e-3)


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

def test_zero_field_constant():
    tr = flow(lambda x: np.zeros_like(x), [0.5, -2.0], 0.0, 1.0, 0.1)
    assert not tr.blowup and np.allclose(tr.states, [[0.5, -2.0]] * len(tr.t))


def test_incomplete_flow():
    f = lambda x: -x ** 2
    fwd = flow(f, [1.0], 0.0, 2.0, 0.01)
    assert np.max(np.abs(fwd.states[:, 0] - 1 / (fwd.t + 1))) <= 1e-8
    back = flow(f, [1.0], 0.0, -2.0, 0.01)
    assert back.blowup and abs(back.escape_time + 1) <= 1e-3
    lo, hi = back.escape_bracket
    assert lo <= back.escape_time <= hi
    assert np.max(fwd.step_residuals(f)) < 1e-9


def test_flow_csv():
    tr = flow(lambda x: -x, [1.0], 0.0, 0.3, 0.1)
    buf = io.StringIO()
    tr.to_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "t,x1,blowup" and len(lines) == 1 + len(tr.t)


# ---------------------------------------------------------------------------
# multiplicativity, Poisson maps, cobrackets
# ---------------------------------------------------------------------------

def test_minus_multiplicative(sl2c):
    rng = np.random.default_rng(15)
    pairs = [tuple(sl2c.points(rng, 2)) for _ in range(20)]
    assert check_multiplicative(sl2c.context, "minus", pairs).passed
    assert max(multiplicativity_defect(sl2c.context, "plus", g, h) for g, h in pairs) > 1e-3


def test_plus_left_projection_is_poisson(sl2c):
    ctx = sl2c.context
    pts = sl2c.points(np.random.default_rng(16), 10)
    rep = check_poisson_map(ctx.G, ctx.D.Gplus, ctx.D.p_plus_left, lambda a: lam_matrix(ctx, "minus", a),
                            subgroup_structure(ctx, "plus", -1.0), pts)
    assert rep.passed


@pytest.mark.parametrize("source,proj,sign", [("minus", "p_minus_left", 1.0), ("minus", "p_minus_right", 1.0),
                                              ("plus", "p_minus_left", -1.0), ("plus", "p_minus_right", 1.0)])
def test_minus_projections_are_poisson(sl2c, source, proj, sign):
    ctx = sl2c.context
    pts = sl2c.points(np.random.default_rng(16), 10)
    lam = lambda a: lam_matrix(ctx, source, a)
    good = check_poisson_map(ctx.G, ctx.D.Gminus, getattr(ctx.D, proj), lam, subgroup_structure(ctx, "minus", sign), pts)
    bad = check_poisson_map(ctx.G, ctx.D.Gminus, getattr(ctx.D, proj), lam, subgroup_structure(ctx, "minus", -sign), pts)
    assert good.passed and not bad.passed


def test_poisson_map_reports_unfactorizable(axb):
    ctx = axb.context
    bad = [np.array([[1.0, 1.0], [-1.0, 0.0]])]
    rep = check_poisson_map(ctx.G, ctx.D.Gplus, ctx.D.p_plus_left, lambda a: lam_matrix(ctx, "minus", a),
                            subgroup_structure(ctx, "plus"), bad)
    assert not rep.passed and rep.details["skipped"] == 1


def _terms(cb):
    return [{k: round(float(v), 6) for k, v in im.terms.items() if abs(v) > 1e-8} for im in cb.images]


def test_cobracket_of_su2(ctx):
    # b'(e1) = 0, b'(e2) = e1^e2, b'(e3) = e1^e3
    assert _terms(cobracket_at_identity(ctx, "Gplus")) == [{}, {(0, 1): 1.0}, {(0, 2): 1.0}]
    full = _terms(cobracket_at_identity(ctx, "plus"))
    assert full[:3] == [{}, {(0, 1): 1.0}, {(0, 2): 1.0}]
    # Lambda_- gives the opposite sign on g_+
    assert _terms(cobracket_at_identity(ctx, "minus"))[:3] == [{}, {(0, 1): -1.0}, {(0, 2): -1.0}]
