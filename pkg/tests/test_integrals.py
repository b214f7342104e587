"""Windowed linear algebra for integral forms: the Haar-type functional,
lambda annihilation, image ranks and cokernels, connection integrals with
preimages, and the ladder diagrams linking the two complexes."""
from __future__ import annotations

import random

import pytest

from intforms.dga import CalculusSpec
from intforms.homconn import HomForm, dual_form, nabla, nabla_n
from intforms import integrals
from intforms.integrals import (
    FiltrationViolated,
    LadderDiagram,
    NoPreimageUpToBound,
    SquareFails,
    Truncation,
    check_ladder,
    check_lambda_annihilates,
    image_rank,
    integral_class,
    sl2_lambda,
)
from intforms.linalg import LinearSystem
from intforms.linmap import Identity
from intforms.multider import TwistedMultiDerivation, untwisted_sigma
from intforms.ncalg import Presentation
from intforms.scalars import ScalarContext


def make_free_line(partial_image=None, grading=None):
    """One-generator presentation with a single untwisted derivation."""
    ctx = ScalarContext(())
    pres = Presentation(ctx, ("x",), grading=grading)
    image = pres.zero if partial_image is None else partial_image(pres)
    tmd = TwistedMultiDerivation(
        pres,
        {"x": (image,)},
        untwisted_sigma(pres, 1),
        diag_inverses=[Identity(pres)],
    )
    return CalculusSpec(tmd, ("dx",), {("dx", "dx"): {}}, top_degree=1)


# -- the functional ---------------------------------------------------------


def test_lambda_values(sl2):
    q = sl2.context.parameter("q")
    beta, gamma = sl2.gen("beta"), sl2.gen("gamma")
    bg = beta * gamma
    assert sl2_lambda(sl2.one) == sl2.context.one
    assert sl2_lambda(bg) == -1 / (q + q**-1)
    assert sl2_lambda(bg * bg) == (q - q**-1) / (q**3 - q**-3)
    assert sl2_lambda(2 * sl2.one + 3 * bg) == 2 - 3 / (q + q**-1)


def test_lambda_kills_alpha_delta_and_unbalanced(sl2):
    alpha, beta, gamma, delta = (
        sl2.gen(g) for g in ("alpha", "beta", "gamma", "delta")
    )
    zero = sl2.context.zero
    assert sl2_lambda(alpha * beta**2 * gamma) == zero
    assert sl2_lambda(beta * delta * gamma) == zero
    assert sl2_lambda(beta**2 * gamma) == zero
    assert sl2_lambda(sl2.zero) == zero


def test_lambda_vanishes_off_degree_zero(sl2):
    zero = sl2.context.zero
    for w in sl2.normal_words(4):
        if sl2.word_degree(w) != 0:
            assert sl2_lambda(sl2.monomial(w)) == zero


def test_lambda_wants_sl2(qplane):
    with pytest.raises(ValueError):
        sl2_lambda(qplane.gen("x"))


# -- lambda kills the image of nabla ----------------------------------------


def test_lambda_annihilates(sl2_3d_calc):
    report = check_lambda_annihilates(sl2_3d_calc, 4)
    assert report.ok
    assert report.checked == 3 * 55


def test_lambda_annihilates_single_case(sl2, sl2_3d_calc):
    # nabla(xi_+ * alpha*gamma) = -q - (1+q^2)*beta*gamma, which the
    # functional balances to zero
    q = sl2.context.parameter("q")
    f = dual_form(sl2_3d_calc, "w+") * (sl2.gen("alpha") * sl2.gen("gamma"))
    value = nabla(sl2_3d_calc, f)
    bg = sl2.gen("beta") * sl2.gen("gamma")
    assert value == -q * sl2.one - (1 + q**2) * bg
    assert sl2_lambda(value) == sl2.context.zero


def test_lambda_sign_control(sl2, sl2_3d_calc):
    # flipping the sign of the (beta*gamma) row must be caught
    q = sl2.context.parameter("q")
    bg_word = (sl2.generators.index("beta"), sl2.generators.index("gamma"))

    def flipped(a):
        return sl2_lambda(a) + 2 * a.coefficient(bg_word) / (q + q**-1)

    report = check_lambda_annihilates(sl2_3d_calc, 2, lam=flipped)
    assert not report.ok
    assert any(f["witness"] for f in report.failures)


# -- image rank and cokernel -------------------------------------------------


def test_image_rank_quantum_plane_blocks(qplane_calc):
    for d in range(6):
        report = image_rank(qplane_calc, 6, degree=d)
        assert report.rank == d + 1
        assert report.cokernel == ()


def test_image_rank_sl2_degree_zero_block(sl2, sl2_3d_calc):
    report = image_rank(sl2_3d_calc, 6, degree=0)
    assert report.cokernel == (sl2.one,)
    assert report.rank == len(report.truncation.target_words) - 1


def test_image_rank_zero_derivation():
    spec = make_free_line()
    report = image_rank(spec, 4)
    assert report.rank == 0
    assert len(report.cokernel) == len(spec.presentation.normal_words(4))


def test_image_rank_order_invariant(sl2_3d_calc):
    report = image_rank(sl2_3d_calc, 3, degree=0)
    trunc = Truncation(sl2_3d_calc, 3, degree=0)
    rows = []
    for i, w in trunc.columns():
        value = trunc.block_image(i, w)
        if value:
            rows.append(dict(value.terms))
    rng = random.Random(5)
    for _ in range(3):
        rng.shuffle(rows)
        system = LinearSystem(key=integrals._pivot_key)
        for row in rows:
            system.add(row)
        assert system.rank() == report.rank
        hit = set(system.pivot_columns())
        assert {w for w in trunc.target_words if w not in hit} == {
            tuple(rep.terms)[0] for rep in report.cokernel
        }


def test_filtration_violation():
    spec = make_free_line(lambda pres: pres.gen("x") ** 2)
    with pytest.raises(FiltrationViolated):
        Truncation(spec, 2).image(0, ("x", "x"))


def test_mixed_degree_violation():
    spec = make_free_line(
        lambda pres: pres.one + pres.gen("x") ** 2, grading={"x": 1}
    )
    with pytest.raises(FiltrationViolated):
        Truncation(spec, 3, degree=2).block_image(0, ("x",))


# -- integral classes --------------------------------------------------------


def test_integral_class_of_one(sl2, sl2_3d_calc):
    c, f = integral_class(sl2_3d_calc, sl2.one, 2)
    assert c == sl2.context.one
    assert f.is_zero()


def test_integral_class_betagamma(sl2, sl2_3d_calc):
    q = sl2.context.parameter("q")
    bg = sl2.gen("beta") * sl2.gen("gamma")
    c, f = integral_class(sl2_3d_calc, bg, 4)
    assert c == -1 / (q + q**-1)
    assert c == sl2_lambda(bg)
    assert nabla(sl2_3d_calc, f) == bg - c * sl2.one


def test_integral_class_degree_one(sl2, sl2_3d_calc):
    alpha = sl2.gen("alpha")
    c, f = integral_class(sl2_3d_calc, alpha, 3)
    assert c == sl2.context.zero
    assert nabla(sl2_3d_calc, f) == alpha


def test_integral_class_quantum_plane(qplane, qplane_calc):
    a = qplane.gen("x") ** 2 * qplane.gen("y")
    c, f = integral_class(qplane_calc, a, 4)
    assert c == qplane.context.zero
    assert nabla(qplane_calc, f) == a


def test_integral_class_guards(sl2, sl2_3d_calc):
    with pytest.raises(ValueError):
        integral_class(sl2_3d_calc, sl2.one + sl2.gen("alpha"), 3)
    bg = sl2.gen("beta") * sl2.gen("gamma")
    with pytest.raises(NoPreimageUpToBound):
        integral_class(sl2_3d_calc, bg, 1)


def test_chain_property_on_window(qplane, qplane_calc, sl2, sl2_3d_calc):
    # nabla after its first extension vanishes on windowed coordinates
    for pres, spec in ((qplane, qplane_calc), (sl2, sl2_3d_calc)):
        for e in spec.basis(2):
            for w in pres.normal_words(2):
                f = HomForm(spec, 2, {e: pres.monomial(w)})
                assert nabla(spec, nabla_n(spec, 1, f)) == pres.zero


# -- ladder diagrams ---------------------------------------------------------


def make_qplane_ladder(qplane, spec):
    ctx = qplane.context
    q, p = ctx.parameter("q"), ctx.parameter("p")
    return LadderDiagram(
        spec,
        [
            {(): dual_form(spec, ("dx", "dy"))},
            {"dx": -dual_form(spec, "dy"), "dy": HomForm(spec, 1, {"dx": p / q})},
            {("dx", "dy"): qplane.one},
        ],
    )


def make_sl2_ladder(sl2, spec):
    q = sl2.context.parameter("q")
    phi = dual_form(spec, ("w-", "w0", "w+"))
    return LadderDiagram(
        spec,
        [
            {(): phi},
            {
                "w-": dual_form(spec, ("w0", "w+")),
                "w0": HomForm(spec, 2, {("w-", "w+"): -(q**4)}),
                "w+": HomForm(spec, 2, {("w-", "w0"): q**6}),
            },
            {
                ("w-", "w0"): dual_form(spec, "w+"),
                ("w-", "w+"): HomForm(spec, 1, {"w0": -(q**4)}),
                ("w0", "w+"): HomForm(spec, 1, {"w-": q**6}),
            },
            {("w-", "w0", "w+"): sl2.one},
        ],
    )


def test_ladder_quantum_plane(qplane, qplane_calc):
    report = check_ladder(make_qplane_ladder(qplane, qplane_calc), 5)
    assert report.ok
    assert not report.square_failures
    assert all(v["ok"] for v in report.verticals)


def test_ladder_3d(sl2, sl2_3d_calc):
    report = check_ladder(make_sl2_ladder(sl2, sl2_3d_calc), 3)
    assert report.ok
    assert report.squares_checked == 7 * 30
    assert [v["rank"] for v in report.verticals] == [30, 90, 90, 30]


def test_ladder_trivial():
    spec = make_free_line()
    diagram = LadderDiagram(
        spec,
        [{(): dual_form(spec, "dx")}, {"dx": spec.presentation.one}],
    )
    report = check_ladder(diagram, 4)
    assert report.ok


def test_ladder_broken_vertical(qplane, qplane_calc):
    spec = qplane_calc
    ctx = qplane.context
    q, p = ctx.parameter("q"), ctx.parameter("p")
    bad = LadderDiagram(
        spec,
        [
            {(): dual_form(spec, ("dx", "dy"))},
            # sign flipped on the dx leg
            {"dx": dual_form(spec, "dy"), "dy": HomForm(spec, 1, {"dx": p / q})},
            {("dx", "dy"): qplane.one},
        ],
    )
    report = check_ladder(bad, 2)
    assert not report.ok
    assert report.square_failures
    witness = report.square_failures[0]
    assert witness["lhs"] != witness["rhs"]
    with pytest.raises(SquareFails):
        check_ladder(bad, 2, strict=True)


def test_ladder_validation(qplane, qplane_calc):
    spec = qplane_calc
    with pytest.raises(ValueError):
        LadderDiagram(spec, [{(): dual_form(spec, ("dx", "dy"))}])
    with pytest.raises(ValueError):
        LadderDiagram(
            spec,
            [
                {(): dual_form(spec, ("dx", "dy"))},
                {"dx": -dual_form(spec, "dy")},
                {("dx", "dy"): qplane.one},
            ],
        )
    with pytest.raises(ValueError):
        LadderDiagram(
            spec,
            [
                {(): dual_form(spec, "dx")},
                {"dx": -dual_form(spec, "dy"), "dy": dual_form(spec, "dx")},
                {("dx", "dy"): qplane.one},
            ],
        )
