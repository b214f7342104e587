"""Twisted multi-derivations: extension, the Leibniz law, freeness
verification, q-skew detection."""
from __future__ import annotations

import random

import pytest

from intforms.linmap import MapMatrix, Scale
from intforms.multider import (
    SigmaNotDiagonal,
    TwistedMultiDerivation,
    detect_q_skew,
    extend_partial,
    untwisted_sigma,
    verify_free,
)
from intforms.ncalg import MIXED


def test_partial_on_generators(sl2_3d_tmd, sl2):
    q = sl2.context.parameter("q")
    a, b = sl2.gen("alpha"), sl2.gen("beta")
    assert extend_partial(sl2_3d_tmd, a) == (a, -q * b, sl2.zero)
    assert extend_partial(sl2_3d_tmd, sl2.one) == (sl2.zero,) * 3


def test_partial_of_beta_gamma_vanishes_at_zero_index(sl2_3d_tmd, sl2):
    # partial_0(beta gamma) = partial_0(beta) sigma_0(gamma) + beta partial_0(gamma)
    #                       = (-q^2 beta)(q^-2 gamma) + beta gamma = 0
    bc = sl2.gen("beta") * sl2.gen("gamma")
    row = extend_partial(sl2_3d_tmd, bc)
    assert row[0] == sl2.zero


def test_partial_linear(sl2_3d_tmd, sl2):
    q = sl2.context.parameter("q")
    a, d = sl2.gen("alpha"), sl2.gen("delta")
    lhs = extend_partial(sl2_3d_tmd, a * a - q * d)
    ra = extend_partial(sl2_3d_tmd, a * a)
    rd = extend_partial(sl2_3d_tmd, d)
    assert lhs == tuple(ra[i] - q * rd[i] for i in range(3))


def _random_elements(pres, rng, count, max_len):
    words = pres.normal_words(max_len)
    out = []
    for _ in range(count):
        e = pres.zero
        for _ in range(rng.randint(1, 3)):
            e = e + pres.monomial(rng.choice(words), rng.randint(-2, 3))
        out.append(e)
    return out


@pytest.mark.parametrize("fixture", ["qplane_tmd", "sl2_3d_tmd"])
def test_twisted_leibniz_randomised(fixture, request):
    tmd = request.getfixturevalue(fixture)
    pres = tmd.presentation
    rng = random.Random(2024)
    elems = _random_elements(pres, rng, 30, 4)
    for a, b in zip(elems[::2], elems[1::2]):
        left = extend_partial(tmd, a * b)
        pa = extend_partial(tmd, a)
        pb = extend_partial(tmd, b)
        sig_b = tmd.sigma.apply(b)
        for i in range(tmd.n):
            twisted = pres.zero
            for j in range(tmd.n):
                twisted = twisted + pa[j] * sig_b[j][i]
            assert left[i] == twisted + a * pb[i]


def test_bracketing_independence(qplane_tmd, qplane):
    # partial over (xy)(yx) and x(y(yx)) must agree: both reduce to the
    # same element, and extension only ever sees its normal words
    x, y = qplane.gen("x"), qplane.gen("y")
    w1 = (x * y) * (y * x)
    w2 = x * (y * (y * x))
    assert w1 == w2
    assert extend_partial(qplane_tmd, w1) == extend_partial(qplane_tmd, w2)


def test_verify_free_passes(qplane_tmd, sl2_3d_tmd):
    for tmd in (qplane_tmd, sl2_3d_tmd):
        report = verify_free(tmd)
        assert report.ok, report.failures
        assert tmd.verified is report
        assert len(report.checks) == 9


def test_verify_free_catches_sign_flip(qplane):
    from conftest import make_qplane_tmd

    tmd = make_qplane_tmd(qplane)
    bar = tmd.sigma_bar
    entries = [list(row) for row in bar.entries]
    entries[1][0] = Scale(-1, entries[1][0])
    tampered = MapMatrix.from_entries(qplane, entries)
    broken = TwistedMultiDerivation(
        qplane,
        {g: tmd.partial_on_gens[qplane.index(g)] for g in ("x", "y")},
        tmd.sigma,
        sigma_bar=tampered,
        sigma_hat=tmd.sigma_hat,
    )
    report = verify_free(broken)
    assert not report.ok
    names = [c["name"] for c in report.failures]
    assert any("bar" in n for n in names)
    assert all(c["witness"] for c in report.failures)


def test_degree_shifts(sl2_3d_tmd):
    assert sl2_3d_tmd.degree_shifts() == [0, -2, 2]


def test_detect_q_skew_3d(sl2_3d_tmd, sl2):
    q = sl2.context.parameter("q")
    constants = detect_q_skew(sl2_3d_tmd)
    assert constants == [sl2.context.one, 1 / (q * q), q * q]


def test_detect_q_skew_requires_diagonal(qplane_tmd):
    with pytest.raises(SigmaNotDiagonal):
        detect_q_skew(qplane_tmd)


def test_detect_q_skew_untwisted(qplane):
    sigma = untwisted_sigma(qplane, 2)
    rows = {"x": (qplane.one, qplane.zero), "y": (qplane.zero, qplane.one)}
    tmd = TwistedMultiDerivation(
        qplane, rows, sigma, sigma_bar=sigma, sigma_hat=sigma
    )
    ones = detect_q_skew(tmd)
    assert ones == [qplane.context.one] * 2


def test_row_validation(qplane, qplane_tmd):
    with pytest.raises(ValueError):
        TwistedMultiDerivation(
            qplane, {"x": (qplane.one,)}, qplane_tmd.sigma,
            sigma_bar=qplane_tmd.sigma_bar, sigma_hat=qplane_tmd.sigma_hat,
        )
    with pytest.raises(ValueError):
        TwistedMultiDerivation(
            qplane, {"x": (qplane.one, qplane.zero)}, qplane_tmd.sigma,
            sigma_bar=qplane_tmd.sigma_bar, sigma_hat=qplane_tmd.sigma_hat,
        )
    with pytest.raises(ValueError):
        TwistedMultiDerivation(
            qplane,
            {"x": (qplane.one, qplane.zero), "y": (qplane.zero, qplane.one)},
            qplane_tmd.sigma,
        )
