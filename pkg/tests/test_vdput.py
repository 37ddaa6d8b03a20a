import random

import pytest

from btlab.bttree import TN, TN_PRIME, Arrow
from btlab.cochains import act_cochain, is_harmonic, sigma
from btlab.groups import FULL_G, IWAHORI, MAX_COMPACT, G0DET, element, identity, random_element
from btlab.vdput import (
    EqualLines,
    FormalUnit,
    beta_current,
    beta_vanishing,
    check_cocycle,
    flow_coboundary_matches,
    flow_phi,
    j_cocycle,
    line_current,
    pair_value,
    path_coboundary_matches,
    path_psi,
    theta_current,
    theta_correction,
    theta_identity,
    transform,
)

from conftest import tree_q


def random_end(fld, rng):
    return (fld.random_integral(rng), fld.random_scalar(rng))


def test_pair_value_examples(t2):
    L, Lp = t2.end(1, 0), t2.end(0, 1)
    assert pair_value(t2, L, Lp, Arrow(t2.v(0), t2.v(1))) == 1
    assert pair_value(t2, L, Lp, Arrow(t2.v(1), t2.v(0))) == -1
    off = [w for w in t2.neighbors(t2.v(1)) if w not in (t2.v(0), t2.v(2))][0]
    assert pair_value(t2, L, Lp, Arrow(off, t2.v(1))) == 0
    assert pair_value(t2, L, Lp, Arrow(t2.v(1), off)) == 0
    with pytest.raises(EqualLines):
        pair_value(t2, L, L, Arrow(t2.v(0), t2.v(1)))


def test_transform_examples(t2):
    L, Lp = t2.end(1, 0), t2.end(0, 1)
    arrows = t2.window(TN, 2).arrows
    zero = transform(t2, FormalUnit(((L, 1), (L, -1))))
    assert all(zero.value(a) == 0 for a in arrows)
    apartment = transform(t2, FormalUnit.quotient(L, Lp))
    ref = line_current(t2, L, Lp)
    assert all(apartment.value(a) == ref.value(a) for a in arrows)
    with pytest.raises(ValueError):
        FormalUnit(((L, 1),))


@pytest.mark.parametrize("q", [2, 3])
def test_transform_base_independence(q):
    t = tree_q(q)
    rng = random.Random(q)
    arrows = t.window(TN, 3).arrows
    for _ in range(10):
        lines = [t.end(*random_end(t.field, rng)) for _ in range(3)]
        f = FormalUnit(((lines[0], 2), (lines[1], -1), (lines[2], -1)))
        a0, a1 = transform(t, f, base=0), transform(t, f, base=2)
        for _ in range(10):
            a = rng.choice(arrows)
            assert a0.value(a) == a1.value(a)


def test_j_cocycle_examples(t2):
    fld = t2.field
    L = t2.end(1, 0)
    j = j_cocycle(t2, L)
    arrows = t2.window(TN, 2).arrows
    assert all(j(element(fld, 1, 1, 0, 1)).value(a) == 0 for a in arrows)
    flip = j(element(fld, 0, 1, 1, 0))
    ref = line_current(t2, t2.end(0, 1), L)
    assert all(flip.value(a) == ref.value(a) for a in arrows)
    assert flip.value(Arrow(t2.v(1), t2.v(0))) == 1


@pytest.mark.parametrize("q", [2, 3])
def test_j_cocycle_identity(q):
    t = tree_q(q)
    rng = random.Random(50 + q)
    arrows = t.window(TN, 2).arrows
    j = j_cocycle(t, t.end(1, 0))
    for _ in range(100 if q == 2 else 30):
        g, h = random_element(t.field, MAX_COMPACT, rng), random_element(t.field, MAX_COMPACT, rng)
        assert check_cocycle(j, g, h, arrows)


def test_flow_examples(t2, t3):
    for t in (t2, t3):
        vw = t.window(TN, 1)
        _, sig = flow_phi(t, t.end(1, 0), vw)
        assert sig.values == tuple(1 if t.parity(v) == 0 else t.q for v in vw.vertices)


@pytest.mark.parametrize("q", [2, 3])
def test_flow_and_path_sigma(q):
    t = tree_q(q)
    rng = random.Random(q)
    for n in range(3):
        vw = t.window(TN, n)
        for _ in range(3):
            U = t.end(*random_end(t.field, rng))
            _, sig_phi = flow_phi(t, U, vw)
            assert sig_phi.values == tuple(1 if t.parity(v) == 0 else q for v in vw.vertices)
            _, sig_psi = path_psi(t, U, vw)
            assert sig_psi.values == tuple(int(v == t.v(0)) for v in vw.vertices)


@pytest.mark.parametrize("q", [2, 3])
def test_flow_coboundary(q):
    t = tree_q(q)
    rng = random.Random(7 * q)
    edges = t.window(TN, 2).edges
    U = t.end(1, 0)
    for _ in range(20):
        g = random_element(t.field, G0DET, rng)
        assert flow_coboundary_matches(t, U, g, edges)


def test_path_examples(t2):
    vw = t2.window(TN, 1)
    psi, sig = path_psi(t2, t2.end(1, 0), vw)
    assert set(psi.support()) == {t2.e(0), t2.e(1)}
    assert sig.values == (1, 0, 0, 0)


@pytest.mark.parametrize("q", [2, 3])
def test_path_coboundary(q):
    t = tree_q(q)
    rng = random.Random(9 * q)
    vw = t.window(TN, 1)
    U = t.end(1, 0)
    psi, _ = path_psi(t, U, vw)
    for _ in range(20):
        g = random_element(t.field, MAX_COMPACT, rng)
        diff = act_cochain(t, g, psi) - psi
        assert is_harmonic(t, diff)
        assert path_coboundary_matches(t, U, g, vw)


def test_beta_examples(t2):
    fld = t2.field
    assert beta_vanishing(t2, 1, identity(fld))
    rng = random.Random(0)
    assert all(beta_vanishing(t2, 0, random_element(fld, MAX_COMPACT, rng)) for _ in range(50))


def test_beta_window_is_sharp(t2):
    # outside A_{<=1} the current need not vanish
    inner = set(t2.window(TN, 1).arrows)
    outer = [a for a in t2.window(TN, 2).arrows if a not in inner]
    b = beta_current(t2, 1, random_element(t2.field, MAX_COMPACT, 0))
    assert any(b.value(a) for a in outer)


def test_theta_examples(t2, t3):
    for t in (t2, t3):
        win = t.window(TN, 1)
        one = identity(t.field)
        c = theta_correction(t)
        assert all(theta_current(t, one).value(a) == 0 for a in win.arrows)
        assert all(c.act(one).value(a) - c.value(a) == 0 for a in win.arrows)
    rng = random.Random(1)
    for _ in range(20):
        assert theta_identity(t2, random_element(t2.field, IWAHORI, rng), t2.window(TN, 1))
        assert theta_identity(t3, random_element(t3.field, MAX_COMPACT, rng), t3.window(TN, 1))


@pytest.mark.parametrize("q", [2, 3])
def test_line_currents_harmonic_and_antisymmetric(q):
    t = tree_q(q)
    rng = random.Random(30 + q)
    win = t.window(TN, 3)
    for _ in range(100 // 2):
        L, Lp = t.end(*random_end(t.field, rng)), t.end(*random_end(t.field, rng))
        if L == Lp:
            continue
        cur = line_current(t, L, Lp, rng.choice([1, -2, 3]))
        vals = cur.on_arrows(win)
        assert is_harmonic(t, vals)
        for a in win.arrows[: 4 * (q + 1)]:
            assert cur.value(a) == -cur.value(a.reverse())


@pytest.mark.parametrize("q", [2, 3])
def test_equivariance(q):
    t = tree_q(q)
    rng = random.Random(40 + q)
    arrows = t.window(TN, 2).arrows
    for _ in range(100):
        L, Lp = t.end(*random_end(t.field, rng)), t.end(*random_end(t.field, rng))
        if L == Lp:
            continue
        g = random_element(t.field, FULL_G, rng)
        a = rng.choice(arrows)
        gL, gLp, ga = t.act(g.m, L), t.act(g.m, Lp), t.act(g.m, a)
        assert pair_value(t, gL, gLp, ga) == pair_value(t, L, Lp, a)


def test_on_edges_matches_sigma_zero(t3):
    vw = t3.window(TN_PRIME, 1)
    cur = line_current(t3, t3.end(1, 0), t3.end(1, 1))
    edges = cur.on_edges(t3.window(TN_PRIME, 2))
    assert sigma(t3, edges, vw).is_zero()
