import random

import pytest

from btlab.bttree import TN, TN_PRIME, Edge
from btlab.cochains import (
    ARROWS,
    EDGES,
    VERTICES,
    CochainVector,
    CurrentModule,
    WindowMismatch,
    act_cochain,
    arrows_to_edges,
    edge_window,
    edges_to_arrows,
    extend_current,
    is_harmonic,
    orbit_invariants,
    restrict,
    s_twisted_act,
    sigma,
    sigma_matrix,
    sigma_matrix_on_invariants,
    solve_sigma,
)
from btlab.groups import FULL_G, IWAHORI, MAX_COMPACT, diag, e12, generators, random_element, s_matrix
from btlab.intlin import kernel_basis
from btlab.vdput import line_current
from btlab.verify import psi_closed_form

from conftest import tree_q


def random_eta(rng, win):
    return CochainVector(win, VERTICES, [rng.randint(-5, 5) for _ in win.vertices])


def random_current(tree, rng, vw):
    """A random element of Ker(Sigma_n) on E_{n+1}."""
    ew = edge_window(tree, vw)
    phi = CochainVector(ew, EDGES, [rng.randint(-4, 4) for _ in ew.edges])
    return phi - solve_sigma(tree, sigma(tree, phi, vw))


def test_sigma_examples(t2):
    vw0 = t2.window(TN, 0)
    ew1 = edge_window(t2, vw0)
    assert sigma(t2, CochainVector.zero(ew1, EDGES), vw0).is_zero()
    assert sigma(t2, CochainVector(ew1, EDGES, [1, 1, 1]), vw0).values == (3,)
    vw1 = t2.window(TN, 1)
    ew2 = edge_window(t2, vw1)
    outer = CochainVector.from_function(ew2, EDGES, lambda e: int(min(x.dist0 for x in e.ends) == 1))
    out = sigma(t2, outer, vw1)
    assert out[t2.v(0)] == 0
    assert all(out[v] == 2 for v in vw1.vertices if v.dist0 == 1)


def test_sigma_requires_edges(t2):
    with pytest.raises(WindowMismatch):
        sigma(t2, CochainVector.zero(t2.window(TN, 1), VERTICES))


def test_is_harmonic_examples(t2):
    ew1 = t2.window(TN, 1)
    assert is_harmonic(t2, CochainVector.zero(ew1, EDGES))
    assert is_harmonic(t2, CochainVector(ew1, EDGES, [1, -1, 0]))
    assert not is_harmonic(t2, CochainVector.indicator(ew1, EDGES, [t2.e(0)]))


@pytest.mark.parametrize("q", [2, 3])
def test_solve_sigma_roundtrip(q):
    t = tree_q(q)
    rng = random.Random(q)
    for _ in range(100):
        vw = t.window(TN, rng.randint(0, 3))
        eta = random_eta(rng, vw)
        assert sigma(t, solve_sigma(t, eta), vw) == eta


def test_solve_sigma_examples(t2):
    vw0 = t2.window(TN, 0)
    assert solve_sigma(t2, CochainVector.zero(vw0, VERTICES)).is_zero()
    phi = solve_sigma(t2, CochainVector.indicator(vw0, VERTICES, [t2.v(0)]))
    assert phi.support() == [t2.e(0)]


@pytest.mark.parametrize("q", [2, 3])
def test_kernel_dimension(q):
    t = tree_q(q)
    for n in range(4):
        vw = t.window(TN, n)
        A = sigma_matrix(t, vw)
        assert len(kernel_basis(A)) == len(edge_window(t, vw).edges) - len(vw.vertices)
        assert CurrentModule(t, vw).rank == len(kernel_basis(A))


@pytest.mark.parametrize("kind", [TN, TN_PRIME])
def test_mittag_leffler_extension(kind):
    t = tree_q(2)
    rng = random.Random(6)
    for _ in range(50):
        n = rng.randint(0, 2)
        vw = t.window(kind, n)
        phi = random_current(t, rng, vw)
        ext = extend_current(t, phi)
        assert ext.window == t.window(kind, n + 2)
        assert is_harmonic(t, ext)
        assert restrict(ext, phi.window) == phi


@pytest.mark.parametrize("q", [2, 3])
def test_arrow_edge_roundtrip(q):
    t = tree_q(q)
    rng = random.Random(10 + q)
    for _ in range(50):
        vw = t.window(TN, rng.randint(0, 2))
        phi = random_current(t, rng, vw)
        arrows = edges_to_arrows(t, phi)
        assert is_harmonic(t, arrows)
        assert arrows_to_edges(t, arrows) == phi
        assert edges_to_arrows(t, arrows_to_edges(t, arrows)) == arrows
    zero = CochainVector.zero(t.window(TN, 1), ARROWS)
    assert arrows_to_edges(t, zero).is_zero()


def test_line_current_maps_to_signed_edges(t2):
    vw = t2.window(TN, 1)
    cur = line_current(t2, t2.end(1, 0), t2.end(0, 1)).on_arrows(vw)
    edges = arrows_to_edges(t2, cur)
    apartment = {t2.e(i) for i in range(-3, 3)}
    assert set(edges.support()) == apartment & set(edges.window.edges)
    assert all(abs(x) == 1 for x in edges.values if x)


def test_arrow_action_intertwines(t2):
    t = t2
    rng = random.Random(12)
    for _ in range(30):
        vw = t.window(TN_PRIME, rng.randint(0, 2))
        phi = random_current(t, rng, vw)
        arrows = edges_to_arrows(t, phi)
        g = random_element(t.field, IWAHORI, rng)  # I preserves T'_n
        assert arrows_to_edges(t, act_cochain(t, g, arrows)) == act_cochain(t, g, phi)
        s = s_matrix(t.field)
        assert arrows_to_edges(t, act_cochain(t, s, arrows)) == s_twisted_act(t, phi)


def test_act_cochain_examples(t2):
    fld = t2.field
    ew2 = t2.window(TN, 2)
    rng = random.Random(0)
    phi = CochainVector(ew2, EDGES, [rng.randint(-3, 3) for _ in ew2.edges])
    assert act_cochain(t2, diag(fld, 1, 1), phi) == phi
    lam = fld.pi_power(3) * 5
    assert act_cochain(t2, diag(fld, lam, lam), phi) == phi
    g = e12(fld, 1)
    ind = CochainVector.indicator(ew2, EDGES, [t2.e(0)])
    ew1 = t2.window(TN, 1)
    expected = CochainVector.indicator(ew1, EDGES, [x for x in [t2.act(g.m, t2.e(0))] if x in ew1.edge_index])
    assert act_cochain(t2, g, ind, ew1) == expected


def test_s_twisted_on_iwahori_orbits(tree23):
    t = tree23
    ew = t.window(TN_PRIME, 2)
    ob = orbit_invariants(t, IWAHORI, ew, EDGES)
    for rep, vec in zip(ob.representatives, ob.vectors):
        image = ob.vectors[ob.orbit_of(t.act(t.s, rep))]
        assert s_twisted_act(t, vec) == -image
        assert s_twisted_act(t, s_twisted_act(t, vec)) == vec


@pytest.mark.parametrize("q", [2, 3, 4])
def test_s_negates_psi(q):
    t = tree_q(q)
    for n in range(2):
        eb = orbit_invariants(t, IWAHORI, t.window(TN_PRIME, n + 1), EDGES, level=n + 2)
        psi = eb.combine(psi_closed_form(q, n))
        assert is_harmonic(t, psi)
        assert s_twisted_act(t, psi) == -psi


def test_orbit_examples(t2, t3):
    assert orbit_invariants(t2, MAX_COMPACT, t2.window(TN, 2)).sizes == [1, 3, 6]
    assert orbit_invariants(t2, IWAHORI, t2.window(TN_PRIME, 1), EDGES).sizes == [2, 1, 2]
    assert orbit_invariants(t3, MAX_COMPACT, t3.window(TN, 1), EDGES).sizes == [4]


@pytest.mark.parametrize("q", [2, 3])
def test_orbit_vectors_are_invariant(q):
    t = tree_q(q)
    for tag, kind in ((MAX_COMPACT, TN), (IWAHORI, TN_PRIME)):
        for n in range(3):
            for domain in (VERTICES, EDGES):
                win = t.window(kind, n)
                ob = orbit_invariants(t, tag, win, domain)
                assert sum(ob.sizes) == len(win.items(domain))
                for g in generators(t.field, tag, n + 2):
                    for vec in ob.vectors:
                        assert act_cochain(t, g, vec) == vec


def test_sigma_on_invariants_examples(t2):
    assert sigma_matrix_on_invariants(t2, MAX_COMPACT, 1).tolist() == [[3, 0], [1, 2]]
    assert sigma_matrix_on_invariants(t2, IWAHORI, 0).tolist() == [[2, 1, 0], [0, 1, 2]]
    for q in (2, 3, 4, 5):
        assert sigma_matrix_on_invariants(tree_q(q), MAX_COMPACT, 0).tolist() == [[q + 1]]


def test_current_module_action(t3):
    t = t3
    vw = t.window(TN, 1)
    mod = CurrentModule(t, vw)
    rng = random.Random(3)
    for b in mod.basis:
        assert is_harmonic(t, b)
    for _ in range(20):
        g, h = random_element(t.field, MAX_COMPACT, rng), random_element(t.field, MAX_COMPACT, rng)
        assert mod.action_matrix(g * h) == mod.action_matrix(g) @ mod.action_matrix(h)
        phi = random_current(t, rng, vw)
        assert mod.from_coords(mod.coords(phi)) == phi
        assert mod.coords(act_cochain(t, g, phi)) == mod.action_matrix(g) @ mod.coords(phi)


def test_window_escape_detected(t2):
    from btlab.cochains import WindowEscape

    ew = t2.window(TN, 1)
    g = random_element(t2.field, FULL_G, 3)
    while t2.act(g.m, t2.v(0)) == t2.v(0):
        g = g * s_matrix(t2.field)
    with pytest.raises(WindowEscape):
        act_cochain(t2, g, CochainVector.zero(ew, EDGES))
