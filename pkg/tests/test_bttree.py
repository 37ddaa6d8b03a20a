import random
from collections import deque

import pytest

from btlab import mat2
from btlab.bttree import TN, TN_PRIME, Arrow, Edge, VertexLabel, window_sizes
from btlab.groups import FULL_G, G0DET, MAX_COMPACT, random_element, s_matrix

from conftest import tree_q


def _integral(fld, M):
    return all(not x or fld.valuation(x) >= 0 for x in M)


def _lattice_in(tree, small, big):
    """L_small <= L_big as actual lattices (no homothety)."""
    return _integral(tree.field, mat2.mul(mat2.inv(big), small))


def _is_neighbor_by_lattices(tree, v, w):
    """Some homothetic copy L' of L_w has pi L_v < L' < L_v with both inclusions strict."""
    fld = tree.field
    Mv, Mw = tree.lattice_matrix(v), tree.lattice_matrix(w)
    piMv = tuple(fld.uniformizer * x for x in Mv)
    for k in range(-6, 7):
        Mk = tuple(fld.pi_power(k) * x for x in Mw)
        if _lattice_in(tree, piMv, Mk) and _lattice_in(tree, Mk, Mv):
            index = fld.valuation(mat2.det(Mk)) - fld.valuation(mat2.det(Mv))
            if index == 1:
                return True
    return False


def _bfs(tree, start, allowed):
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in tree.neighbors(u):
            if w in allowed and w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def test_canonical_vertex_examples(t2):
    fld = t2.field
    assert t2.canonical_vertex((1, 0, 0, 1)) == VertexLabel(0, 0)
    for i in range(4):
        assert t2.canonical_vertex((1, 0, 0, fld.pi_power(i))) == t2.v(i)
    assert t2.act(t2.s, t2.v(0)) == t2.v(1)
    for i in range(-3, 4):
        assert t2.act(t2.s, t2.v(i)) == t2.v(1 - i)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_neighbors_match_sublattice_oracle(q):
    tree = tree_q(q)
    for v in tree.window(TN, 2).vertices[:8]:
        nb = tree.neighbors(v)
        assert len(set(nb)) == q + 1
        assert all(_is_neighbor_by_lattices(tree, v, w) for w in nb)
        assert all(v in tree.neighbors(w) for w in nb)


def test_neighbor_examples(t2, t3):
    assert len(t2.neighbors(t2.v(0))) == 3 and t2.v(1) in t2.neighbors(t2.v(0))
    nb = t3.neighbors(t3.v(1))
    assert len(nb) == 4 and t3.v(0) in nb and t3.v(2) in nb
    assert all(t2.distance(t2.v(0), w) == 1 for w in t2.neighbors(t2.v(0)))


def test_distance_and_geodesic_examples(tree23):
    t = tree23
    for i in range(5):
        assert t.distance(t.v(0), t.v(i)) == i
    assert t.geodesic(t.v(0), t.v(2)) == [t.v(0), t.v(1), t.v(2)]
    assert t.geodesic(t.v(3), t.v(3)) == [t.v(3)]


def test_geodesic_lengths_match_bfs(tree23):
    t = tree23
    win = t.window(TN, 4)
    allowed = set(win.vertices)
    rng = random.Random(1)
    for _ in range(100):
        v, w = rng.choice(win.vertices), rng.choice(win.vertices)
        d = _bfs(t, v, allowed)[w]
        assert t.distance(v, w) == d
        path = t.geodesic(v, w)
        assert len(path) == d + 1 and path[0] == v and path[-1] == w
        assert all(b in t.neighbors(a) for a, b in zip(path, path[1:]))


def test_center_acts_trivially(tree23):
    t = tree23
    fld = t.field
    rng = random.Random(2)
    for v in t.window(TN, 2).vertices:
        lam = fld.random_scalar(rng)
        assert t.act((lam, 0, 0, lam), v) == v


def test_s_fixes_e0(t2):
    e0 = t2.e(0)
    assert t2.act(t2.s, e0) == e0
    assert {t2.canonical_vertex(mat2.mul(t2.s, t2.lattice_matrix(x))) for x in e0.ends} == set(e0.ends)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_act_inverse_roundtrip(q):
    t = tree_q(q)
    rng = random.Random(q)
    win = t.window(TN, 3)
    for _ in range(200):
        g = random_element(t.field, FULL_G, rng)
        x = rng.choice([rng.choice(win.vertices), rng.choice(win.edges), rng.choice(win.arrows)])
        assert t.act(g.inverse().m, t.act(g.m, x)) == x


def test_parity(tree23):
    t = tree23
    assert t.parity(t.v(0)) == 0 and t.parity(t.v(1)) == 1
    rng = random.Random(4)
    win = t.window(TN, 3)
    for _ in range(100):
        g = random_element(t.field, G0DET, rng)
        assert g.det_valuation % 2 == 0
        v = rng.choice(win.vertices)
        assert t.parity(t.act(g.m, v)) == t.parity(v)
        assert t.parity(t.act(t.s, v)) == 1 - t.parity(v)


def test_step_toward_end_examples(tree23):
    t = tree23
    U, D = t.end(1, 0), t.end(0, 1)
    assert t.step_toward_end(t.v(0), U) == t.v(1)
    assert t.step_toward_end(t.v(1), U) == t.v(2)
    assert t.step_toward_end(t.v(1), D) == t.v(0)


def test_rays_approach_their_end(tree23):
    t = tree23
    fld = t.field
    rng = random.Random(8)
    win = t.window(TN, 2)
    for _ in range(40):
        U = t.end(fld.random_integral(rng), fld.random_scalar(rng))
        v = rng.choice(win.vertices)
        ray = t.ray(v, U, 6)
        for i, w in enumerate(ray):
            # distances from w to the rest of the ray go down by one per step
            assert [t.distance(w, x) for x in ray[i:]] == list(range(len(ray) - i))


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_window_sizes(q):
    t = tree_q(q)
    for n in range(3):
        win = t.window(TN, n)
        assert (len(win.vertices), len(win.edges)) == window_sizes(q, n)
        assert len(_bfs(t, t.v(0), set(win.vertices))) == len(win.vertices)
        assert len(win.arrows) == (q + 1) * len(win.vertices)
    w0 = t.window(TN, 0)
    assert (len(w0.vertices), len(w0.edges), len(w0.arrows)) == (1, 0, q + 1)


def test_window_examples(t2):
    w = t2.window(TN, 2)
    assert (len(w.vertices), len(w.edges)) == (10, 9)
    wp = t2.window(TN_PRIME, 1)
    assert (len(wp.vertices), len(wp.edges)) == (6, 5)


def test_regularity(tree23):
    t = tree23
    for v in t.window(TN_PRIME, 3).vertices:
        assert len(set(t.neighbors(v))) == t.q + 1


@pytest.mark.parametrize("q", [2, 3])
def test_tprime_is_union_and_intersection(q):
    t = tree_q(q)
    for n in range(5):
        Tn, Tn1 = t.window(TN, n), t.window(TN, n + 1)
        Tp = t.window(TN_PRIME, n)
        sV = {t.act(t.s, v) for v in Tn.vertices}
        sE = {t.act(t.s, e) for e in Tn.edges}
        assert set(Tp.vertices) == set(Tn.vertices) | sV
        # the union of the two subtrees plus the edge e_0 joining them
        assert set(Tp.edges) == set(Tn.edges) | sE | {t.e(0)}
        sV1 = {t.act(t.s, v) for v in Tn1.vertices}
        assert set(Tp.vertices) == set(Tn1.vertices) & sV1


@pytest.mark.parametrize("q", [2, 3, 4])
def test_canonical_form_soundness(q):
    t = tree_q(q)
    fld = t.field
    rng = random.Random(100 + q)
    cases = {2: 400, 3: 400, 4: 200}[q]
    for _ in range(cases):
        g = random_element(fld, FULL_G, rng)
        k = random_element(fld, MAX_COMPACT, rng)
        lam = fld.random_scalar(rng)
        gk = mat2.mul(g.m, k.m)
        assert t.canonical_vertex(g.m) == t.canonical_vertex(tuple(lam * x for x in gk))


def test_edge_and_arrow_basics(t2):
    a = Arrow(t2.v(0), t2.v(1))
    assert a.reverse().reverse() == a
    assert a.edge == Edge(t2.v(1), t2.v(0)) == t2.e(0)
    assert str(VertexLabel(2, 0, (1, 0))) == "(2,0;1.0)"
    with pytest.raises(ValueError):
        VertexLabel(1, 0, ())


def test_dot_and_json_export(t2):
    wp = t2.window("tprime", 1)
    dot = wp.to_dot(edge_labels=list(range(5)))
    assert dot.count("[label=") == 6 + 5 and dot.count(" -- ") == 5
    data = wp.to_json()
    assert len(data["vertices"]) == 6 and len(data["edges"]) == 5
    with pytest.raises(ValueError):
        wp.to_dot(edge_labels=[1])


def test_laurent_tree_agrees_with_counts():
    t = tree_q(2, "laurent")
    assert (len(t.window(TN, 3).vertices), len(t.window(TN, 3).edges)) == window_sizes(2, 3)
    assert t.act(s_matrix(t.field).m, t.v(2)) == t.v(-1)
