"""Currents attached to quotients of F-rational linear forms, and cocycles built from them.

A linear form with kernel the line ``L`` is recorded only through its end ``L``;
scalars are never stored.  The current of ``l/l'`` is ``pair(L, L')``: it is
``+1`` on arrows of the geodesic between ``L'`` and ``L`` pointing towards
``L``, ``-1`` on the reversed arrows and ``0`` elsewhere.  Currents are lazy and
can be evaluated at any arrow of the tree.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from btlab.bttree import Arrow, Edge, End, SubtreeWindow, Tree, VertexLabel
from btlab.cochains import ARROWS, EDGES, CochainVector, act_cochain, edge_window, even_end, sigma
from btlab.groups import GroupElement, coset_reps_G0_mod_GnB0


class EqualLines(ValueError):
    pass


class StepCache:
    """Memoised ``step_toward_end`` for one tree, safe to share between threads."""

    def __init__(self, tree: Tree):
        self.tree = tree
        self._cache: dict[tuple[VertexLabel, End], VertexLabel] = {}
        self._lock = threading.Lock()

    def __call__(self, v: VertexLabel, U: End) -> VertexLabel:
        key = (v, U)
        with self._lock:
            w = self._cache.get(key)
        if w is None:
            w = self.tree.step_toward_end(v, U)
            with self._lock:
                self._cache[key] = w
        return w


_CACHES: dict[int, StepCache] = {}
_CACHES_LOCK = threading.Lock()


def stepper(tree: Tree) -> StepCache:
    with _CACHES_LOCK:
        c = _CACHES.get(id(tree))
        if c is None or c.tree is not tree:
            c = _CACHES[id(tree)] = StepCache(tree)
        return c


def pair_value(tree: Tree, L: End, Lp: End, a: Arrow) -> int:
    """Value of the current of l/l' at the arrow ``a``."""
    if L == Lp:
        raise EqualLines("the two lines coincide")
    step = stepper(tree)
    v, w = a.source, a.target
    toward = step(v, L)
    away = step(v, Lp)
    if toward == away:
        return 0
    if w == toward:
        return 1
    if w == away:
        return -1
    return 0


def _pair_or_zero(tree, L, Lp, a):
    return 0 if L == Lp else pair_value(tree, L, Lp, a)


@dataclass(frozen=True)
class LineCurrent:
    """Integer combination of ``pair(L, L')`` currents; pairs with equal lines contribute 0."""

    tree: Tree
    terms: tuple[tuple[End, End, int], ...]

    def value(self, a: Arrow) -> int:
        return sum(w * _pair_or_zero(self.tree, L, Lp, a) for L, Lp, w in self.terms if w)

    __call__ = value

    def edge_value(self, e: Edge) -> int:
        """Value on an undirected edge via e -> phi(v+, v-)."""
        vp, vm = even_end(self.tree, e)
        return self.value(Arrow(vp, vm))

    def __add__(self, other: "LineCurrent") -> "LineCurrent":
        return LineCurrent(self.tree, self.terms + other.terms)

    def __neg__(self) -> "LineCurrent":
        return LineCurrent(self.tree, tuple((L, Lp, -w) for L, Lp, w in self.terms))

    def __sub__(self, other: "LineCurrent") -> "LineCurrent":
        return self + (-other)

    def scale(self, k: int) -> "LineCurrent":
        return LineCurrent(self.tree, tuple((L, Lp, k * w) for L, Lp, w in self.terms))

    def act(self, g: GroupElement) -> "LineCurrent":
        """(g.P)(a) = P(g^-1 a), i.e. every pair of lines is moved by g."""
        t = self.tree
        return LineCurrent(t, tuple((t.act(g.m, L), t.act(g.m, Lp), w) for L, Lp, w in self.terms))

    def on_arrows(self, window: SubtreeWindow) -> CochainVector:
        return CochainVector(window, ARROWS, [self.value(a) for a in window.arrows])

    def on_edges(self, window: SubtreeWindow) -> CochainVector:
        return CochainVector(window, EDGES, [self.edge_value(e) for e in window.edges])


def line_current(tree: Tree, L: End, Lp: End, weight: int = 1) -> LineCurrent:
    return LineCurrent(tree, ((L, Lp, weight),))


def zero_current(tree: Tree) -> LineCurrent:
    return LineCurrent(tree, ())


@dataclass(frozen=True)
class FormalUnit:
    """A product of linear forms prod l_i^{m_i} with sum m_i = 0, up to scalars."""

    factors: tuple[tuple[End, int], ...]

    def __post_init__(self):
        if sum(m for _, m in self.factors):
            raise ValueError("total multiplicity must be zero")

    @classmethod
    def quotient(cls, L: End, Lp: End) -> "FormalUnit":
        return cls(((L, 1), (Lp, -1)))


def transform(tree: Tree, f: FormalUnit, base: int = 0) -> LineCurrent:
    """P(prod l_i^{m_i}) = sum_i m_i pair(L_i, L_base)."""
    L0 = f.factors[base][0]
    return LineCurrent(tree, tuple((L, L0, m) for L, m in f.factors if L != L0 and m))


# ---------------------------------------------------------------------------
# cocycles


CurrentCocycle = Callable[[GroupElement], LineCurrent]


def j_cocycle(tree: Tree, L: End) -> CurrentCocycle:
    """g -> P(g.l / l) = pair(g L, L)."""

    def j(g: GroupElement) -> LineCurrent:
        return line_current(tree, tree.act(g.m, L), L)

    return j


def check_cocycle(c: CurrentCocycle, g: GroupElement, h: GroupElement, arrows: Iterable[Arrow]) -> bool:
    """c(gh) = g.c(h) + c(g) at every listed arrow."""
    lhs = c(g * h)
    rhs = c(h).act(g) + c(g)
    return all(lhs.value(a) == rhs.value(a) for a in arrows)


def flow_value(tree: Tree, U: End, e: Edge) -> int:
    """phi({v+, v-}) = 1 iff (v+, v-) points towards U."""
    vp, vm = even_end(tree, e)
    return int(stepper(tree)(vp, U) == vm)


def flow_phi(tree: Tree, U: End, vertex_win: SubtreeWindow) -> tuple[CochainVector, CochainVector]:
    """The flow cochain on E_{n+1} and its image under Sigma_n."""
    ew = edge_window(tree, vertex_win)
    phi = CochainVector(ew, EDGES, [flow_value(tree, U, e) for e in ew.edges])
    return phi, sigma(tree, phi, vertex_win)


def path_psi(tree: Tree, U: End, vertex_win: SubtreeWindow) -> tuple[CochainVector, CochainVector]:
    """+-1 on the ray from v_0 to U inside E_{n+1}, and its image under Sigma_n."""
    ew = edge_window(tree, vertex_win)
    ray = tree.ray(tree.v(0), U, ew.n)
    vals = [0] * len(ew.edges)
    step = stepper(tree)
    for x, y in zip(ray, ray[1:]):
        e = Edge(x, y)
        vp, vm = even_end(tree, e)
        vals[ew.edge_index[e]] = 1 if step(vp, U) == vm else -1
    psi = CochainVector(ew, EDGES, vals)
    return psi, sigma(tree, psi, vertex_win)


def flow_coboundary_matches(tree: Tree, U: End, g: GroupElement, edges: Iterable[Edge]) -> bool:
    """g.phi - phi = phi_g on the given edges, with phi the global flow towards U."""
    ginv = g.inverse().m
    phig = j_cocycle(tree, U)(g)
    for e in edges:
        moved = tree.act(ginv, e)
        if flow_value(tree, U, moved) - flow_value(tree, U, e) != phig.edge_value(e):
            return False
    return True


def path_coboundary_matches(tree: Tree, U: End, g: GroupElement, vertex_win: SubtreeWindow) -> bool:
    """g.psi - psi = phi_g on E_{n+1} for g in G_0."""
    psi, _ = path_psi(tree, U, vertex_win)
    diff = act_cochain(tree, g, psi) - psi
    return diff == j_cocycle(tree, U)(g).on_edges(psi.window)


# ---------------------------------------------------------------------------
# beta_n and theta


def beta_current(tree: Tree, n: int, g: GroupElement, L: End | None = None) -> LineCurrent:
    """sum_i (pair(g_i L, L) - pair(g g_i L, L)) over the coset representatives of G_0 / G_{n+1} B_0."""
    L = L or tree.end(1, 0)
    terms = []
    for gi in coset_reps_G0_mod_GnB0(tree.field, n):
        a = tree.act(gi.m, L)
        b = tree.act((g * gi).m, L)
        terms.append((a, L, 1))
        terms.append((b, L, -1))
    return LineCurrent(tree, tuple(terms))


def beta_vanishing(tree: Tree, n: int, g: GroupElement, window: SubtreeWindow | None = None) -> bool:
    window = window or tree.window("Tn", n)
    beta = beta_current(tree, n, g)
    return all(beta.value(a) == 0 for a in window.arrows)


def theta_lines(tree: Tree) -> tuple[End, list[End]]:
    """L_0 = [1 : 0] and L_zeta = [1 : -pi zeta], the kernels of y and pi zeta x + y."""
    fld = tree.field
    L0 = tree.end(1, 0)
    return L0, [tree.end(1, -fld.uniformizer * z) for z in fld.unit_representatives()]


def theta_current(tree: Tree, g: GroupElement) -> LineCurrent:
    L0, lines = theta_lines(tree)
    terms = [(tree.act(g.m, L), L, 1) for L in [L0] + lines]
    return LineCurrent(tree, tuple(terms))


def theta_correction(tree: Tree) -> LineCurrent:
    """c = sum over zeta of pair(L_zeta, L_0)."""
    L0, lines = theta_lines(tree)
    return LineCurrent(tree, tuple((L, L0, 1) for L in lines))


def theta_identity(tree: Tree, g: GroupElement, window: SubtreeWindow) -> bool:
    """P(theta(g)) - q P(j(g)) = g.c - c at every arrow of the window."""
    L0, _ = theta_lines(tree)
    lhs = theta_current(tree, g) - j_cocycle(tree, L0)(g).scale(tree.q)
    c = theta_correction(tree)
    rhs = c.act(g) - c
    return all(lhs.value(a) == rhs.value(a) for a in window.arrows)
