"""Integer cochains and currents on finite windows of the tree.

Conventions
-----------
* Edge cochains for the vertex window ``V_n`` live on the edges of the window of
  size ``n + 1`` (so ``Sigma_n: C(E_{n+1}) -> C(V_n)``).
* Arrow cochains for ``V_n`` live on ``A_{<=n}``, the arrows leaving ``V_n``.
* Even/odd refers to the distance to ``v_0``; an edge is written ``{v+, v-}``
  with ``v+`` the even end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from btlab.bttree import TN, TN_PRIME, Arrow, Edge, SubtreeWindow, Tree, VertexLabel
from btlab.groups import IWAHORI, MAX_COMPACT, GroupElement, generators, s_matrix
from btlab.intlin import IntMatrix

VERTICES, EDGES, ARROWS = "vertices", "edges", "arrows"


class WindowMismatch(ValueError):
    pass


class WindowEscape(ValueError):
    pass


@dataclass(frozen=True)
class CochainVector:
    window: SubtreeWindow
    domain: str
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(x) for x in self.values))
        if len(self.values) != len(self.window.items(self.domain)):
            raise WindowMismatch("length does not match the window")

    @classmethod
    def zero(cls, window: SubtreeWindow, domain: str) -> "CochainVector":
        return cls(window, domain, (0,) * len(window.items(domain)))

    @classmethod
    def indicator(cls, window: SubtreeWindow, domain: str, support: Iterable) -> "CochainVector":
        idx = window.index(domain)
        vals = [0] * len(idx)
        for x in support:
            vals[idx[x]] = 1
        return cls(window, domain, vals)

    @classmethod
    def from_function(cls, window: SubtreeWindow, domain: str, fn) -> "CochainVector":
        return cls(window, domain, [fn(x) for x in window.items(domain)])

    def _check(self, other: "CochainVector"):
        if self.domain != other.domain or self.window is not other.window and self.window != other.window:
            raise WindowMismatch("cochains live on different windows")

    def __add__(self, other):
        self._check(other)
        return CochainVector(self.window, self.domain, [a + b for a, b in zip(self.values, other.values)])

    def __sub__(self, other):
        self._check(other)
        return CochainVector(self.window, self.domain, [a - b for a, b in zip(self.values, other.values)])

    def __neg__(self):
        return CochainVector(self.window, self.domain, [-a for a in self.values])

    def __mul__(self, k: int):
        return CochainVector(self.window, self.domain, [k * a for a in self.values])

    __rmul__ = __mul__

    def __getitem__(self, x) -> int:
        return self.values[self.window.index(self.domain)[x]]

    def get(self, x, default=None):
        i = self.window.index(self.domain).get(x)
        return default if i is None else self.values[i]

    def is_zero(self) -> bool:
        return not any(self.values)

    def to_json(self) -> list[int]:
        return list(self.values)

    def support(self) -> list:
        items = self.window.items(self.domain)
        return [items[i] for i, x in enumerate(self.values) if x]


# ---------------------------------------------------------------------------
# windows


def edge_window(tree: Tree, vertex_window: SubtreeWindow) -> SubtreeWindow:
    """The edge window E_{n+1} paired with V_n."""
    return tree.window(vertex_window.kind, vertex_window.n + 1)


def vertex_window(tree: Tree, edge_win: SubtreeWindow) -> SubtreeWindow:
    """The vertex window V_n paired with E_{n+1}."""
    if edge_win.n < 1:
        raise WindowMismatch("E_0 has no paired vertex window")
    return tree.window(edge_win.kind, edge_win.n - 1)


def parent(tree: Tree, v: VertexLabel) -> VertexLabel | None:
    if v.dist0 == 0:
        return None
    for w in tree.neighbors(v):
        if w.dist0 < v.dist0:
            return w
    raise AssertionError("vertex without parent")  # pragma: no cover


def children(tree: Tree, v: VertexLabel) -> list[VertexLabel]:
    par = parent(tree, v)
    return [w for w in tree.neighbors(v) if w != par]


# ---------------------------------------------------------------------------
# Sigma


def sigma(tree: Tree, phi: CochainVector, target: SubtreeWindow | None = None) -> CochainVector:
    """(Sigma phi)(v) = sum of phi over the q+1 edges at v, for v in the smaller window."""
    if phi.domain != EDGES:
        raise WindowMismatch("sigma expects an edge cochain")
    target = target or vertex_window(tree, phi.window)
    idx = phi.window.edge_index
    out = []
    for v in target.vertices:
        total = 0
        for w in tree.neighbors(v):
            i = idx.get(Edge(v, w))
            if i is None:
                raise WindowMismatch(f"edge at {v} is missing from the edge window")
            total += phi.values[i]
        out.append(total)
    return CochainVector(target, VERTICES, out)


def sigma_matrix(tree: Tree, vertex_win: SubtreeWindow) -> IntMatrix:
    """Sigma_n on full window coordinates: |V_n| x |E_{n+1}|."""
    ew = edge_window(tree, vertex_win)
    idx = ew.edge_index
    rows = []
    for v in vertex_win.vertices:
        row = [0] * len(ew.edges)
        for w in tree.neighbors(v):
            row[idx[Edge(v, w)]] += 1
        rows.append(row)
    return IntMatrix(rows, len(ew.edges))


def _route(tree: Tree, vertex_win: SubtreeWindow, eta: Sequence[int], preset: dict[Edge, int] | None = None):
    """Edge values with the prescribed vertex sums, sending all correction through first children."""
    ew = edge_window(tree, vertex_win)
    vals = [0] * len(ew.edges)
    assigned = set()
    idx = ew.edge_index
    if preset:
        for e, x in preset.items():
            vals[idx[e]] = x
            assigned.add(e)
    for v, target in zip(vertex_win.vertices, eta):
        par = parent(tree, v)
        kids = children(tree, v)
        total = 0
        if par is not None:
            pe = Edge(v, par)
            if pe not in assigned:
                raise AssertionError("parent edge not assigned before its child vertex")  # pragma: no cover
            total += vals[idx[pe]]
        free = None
        for w in kids:
            e = Edge(v, w)
            if e in assigned:
                total += vals[idx[e]]
            elif free is None:
                free = e
            else:
                assigned.add(e)
        if free is None:
            if total != target:
                raise WindowMismatch(f"no free edge left at {v}")
        else:
            vals[idx[free]] = target - total
            assigned.add(free)
    return CochainVector(ew, EDGES, vals)


def solve_sigma(tree: Tree, eta: CochainVector) -> CochainVector:
    """The canonical preimage of eta under Sigma_n.

    Vertices are visited in BFS order; at each one the first child edge takes
    whatever is needed to reach eta(v) and the other child edges are 0.
    """
    if eta.domain != VERTICES:
        raise WindowMismatch("solve_sigma expects a vertex cochain")
    return _route(tree, eta.window, eta.values)


def extend_current(tree: Tree, phi: CochainVector) -> CochainVector:
    """Extend a current on E_{n+1} to one on E_{n+2} (first-child routing at the new layer)."""
    if phi.domain != EDGES:
        raise WindowMismatch("extend_current expects an edge cochain")
    ew = phi.window
    vw = tree.window(ew.kind, ew.n)
    preset = dict(zip(ew.edges, phi.values))
    return _route(tree, vw, [0] * len(vw.vertices), preset)


def restrict(phi: CochainVector, target: SubtreeWindow) -> CochainVector:
    try:
        return CochainVector(target, phi.domain, [phi[x] for x in target.items(phi.domain)])
    except KeyError as exc:
        raise WindowMismatch("target window is not contained in the source window") from exc


# ---------------------------------------------------------------------------
# harmonicity and the arrow/edge isomorphism


def is_harmonic(tree: Tree, phi: CochainVector) -> bool:
    if phi.domain == EDGES:
        return sigma(tree, phi).is_zero()
    if phi.domain != ARROWS:
        raise WindowMismatch("harmonicity is defined for edge or arrow cochains")
    win = phi.window
    idx = win.arrow_index
    for a, x in zip(win.arrows, phi.values):
        j = idx.get(a.reverse())
        if j is not None and phi.values[j] != -x:
            return False
    for v in win.vertices:
        if sum(phi.values[idx[Arrow(v, w)]] for w in tree.neighbors(v)):
            return False
    return True


def even_end(tree: Tree, e: Edge) -> tuple[VertexLabel, VertexLabel]:
    """(v+, v-) for the edge e."""
    u, w = e.u, e.w
    return (u, w) if tree.parity(u) == 0 else (w, u)


def arrows_to_edges(tree: Tree, phi: CochainVector) -> CochainVector:
    """A_{<=n} currents to E_{n+1} currents: e -> phi(v+, v-) if v+ in V_n else -phi(v-, v+)."""
    if phi.domain != ARROWS:
        raise WindowMismatch("expected an arrow cochain")
    vw = phi.window
    ew = edge_window(tree, vw)
    aidx = vw.arrow_index
    out = []
    for e in ew.edges:
        vp, vm = even_end(tree, e)
        if vp in vw.vertex_index:
            out.append(phi.values[aidx[Arrow(vp, vm)]])
        else:
            out.append(-phi.values[aidx[Arrow(vm, vp)]])
    return CochainVector(ew, EDGES, out)


def edges_to_arrows(tree: Tree, psi: CochainVector) -> CochainVector:
    """Inverse of :func:`arrows_to_edges`: (v, w) -> +-psi({v, w}) by the parity of v."""
    if psi.domain != EDGES:
        raise WindowMismatch("expected an edge cochain")
    vw = vertex_window(tree, psi.window)
    eidx = psi.window.edge_index
    out = []
    for a in vw.arrows:
        x = psi.values[eidx[a.edge]]
        out.append(x if tree.parity(a.source) == 0 else -x)
    return CochainVector(vw, ARROWS, out)


# ---------------------------------------------------------------------------
# group actions


def act_cochain(tree: Tree, g: GroupElement, phi: CochainVector, target: SubtreeWindow | None = None) -> CochainVector:
    """(g.phi)(x) = phi(g^-1 x) for x in the target window."""
    target = target or phi.window
    move = _mover(tree, g.inverse().m)
    idx = phi.window.index(phi.domain)
    out = []
    for x in target.items(phi.domain):
        i = idx.get(move(x))
        if i is None:
            raise WindowEscape(f"g^-1 moves {x} outside the source window")
        out.append(phi.values[i])
    return CochainVector(target, phi.domain, out)


def s_twisted_act(tree: Tree, phi: CochainVector, target: SubtreeWindow | None = None) -> CochainVector:
    """(s.phi)(x) = -phi(s^-1 x)."""
    return -act_cochain(tree, s_matrix(tree.field), phi, target)


def _mover(tree: Tree, m):
    """Memoised action of one matrix, computing each vertex image once."""
    cache: dict[VertexLabel, VertexLabel] = {}

    def vert(v):
        w = cache.get(v)
        if w is None:
            w = cache[v] = tree.act(m, v)
        return w

    def move(x):
        if isinstance(x, VertexLabel):
            return vert(x)
        if isinstance(x, Edge):
            return Edge(vert(x.u), vert(x.w))
        if isinstance(x, Arrow):
            return Arrow(vert(x.source), vert(x.target))
        return tree.act(m, x)

    return move


def permutation(tree: Tree, g: GroupElement, window: SubtreeWindow, domain: str) -> list[int]:
    """Index map i -> index of g.x_i; raises WindowEscape if the window is not g-stable."""
    idx = window.index(domain)
    move = _mover(tree, g.m)
    out = []
    for x in window.items(domain):
        j = idx.get(move(x))
        if j is None:
            raise WindowEscape(f"g moves {x} outside the window")
        out.append(j)
    return out


# ---------------------------------------------------------------------------
# orbits


def apartment_representatives(tree: Tree, tag: str, window: SubtreeWindow, domain: str) -> list:
    """Representatives v_i / e_i in the order used for invariant bases."""
    n = window.n
    if tag == MAX_COMPACT:
        if window.kind != TN:
            raise WindowMismatch("MaxCompact orbits are taken on T_n windows")
        if domain == VERTICES:
            return [tree.v(i) for i in range(n + 1)]
        return [tree.e(i) for i in range(n)]
    if tag == IWAHORI:
        if window.kind != TN_PRIME:
            raise WindowMismatch("Iwahori orbits are taken on T'_n windows")
        if domain == VERTICES:
            return [tree.v(i) for i in range(-n, n + 2)]
        return [tree.e(i) for i in range(-n, n + 1)]
    raise ValueError(f"no orbit convention for {tag!r}")


@dataclass
class OrbitBasis:
    tag: str
    level: int
    window: SubtreeWindow
    domain: str
    representatives: list
    orbits: list[list[int]]
    vectors: list[CochainVector] = field(repr=False)

    @property
    def sizes(self) -> list[int]:
        return [len(o) for o in self.orbits]

    def orbit_of(self, x) -> int:
        i = self.window.index(self.domain)[x]
        for k, orb in enumerate(self.orbits):
            if i in orb:
                return k
        raise KeyError(x)  # pragma: no cover

    def coordinates(self, phi: CochainVector) -> list[int]:
        """Coefficients of an invariant cochain in the characteristic vectors."""
        out = []
        for orb in self.orbits:
            vals = {phi.values[i] for i in orb}
            if len(vals) != 1:
                raise ValueError("cochain is not constant on orbits")
            out.append(vals.pop())
        return out

    def combine(self, coeffs: Sequence[int]) -> CochainVector:
        vals = [0] * len(self.window.items(self.domain))
        for c, orb in zip(coeffs, self.orbits):
            for i in orb:
                vals[i] = c
        return CochainVector(self.window, self.domain, vals)


def orbit_invariants(tree: Tree, tag: str, window: SubtreeWindow, domain: str = VERTICES, level: int | None = None) -> OrbitBasis:
    """Orbits of G_0 (on T_n) or I (on T'_n) via union-find under certified generators."""
    level = level if level is not None else window.n + 2
    gens = generators(tree.field, tag, level)
    items = window.items(domain)
    par = list(range(len(items)))

    def find(i):
        while par[i] != i:
            par[i] = par[par[i]]
            i = par[i]
        return i

    for g in gens:
        for i, j in enumerate(permutation(tree, g, window, domain)):
            a, b = find(i), find(j)
            if a != b:
                par[max(a, b)] = min(a, b)
    classes: dict[int, list[int]] = {}
    for i in range(len(items)):
        classes.setdefault(find(i), []).append(i)
    reps = apartment_representatives(tree, tag, window, domain)
    idx = window.index(domain)
    orbits = []
    for r in reps:
        orbits.append(classes.pop(find(idx[r])))
    if classes:
        raise AssertionError("orbit without an apartment representative")
    vectors = [CochainVector(window, domain, [int(i in set(orb)) for i in range(len(items))]) for orb in orbits]
    return OrbitBasis(tag, level, window, domain, reps, orbits, vectors)


def windows_for(tree: Tree, tag: str, n: int) -> tuple[SubtreeWindow, SubtreeWindow]:
    kind = TN if tag == MAX_COMPACT else TN_PRIME
    return tree.window(kind, n), tree.window(kind, n + 1)


def sigma_matrix_on_invariants(tree: Tree, tag: str, n: int) -> IntMatrix:
    """Sigma on orbit characteristic vectors: rows vertex orbits, columns edge orbits."""
    vw, ew = windows_for(tree, tag, n)
    vb = orbit_invariants(tree, tag, vw, VERTICES)
    eb = orbit_invariants(tree, tag, ew, EDGES, level=n + 2)
    cols = [vb.coordinates(sigma(tree, vec, vw)) for vec in eb.vectors]
    return IntMatrix.from_columns(cols, len(vb.orbits))


# ---------------------------------------------------------------------------
# the module of currents F(E_{n+1}) in coordinates


class CurrentModule:
    """F(E_{n+1}, Z) = Ker(Sigma_n) with an explicit Z-basis.

    The free coordinates are all edges except the first child edge of each
    vertex of V_n; a current is determined by its values there.
    """

    def __init__(self, tree: Tree, vertex_win: SubtreeWindow):
        self.tree = tree
        self.vertex_window = vertex_win
        self.edge_window = edge_window(tree, vertex_win)
        idx = self.edge_window.edge_index
        pivots = set()
        for v in vertex_win.vertices:
            pivots.add(idx[Edge(v, children(tree, v)[0])])
        self.free = [i for i in range(len(self.edge_window.edges)) if i not in pivots]
        self.rank = len(self.free)
        self.basis = [self.from_coords([int(k == j) for k in range(self.rank)]) for j in range(self.rank)]

    def from_coords(self, coords: Sequence[int]) -> CochainVector:
        ew = self.edge_window
        preset = {ew.edges[i]: c for i, c in zip(self.free, coords)}
        return _route(self.tree, self.vertex_window, [0] * len(self.vertex_window.vertices), preset)

    def coords(self, phi: CochainVector) -> list[int]:
        return [phi.values[i] for i in self.free]

    def action_matrix(self, g: GroupElement) -> IntMatrix:
        """Matrix of g on the basis; column j holds the coordinates of g.b_j."""
        perm = permutation(self.tree, g, self.edge_window, EDGES)
        # (g.phi)(x_{perm[i]}) = phi(x_i)
        cols = []
        for b in self.basis:
            moved = [0] * len(b.values)
            for i, x in enumerate(b.values):
                moved[perm[i]] = x
            cols.append([moved[i] for i in self.free])
        return IntMatrix.from_columns(cols, self.rank)

    def s_action_matrix(self) -> IntMatrix:
        s = s_matrix(self.tree.field)
        M = self.action_matrix(s)
        return IntMatrix([[-x for x in r] for r in M.rows], self.rank)
