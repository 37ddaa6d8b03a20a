"""The Bruhat-Tits tree of PGL2(F): vertices, edges, arrows, ends and finite windows.

A vertex is the homothety class of an O-lattice in F^2.  Its canonical label
``(a, c, b)`` stands for the lattice spanned by the columns of
``[[pi^a, b], [0, pi^c]]`` with ``b`` taken mod ``pi^a`` and
``min(a, c, v(b)) = 0``.  ``v_i`` is the class of ``O + pi^i O``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from btlab import mat2
from btlab.localfield import PLUS_INFINITY, Field, Scalar
from btlab.mat2 import SingularMatrix

TN = "Tn"
TN_PRIME = "TnPrime"


@dataclass(frozen=True, order=True)
class VertexLabel:
    a: int
    c: int
    b: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.b) != self.a:
            raise ValueError("b must have exactly a digits")

    def __str__(self):
        if not self.a:
            return f"({self.a},{self.c})"
        return f"({self.a},{self.c};{'.'.join(map(str, self.b))})"

    @property
    def dist0(self) -> int:
        """Distance to v_0."""
        return self.a + self.c

    def b_valuation(self):
        for i, d in enumerate(self.b):
            if d:
                return i
        return PLUS_INFINITY


@dataclass(frozen=True, order=True)
class Edge:
    u: VertexLabel
    w: VertexLabel

    def __post_init__(self):
        if self.w < self.u:
            u, w = self.w, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "w", w)

    def __str__(self):
        return f"{{{self.u},{self.w}}}"

    @property
    def ends(self) -> tuple[VertexLabel, VertexLabel]:
        return (self.u, self.w)


@dataclass(frozen=True, order=True)
class Arrow:
    source: VertexLabel
    target: VertexLabel

    def __str__(self):
        return f"{self.source}->{self.target}"

    def reverse(self) -> "Arrow":
        return Arrow(self.target, self.source)

    @property
    def edge(self) -> Edge:
        return Edge(self.source, self.target)


class End:
    """An F-rational end of the tree, i.e. a point ``[x : y]`` of P^1(F).

    Normalised so the coordinate of smaller valuation equals 1 (ties go to ``x``).
    """

    __slots__ = ("x", "y")

    def __init__(self, fld: Field, x, y):
        x, y = fld.coerce(x), fld.coerce(y)
        if not x and not y:
            raise ValueError("[0 : 0] is not a projective point")
        if fld.valuation(x) <= fld.valuation(y):
            self.x, self.y = fld.one, y / x
        else:
            self.x, self.y = x / y, fld.one

    def __eq__(self, other):
        return isinstance(other, End) and self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        return f"End[{self.x!r}:{self.y!r}]"

    def to_str(self, fld: Field) -> str:
        return f"[{fld.to_str(self.x)}:{fld.to_str(self.y)}]"


class Tree:
    """The tree attached to one local field, with cached adjacency."""

    def __init__(self, fld: Field):
        self.field = fld
        self.q = fld.q
        self._neighbors: dict[VertexLabel, tuple[VertexLabel, ...]] = {}
        self._windows: dict[tuple[str, int], SubtreeWindow] = {}
        pi = fld.uniformizer
        self.s = (fld.zero, fld.one, pi, fld.zero)

    # labels and lattices --------------------------------------------------

    def v(self, i: int) -> VertexLabel:
        """The standard apartment vertex v_i = [O + pi^i O]."""
        if i >= 0:
            return VertexLabel(0, i)
        return VertexLabel(-i, 0, (0,) * (-i))

    def e(self, i: int) -> Edge:
        return Edge(self.v(i), self.v(i + 1))

    def lattice_matrix(self, v: VertexLabel):
        fld = self.field
        return (fld.pi_power(v.a), fld.lift_digits(v.b), fld.zero, fld.pi_power(v.c))

    def canonical_vertex(self, M) -> VertexLabel:
        """Label of the homothety class of the lattice spanned by the columns of ``M``.

        Column Hermite reduction over O gives ``[[x, y], [0, z]]`` with ``z`` the
        row-2 entry of least valuation.  After dividing by the content, ``c = v(z)``,
        ``a = v(det) - c`` and ``b = pi^c y / z mod pi^a``.
        """
        fld = self.field
        m11, m12, m21, m22 = mat2.entries(M)
        dt = mat2.det((m11, m12, m21, m22))
        if not dt:
            raise SingularMatrix("lattice matrix is singular")
        val = fld.valuation
        k = min(val(m11), val(m12), val(m21), val(m22))
        if val(m21) < val(m22):
            m11, m12, m21, m22 = m12, m11, m22, m21
        c = val(m22) - k
        a = val(dt) - 2 * k - c
        if a == 0:
            return VertexLabel(0, c)
        if not m12:
            return VertexLabel(a, c, (0,) * a)
        return VertexLabel(a, c, fld.reduce_quotient(m12 * fld.pi_power(c), m22, a))

    def act(self, g, x):
        """Action of an invertible matrix on a vertex, edge, arrow or end."""
        m = mat2.entries(g)
        if isinstance(x, VertexLabel):
            return self.canonical_vertex(mat2.mul(m, self.lattice_matrix(x)))
        if isinstance(x, Edge):
            return Edge(self.act(m, x.u), self.act(m, x.w))
        if isinstance(x, Arrow):
            return Arrow(self.act(m, x.source), self.act(m, x.target))
        if isinstance(x, End):
            if not mat2.det(m):
                raise SingularMatrix("acting matrix is singular")
            return End(self.field, *mat2.apply(m, (x.x, x.y)))
        raise TypeError(f"cannot act on {x!r}")

    # adjacency ------------------------------------------------------------

    def neighbors(self, v: VertexLabel) -> tuple[VertexLabel, ...]:
        """The q+1 neighbours, ordered by the line in P^1(F_q): [1:0], [1:1], ..., [0:1]."""
        out = self._neighbors.get(v)
        if out is not None:
            return out
        fld = self.field
        m11, m12, m21, m22 = self.lattice_matrix(v)
        pi = fld.uniformizer
        res = []
        for y in range(self.q):
            yl = fld.from_residue(y)
            res.append(self.canonical_vertex((m11 + yl * m12, pi * m12, m21 + yl * m22, pi * m22)))
        res.append(self.canonical_vertex((pi * m11, m12, pi * m21, m22)))
        out = self._neighbors[v] = tuple(res)
        return out

    def neighbor_for_line(self, v: VertexLabel, line: tuple[int, int]) -> VertexLabel:
        x, y = line
        if x:
            return self.neighbors(v)[self.field.residue.mul(y, self.field.residue.inv(x))]
        return self.neighbors(v)[self.q]

    def distance(self, v: VertexLabel, w: VertexLabel) -> int:
        if v == w:
            return 0
        if v == self.v(0):
            return w.dist0
        if w == self.v(0):
            return v.dist0
        fld = self.field
        X = mat2.mul(mat2.inv(self.lattice_matrix(v)), self.lattice_matrix(w))
        return fld.valuation(mat2.det(X)) - 2 * min(fld.valuation(t) for t in X)

    def parity(self, v: VertexLabel) -> int:
        """0 for even vertices, 1 for odd ones."""
        return v.dist0 % 2

    def geodesic(self, v: VertexLabel, w: VertexLabel) -> list[VertexLabel]:
        path = [v]
        d = self.distance(v, w)
        while d:
            for u in self.neighbors(path[-1]):
                if self.distance(u, w) == d - 1:
                    path.append(u)
                    d -= 1
                    break
            else:  # pragma: no cover
                raise AssertionError("no neighbour closer to the target")
        return path

    # ends -----------------------------------------------------------------

    def end(self, x, y) -> End:
        return End(self.field, x, y)

    def end_line(self, v: VertexLabel, U: End) -> tuple[int, int]:
        """The line in (L/pi L) cut out by U, as a normalised P^1(F_q) point."""
        fld = self.field
        alpha, beta = mat2.apply(mat2.inv(self.lattice_matrix(v)), (U.x, U.y))
        va, vb = fld.valuation(alpha), fld.valuation(beta)
        scale = fld.pi_power(-min(va, vb))
        ra = fld.residue_of(alpha * scale) if va != PLUS_INFINITY else 0
        rb = fld.residue_of(beta * scale) if vb != PLUS_INFINITY else 0
        R = fld.residue
        if ra:
            return (1, R.mul(rb, R.inv(ra)))
        return (0, 1)

    def step_toward_end(self, v: VertexLabel, U: End) -> VertexLabel:
        """Next vertex on the ray from ``v`` to ``U``: the class of pi L + (L cap U)."""
        return self.neighbor_for_line(v, self.end_line(v, U))

    def ray(self, v: VertexLabel, U: End, length: int) -> list[VertexLabel]:
        out = [v]
        for _ in range(length):
            out.append(self.step_toward_end(out[-1], U))
        return out

    # windows --------------------------------------------------------------

    def window(self, kind: str, n: int) -> "SubtreeWindow":
        if n < 0:
            raise ValueError("window size must be nonnegative")
        kind = {"tn": TN, "tnprime": TN_PRIME, "tprime": TN_PRIME}.get(kind.lower(), kind)
        if kind not in (TN, TN_PRIME):
            raise ValueError(f"unknown window kind {kind!r}")
        key = (kind, n)
        w = self._windows.get(key)
        if w is None:
            w = self._windows[key] = self._build_window(kind, n)
        return w

    def _dist1(self, v: VertexLabel) -> int:
        """Distance to v_1."""
        if v.a == 0:
            return abs(v.c - 1)
        c = v.c - 1
        m = min(v.a, c, v.b_valuation())
        return v.a + c - 2 * m

    def _build_window(self, kind: str, n: int) -> "SubtreeWindow":
        if kind == TN:
            inside = lambda u: u.dist0 <= n
        else:
            inside = lambda u: u.dist0 <= n or self._dist1(u) <= n
        root = self.v(0)
        verts, edges = [root], []
        seen = {root}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in self.neighbors(u):
                if w not in seen and inside(w):
                    seen.add(w)
                    verts.append(w)
                    edges.append(Edge(u, w))
                    queue.append(w)
        arrows = [Arrow(u, w) for u in verts for w in self.neighbors(u)]
        return SubtreeWindow(kind, n, self.q, tuple(verts), tuple(edges), tuple(arrows))


@dataclass(frozen=True)
class SubtreeWindow:
    """Vertices, edges and outgoing arrows of T_n or T'_n in a fixed BFS order."""

    kind: str
    n: int
    q: int
    vertices: tuple[VertexLabel, ...]
    edges: tuple[Edge, ...]
    arrows: tuple[Arrow, ...]
    vertex_index: dict = field(init=False, repr=False, compare=False)
    edge_index: dict = field(init=False, repr=False, compare=False)
    arrow_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertex_index", {v: i for i, v in enumerate(self.vertices)})
        object.__setattr__(self, "edge_index", {e: i for i, e in enumerate(self.edges)})
        object.__setattr__(self, "arrow_index", {a: i for i, a in enumerate(self.arrows)})

    def items(self, domain: str) -> tuple:
        return {"vertices": self.vertices, "edges": self.edges, "arrows": self.arrows}[domain]

    def index(self, domain: str) -> dict:
        return {"vertices": self.vertex_index, "edges": self.edge_index, "arrows": self.arrow_index}[domain]

    def to_json(self) -> dict:
        vi = self.vertex_index
        return {
            "kind": self.kind,
            "n": self.n,
            "q": self.q,
            "vertices": [str(v) for v in self.vertices],
            "edges": [[vi[e.u], vi[e.w]] for e in self.edges],
        }

    def to_dot(self, edge_labels: Sequence[int] | None = None, name: str = "T") -> str:
        if edge_labels is not None and len(edge_labels) != len(self.edges):
            raise ValueError("need one label per edge")
        vi = self.vertex_index
        lines = [f"graph {name} {{"]
        for i, v in enumerate(self.vertices):
            lines.append(f'  n{i} [label="{v}"];')
        for j, e in enumerate(self.edges):
            attr = f' [label="{edge_labels[j]}"]' if edge_labels is not None else ""
            lines.append(f"  n{vi[e.u]} -- n{vi[e.w]}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def window_sizes(q: int, n: int) -> tuple[int, int]:
    """Closed-form |V_n| and |E_n|."""
    e = (q + 1) * (q**n - 1) // (q - 1)
    return e + 1, e
