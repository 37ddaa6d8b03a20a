"""Brute-force H^0 and H^1 of a finite group acting on Z^r.

The groups are the images of G_0 or of the Iwahori subgroup in GL2(O/pi^N) and
the modules are the currents F(E_{n+1}, Z) (resp. F(E'_{n+1}, Z)).  Since the
congruence subgroup G_N acts trivially on the relevant window, and continuous
homomorphisms from a profinite group to Z vanish, the cohomology of the finite
quotient agrees with the continuous cohomology of the compact group.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from btlab.bttree import TN, TN_PRIME, Tree
from btlab.cochains import EDGES, CochainVector, CurrentModule, permutation, sigma, solve_sigma
from btlab.groups import IWAHORI, MAX_COMPACT, FiniteQuotient, GroupElement, TooLarge, closure, quotient_enumerate
from btlab.intlin import (
    IntMatrix,
    QuotientStructure,
    class_order,
    cokernel_structure,
    kernel_basis,
    snf,
    solve_integer,
)

H1_GUARD = 5 * 10**7


def _matvec(M, v):
    return [sum(a * b for a, b in zip(row, v)) for row in M]


def _matmul(A, B):
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, c)) for c in cols] for row in A]


def _identity(r):
    return [[int(i == j) for j in range(r)] for i in range(r)]


@dataclass
class FiniteGroupAction:
    """A finite group (as a :class:`FiniteQuotient`) with one r x r integer matrix per element."""

    quotient: FiniteQuotient
    rank: int
    matrices: list[list[list[int]]]
    module: CurrentModule | None = None
    perms: list[list[int]] | None = field(default=None, repr=False)
    flags: dict = field(default_factory=dict)

    def check(self, seed: int = 0, samples: int = 200) -> dict:
        Q = self.quotient
        rng = random.Random(seed)
        ok_id = self.matrices[Q.identity] == _identity(self.rank)
        ok_hom = True
        for _ in range(samples):
            i, j = rng.randrange(len(Q)), rng.randrange(len(Q))
            if _matmul(self.matrices[i], self.matrices[j]) != self.matrices[Q.mul(i, j)]:
                ok_hom = False
                break
        self.flags = {"identity": ok_id, "homomorphism": ok_hom}
        return self.flags


def current_action(tree: Tree, tag: str, n: int, level: int | None = None, quotient: FiniteQuotient | None = None) -> FiniteGroupAction:
    """G_0 on F(E_{n+1}) (level n+1 by default) or I on F(E'_{n+1}) (level n+2)."""
    kind = TN if tag == MAX_COMPACT else TN_PRIME
    if level is None:
        level = n + 1 if tag == MAX_COMPACT else n + 2
    Q = quotient or quotient_enumerate(tree.field, tag, level)
    module = CurrentModule(tree, tree.window(kind, n))
    perms, mats = [], []
    for i in range(len(Q)):
        g = Q.lift(i)
        perm = permutation(tree, g, module.edge_window, EDGES)
        perms.append(perm)
        mats.append(_action_from_perm(module, perm))
    act = FiniteGroupAction(Q, module.rank, mats, module, perms)
    act.check()
    return act


def _action_from_perm(module: CurrentModule, perm: Sequence[int]) -> list[list[int]]:
    cols = []
    free = module.free
    for b in module.basis:
        moved = [0] * len(b.values)
        for i, x in enumerate(b.values):
            moved[perm[i]] = x
        cols.append([moved[i] for i in free])
    r = module.rank
    return [[cols[j][i] for j in range(r)] for i in range(r)]


def quotient_from_generators(tree: Tree, tag: str, gens: Sequence[GroupElement], level: int) -> FiniteQuotient:
    """The finite group generated by ``gens`` at the given level, in sorted order."""
    elements = sorted(closure(tree.field, gens, level))
    return FiniteQuotient(tree.field, tag, level, elements)


# ---------------------------------------------------------------------------


def h0(action: FiniteGroupAction) -> tuple[QuotientStructure, list[list[int]]]:
    """Invariants: kernel of the stacked (rho(g) - 1)."""
    r = action.rank
    rows = []
    for M in action.matrices:
        for i in range(r):
            rows.append([M[i][j] - (i == j) for j in range(r)])
    A = IntMatrix(rows, r)
    basis = kernel_basis(A)
    return QuotientStructure((), len(basis)), basis


class _Echelon:
    """Incrementally maintained integer row echelon form (same rational row space)."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, list[int]] = {}

    def insert(self, row: list[int]) -> None:
        row = list(row)
        while True:
            lead = next((i for i, x in enumerate(row) if x), None)
            if lead is None:
                return
            piv = self.rows.get(lead)
            if piv is None:
                self.rows[lead] = _primitive(row)
                return
            a, b = piv[lead], row[lead]
            if b % a == 0:
                k = b // a
                row = [x - k * y for x, y in zip(row, piv)]
            else:
                # replace the pivot by a gcd combination; keep the old pivot as a row to reinsert
                g, s, t = _xgcd(a, b)
                new = [s * y + t * x for x, y in zip(row, piv)]
                old = piv
                self.rows[lead] = _primitive(new)
                row = old

    def matrix(self) -> IntMatrix:
        return IntMatrix([self.rows[k] for k in sorted(self.rows)], self.ncols)


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    return a, x0, y0


def _primitive(row):
    from math import gcd

    g = 0
    for x in row:
        g = gcd(g, x)
    if g > 1:
        row = [x // g for x in row]
    lead = next(x for x in row if x)
    return row if lead > 0 else [-x for x in row]


def _cocycle_parametrisation(action: FiniteGroupAction):
    """Express every z(x) through the values at a few free elements.

    Returns (free elements, expressions, constraint echelon).  Expressions are r x (r*|free|)
    integer matrices E_x with z(x) = E_x u; the constraints collect
    E_{gh} - E_g - rho(g) E_h = 0 over *all* pairs (g, h).
    """
    Q = action.quotient
    mul = Q.mul_table()
    r = action.rank
    n = len(Q)
    mats = action.matrices
    expr: list[list[list[int]] | None] = [None] * n
    free: list[int] = []
    pending = []  # (g, h) pairs whose constraint must be recorded once columns are known

    def widen(E, total):
        return [row + [0] * (total - len(row)) for row in E]

    expressed: list[int] = []
    for x0 in range(n):
        if expr[x0] is not None:
            continue
        k = len(free)
        free.append(x0)
        width = r * len(free)
        for x in expressed:
            expr[x] = widen(expr[x], width)
        expr[x0] = [[0] * (r * k) + [int(i == j) for j in range(r)] for i in range(r)]
        expressed.append(x0)
        queue = [x0]
        while queue:
            x = queue.pop()
            for y in list(expressed):
                for g, h in ((x, y), (y, x)):
                    gh = mul[g][h]
                    if expr[gh] is None:
                        Eg, Eh = expr[g], expr[h]
                        rhoEh = _matmul(mats[g], Eh)
                        expr[gh] = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(Eg, rhoEh)]
                        expressed.append(gh)
                        queue.append(gh)
    width = r * len(free)
    for x in range(n):
        expr[x] = widen(expr[x], width)
    ech = _Echelon(width)
    for g in range(n):
        Eg = expr[g]
        rho = mats[g]
        row_g = mul[g]
        for h in range(n):
            Egh = expr[row_g[h]]
            rhoEh = _matmul(rho, expr[h])
            for i in range(r):
                ech.insert([a - b - c for a, b, c in zip(Egh[i], Eg[i], rhoEh[i])])
    return free, expr, ech


def h1(action: FiniteGroupAction) -> QuotientStructure:
    """Z^1 / B^1 with Z^1 cut out by every cocycle equation g z(h) - z(gh) + z(g) = 0."""
    n, r = len(action.quotient), action.rank
    if n * n * r > H1_GUARD:
        raise TooLarge(f"|Q|^2 r = {n * n * r} exceeds the guard {H1_GUARD}")
    free, expr, ech = _cocycle_parametrisation(action)
    width = r * len(free)
    C = ech.matrix() if ech.rows else IntMatrix([], width)
    K = kernel_basis(C) if ech.rows else [[int(i == j) for i in range(width)] for j in range(width)]
    if not K:
        return QuotientStructure((), 0)
    Kmat = IntMatrix.from_columns(K, width)
    SK = snf(Kmat)
    # coboundaries d0(m)(f) = rho(f) m - m at each free element f
    cols = []
    for j in range(r):
        b = []
        for f in free:
            M = action.matrices[f]
            b += [M[i][j] - (i == j) for i in range(r)]
        cols.append(solve_integer(Kmat, b, SK))
    Y = IntMatrix.from_columns(cols, len(K))
    return cokernel_structure(Y)


# ---------------------------------------------------------------------------


def coboundary_cocycle(action: FiniteGroupAction, m: Sequence[int]) -> list[list[int]]:
    return [[a - b for a, b in zip(_matvec(M, m), m)] for M in action.matrices]


def delta_cocycle(action: FiniteGroupAction, eta: CochainVector) -> list[list[int]]:
    """z(g) = g.phi - phi in module coordinates, phi the canonical Sigma-preimage of eta.

    ``eta`` must be invariant, otherwise g.phi - phi is not a current.
    """
    module = action.module
    phi = solve_sigma(module.tree, eta)
    out = []
    for perm in action.perms:
        moved = [0] * len(phi.values)
        for i, x in enumerate(phi.values):
            moved[perm[i]] = x
        diff = CochainVector(phi.window, EDGES, [a - b for a, b in zip(moved, phi.values)])
        if not sigma(module.tree, diff, module.vertex_window).is_zero():
            raise ValueError("eta is not invariant under the group")
        out.append(module.coords(diff))
    return out


def is_cocycle(action: FiniteGroupAction, z: Sequence[Sequence[int]], pair_budget: int = 100_000, seed: int = 0) -> bool:
    """d^1 z = 0 on all pairs, or on a seeded sample when there are too many."""
    Q = action.quotient
    n = len(Q)
    if n * n <= pair_budget:
        pairs = ((g, h) for g in range(n) for h in range(n))
    else:
        rng = random.Random(seed)
        pairs = ((rng.randrange(n), rng.randrange(n)) for _ in range(pair_budget // 10))
    for g, h in pairs:
        lhs = _matvec(action.matrices[g], z[h])
        gh = Q.mul(g, h)
        if [a - b + c for a, b, c in zip(lhs, z[gh], z[g])] != [0] * action.rank:
            return False
    return True


def class_order_in_h1(action: FiniteGroupAction, z: Sequence[Sequence[int]], check: bool = True):
    """Least k with k z a coboundary."""
    if check and not is_cocycle(action, z):
        raise ValueError("z is not a cocycle")
    r = action.rank
    rows, vec = [], []
    for M, zg in zip(action.matrices, z):
        for i in range(r):
            rows.append([M[i][j] - (i == j) for j in range(r)])
            vec.append(zg[i])
    return class_order(vec, IntMatrix(rows, r))
