"""Enumerated finite groups.

Elements are found by breadth-first search from the generators, so every
group carries a spanning tree of its right Cayley graph.  The identity is
always element 0.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Sequence

import numpy as np

from .matrix import Matrix
from .rings import IntegerMod

DEFAULT_CAP = 20_000
TABLE_LIMIT = 3_000


class GroupError(ValueError):
    """Raised when closure exceeds the cap or a generator is not invertible."""


class FiniteGroup:
    """A finite group given by enumerated elements and a multiplication rule.

    ``mul`` multiplies two element keys.  ``rgen[x, k]`` is the index of
    ``x * gens[k]``; ``parent[x] = (y, k)`` records the BFS tree edge with
    ``x = y * gens[k]``.
    """

    def __init__(self, elements: list, mul: Callable, gens: Sequence[int], rgen: np.ndarray,
                 parent: list, name: str = "G"):
        self.elements = elements
        self.mul_keys = mul
        self.gens = list(gens)
        self.rgen = rgen
        self.parent = parent
        self.name = name
        self.index = {e: i for i, e in enumerate(elements)}
        self._table = None
        self._inv = None
        self._orders = None

    def __len__(self):
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order}, gens={len(self.gens)})"

    def mul(self, i: int, j: int) -> int:
        if self._table is not None:
            return int(self._table[i, j])
        return self.index[self.mul_keys(self.elements[i], self.elements[j])]

    @property
    def table(self) -> np.ndarray:
        """Full multiplication table (built on demand for small groups)."""
        if self._table is None:
            n = self.order
            if n > TABLE_LIMIT:
                raise GroupError(f"group of order {n} is too large for a full table")
            t = np.empty((n, n), dtype=np.int32)
            # right multiplication by words along the BFS tree: x*g = (x*y)*s
            t[:, 0] = np.arange(n)
            for g in range(1, n):
                y, k = self.parent[g]
                t[:, g] = self.rgen[t[:, y], k]
            self._table = t
        return self._table

    @property
    def inverse(self) -> np.ndarray:
        if self._inv is None:
            n = self.order
            inv = np.empty(n, dtype=np.int64)
            if n <= TABLE_LIMIT:
                t = self.table
                rows, cols = np.nonzero(t == 0)
                inv[rows] = cols
            else:
                for i in range(n):
                    inv[i] = self._inverse_by_power(i)
            self._inv = inv
        return self._inv

    def _inverse_by_power(self, i: int) -> int:
        prev, cur = 0, i
        while cur != 0:
            prev = cur
            cur = self.mul(cur, i)
        return prev

    def element_order(self, i: int) -> int:
        k, cur = 1, i
        while cur != 0:
            cur = self.mul(cur, i)
            k += 1
        return k

    def power(self, i: int, e: int) -> int:
        e %= self.element_order(i)
        out = 0
        for _ in range(e):
            out = self.mul(out, i)
        return out

    def word(self, i: int) -> list[int]:
        """Generator indices ``k1..kr`` with ``element i = g_k1 * ... * g_kr``."""
        out = []
        while i != 0:
            i, k = self.parent[i]
            out.append(k)
        return out[::-1]

    def cyclic_subgroup(self, i: int) -> list[int]:
        out, cur = [0], i
        while cur != 0:
            out.append(cur)
            cur = self.mul(cur, i)
        return out

    def subgroup(self, gen_indices: Sequence[int], name: str | None = None) -> "Subgroup":
        return Subgroup.generated(self, gen_indices, name)

    def is_abelian(self) -> bool:
        return all(self.mul(a, b) == self.mul(b, a) for a in self.gens for b in self.gens)

    def edges(self):
        """Right Cayley graph edges (x, k, x*g_k) not in the BFS tree."""
        n, kk = self.rgen.shape
        for x in range(n):
            for k in range(kk):
                y = int(self.rgen[x, k])
                if self.parent[y] != (x, k):
                    yield x, k, y


def _bfs(gens_keys: list, identity, mul, cap: int, name: str) -> FiniteGroup:
    elements = [identity]
    index = {identity: 0}
    parent: list = [None]
    rows: list[list[int]] = []
    queue = deque([0])
    while queue:
        x = queue.popleft()
        row = []
        for k, g in enumerate(gens_keys):
            y = mul(elements[x], g)
            j = index.get(y)
            if j is None:
                j = len(elements)
                if j >= cap:
                    raise GroupError(f"group closure exceeds the cap of {cap} elements")
                index[y] = j
                elements.append(y)
                parent.append((x, k))
                queue.append(j)
            row.append(j)
        rows.append(row)
    rgen = np.array(rows, dtype=np.int64).reshape(len(elements), len(gens_keys))
    gens = [index[g] for g in gens_keys]
    return FiniteGroup(elements, mul, gens, rgen, parent, name)


def group_from_function(gens: list, identity, mul: Callable, cap: int = DEFAULT_CAP,
                        name: str = "G") -> FiniteGroup:
    """Close ``gens`` under a user-supplied multiplication on hashable keys."""
    return _bfs(list(gens), identity, mul, cap, name)


def _matrix_key(m: Matrix):
    return tuple(x.v for x in m.entries())


def generate_group(gens: Sequence[Matrix], cap: int = DEFAULT_CAP, name: str = "G") -> FiniteGroup:
    """Enumerate the matrix group generated by ``gens``.

    >>> from twkbench.rings import prime_field
    >>> F = prime_field(5)
    >>> generate_group([Matrix.from_rows(F, [[1, 1], [0, 1]])]).order
    5
    """
    if not gens:
        raise GroupError("need at least one generator")
    R = gens[0].ring
    n = gens[0].nrows
    if not R.is_finite:
        raise GroupError("generators must live over a finite ring")
    for g in gens:
        if not g.is_invertible():
            raise GroupError(f"generator {g} is not invertible")
    if isinstance(R, IntegerMod):
        mod = R.n

        def mul(a, b):
            A = np.array(a, dtype=np.int64).reshape(n, n)
            B = np.array(b, dtype=np.int64).reshape(n, n)
            return tuple(int(x) for x in ((A @ B) % mod).ravel())

        keys = [tuple(x.v for x in g.entries()) for g in gens]
        ident = tuple(1 if i == j else 0 for i in range(n) for j in range(n))
        G = _bfs(keys, ident, mul, cap, name)
        G.matrix_ring = R
        G.matrix_size = n
        return G

    # keys are Matrix objects themselves (hashable)
    G = _bfs(list(gens), Matrix.identity(R, n), lambda a, b: a * b, cap, name)
    G.matrix_ring = R
    G.matrix_size = n
    return G


def _unkey(R, n, key):
    return Matrix(R, [[R(key[i * n + j]) for j in range(n)] for i in range(n)], n)


def element_matrix(G: FiniteGroup, i: int) -> Matrix:
    """Matrix realisation of element ``i`` of a group from :func:`generate_group`."""
    e = G.elements[i]
    if isinstance(e, Matrix):
        return e
    return _unkey(G.matrix_ring, G.matrix_size, e)


def element_arrays(G: FiniteGroup) -> np.ndarray:
    """All elements of a ``Z/n`` matrix group as an ``(order, n, n)`` array."""
    n = G.matrix_size
    return np.array(G.elements, dtype=np.int64).reshape(G.order, n, n)


class Subgroup:
    """A subgroup ``H`` of ``G`` recorded as its own group plus the inclusion."""

    def __init__(self, ambient: FiniteGroup, group: FiniteGroup, inclusion: np.ndarray):
        self.ambient = ambient
        self.group = group
        self.inclusion = inclusion  # H index -> G index

    @classmethod
    def generated(cls, G: FiniteGroup, gen_indices: Sequence[int], name: str | None = None) -> "Subgroup":
        gen_indices = [int(g) for g in gen_indices] or [0]
        H = _bfs(list(gen_indices), 0, G.mul, G.order + 1, name or f"<{gen_indices}> in {G.name}")
        inc = np.array(H.elements, dtype=np.int64)
        return cls(G, H, inc)

    @property
    def order(self) -> int:
        return self.group.order

    def __repr__(self):
        return f"Subgroup(order={self.order} in {self.ambient.name})"


def gl_generators(p: int) -> list[Matrix]:
    """Two generators of ``GL_2(F_p)``."""
    from .rings import prime_field, primitive_root

    F = prime_field(p)
    g = primitive_root(p)
    return [Matrix.from_rows(F, [[g, 0], [0, 1]]), Matrix.from_rows(F, [[-1, 1], [-1, 0]])]


def direct_product(G: FiniteGroup, H: FiniteGroup, cap: int = DEFAULT_CAP) -> FiniteGroup:
    gens = [(g, 0) for g in G.gens] + [(0, h) for h in H.gens]
    return group_from_function(gens, (0, 0), lambda a, b: (G.mul(a[0], b[0]), H.mul(a[1], b[1])), cap,
                               f"{G.name}x{H.name}")


def cyclic_group(n: int) -> FiniteGroup:
    return group_from_function([1 % n], 0, lambda a, b: (a + b) % n, name=f"Z/{n}")
