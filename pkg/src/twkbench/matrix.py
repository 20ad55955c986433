"""Dense immutable matrices over a :class:`~twkbench.rings.CoeffRing`."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .rings import CoeffRing, Elt, IntegerMod, RingError


class Matrix:
    """Rectangular matrix with entries in a single ring.

    >>> from twkbench.rings import prime_field
    >>> F = prime_field(5)
    >>> g = Matrix.from_rows(F, [[1, 1], [0, 1]])
    >>> (g ** 5) == Matrix.identity(F, 2)
    True
    """

    __slots__ = ("ring", "rows", "ncols", "_hash")

    def __init__(self, ring: CoeffRing, rows: Sequence[Sequence[Elt]], ncols: int | None = None):
        self.ring = ring
        self.rows = tuple(tuple(r) for r in rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        self.ncols = ncols
        for r in self.rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        self._hash = None

    # -- construction -----------------------------------------------------
    @classmethod
    def from_rows(cls, ring: CoeffRing, rows: Iterable[Iterable]) -> "Matrix":
        rows = [[ring(x) for x in r] for r in rows]
        return cls(ring, rows)

    @classmethod
    def zeros(cls, ring: CoeffRing, n: int, m: int | None = None) -> "Matrix":
        m = n if m is None else m
        z = ring.zero
        return cls(ring, [[z] * m for _ in range(n)], m)

    @classmethod
    def identity(cls, ring: CoeffRing, n: int) -> "Matrix":
        z, o = ring.zero, ring.one
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def diag(cls, ring: CoeffRing, entries: Sequence) -> "Matrix":
        n = len(entries)
        z = ring.zero
        return cls(ring, [[ring(entries[i]) if i == j else z for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_numpy(cls, ring: CoeffRing, arr) -> "Matrix":
        arr = np.asarray(arr)
        return cls(ring, [[ring(int(x)) for x in row] for row in arr], arr.shape[1])

    def identity_like(self) -> "Matrix":
        return Matrix.identity(self.ring, self.nrows)

    # -- shape ------------------------------------------------------------
    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def col(self, j: int) -> list[Elt]:
        return [r[j] for r in self.rows]

    def entries(self) -> list[Elt]:
        return [x for r in self.rows for x in r]

    # -- arithmetic -------------------------------------------------------
    def _check_same(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix(self.ring, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix(self.ring, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self) -> "Matrix":
        return Matrix(self.ring, [[-a for a in r] for r in self.rows], self.ncols)

    def scale(self, c) -> "Matrix":
        c = self.ring(c)
        return Matrix(self.ring, [[c * a for a in r] for r in self.rows], self.ncols)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
            cols = list(zip(*other.rows)) if other.rows else []
            z = self.ring.zero
            out = []
            for r in self.rows:
                row = []
                for c in cols:
                    acc = z
                    for a, b in zip(r, c):
                        acc = acc + a * b
                    row.append(acc)
                out.append(row)
            return Matrix(self.ring, out, other.ncols)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, e: int) -> "Matrix":
        if not self.is_square():
            raise ValueError("power of a non-square matrix")
        if e < 0:
            return self.inverse() ** (-e)
        result = self.identity_like()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(a == b for r, s in zip(self.rows, other.rows)
                                                 for a, b in zip(r, s))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, tuple(hash(x) for x in self.entries())))
        return self._hash

    def __repr__(self):
        body = "; ".join(", ".join(repr(x) for x in r) for r in self.rows)
        return f"Matrix[{self.ring}]([{body}])"

    @property
    def T(self) -> "Matrix":
        return Matrix(self.ring, list(zip(*self.rows)) if self.rows else [], self.nrows)

    def map(self, f, ring: CoeffRing | None = None) -> "Matrix":
        ring = ring or self.ring
        return Matrix(ring, [[f(x) for x in r] for r in self.rows], self.ncols)

    def change_ring(self, ring: CoeffRing) -> "Matrix":
        return self.map(ring, ring)

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.entries())

    def trace(self) -> Elt:
        acc = self.ring.zero
        for i in range(self.nrows):
            acc = acc + self.rows[i][i]
        return acc

    def commutes_with(self, other: "Matrix") -> bool:
        return self * other == other * self

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        return Matrix(self.ring, [r[c0:c1] for r in self.rows[r0:r1]], c1 - c0)

    @staticmethod
    def block_diag(ring: CoeffRing, blocks: Sequence["Matrix"]) -> "Matrix":
        n = sum(b.nrows for b in blocks)
        m = sum(b.ncols for b in blocks)
        z = ring.zero
        rows = [[z] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.nrows):
                for j in range(b.ncols):
                    rows[r0 + i][c0 + j] = b.rows[i][j]
            r0 += b.nrows
            c0 += b.ncols
        return Matrix(ring, rows, m)

    def kron(self, other: "Matrix") -> "Matrix":
        rows = []
        for r in self.rows:
            for s in other.rows:
                rows.append([a * b for a in r for b in s])
        return Matrix(self.ring, rows, self.ncols * other.ncols)

    def hstack(self, other: "Matrix") -> "Matrix":
        return Matrix(self.ring, [r + s for r, s in zip(self.rows, other.rows)], self.ncols + other.ncols)

    def vstack(self, other: "Matrix") -> "Matrix":
        return Matrix(self.ring, self.rows + other.rows, self.ncols)

    def to_numpy(self) -> np.ndarray:
        if not isinstance(self.ring, IntegerMod):
            raise RingError("numpy export needs a Z/n ring")
        return np.array([[x.v for x in r] for r in self.rows], dtype=np.int64).reshape(self.shape)

    def flatten_coords(self) -> list[Elt]:
        return self.entries()

    # -- determinants and inverses ---------------------------------------
    def charpoly(self) -> list[Elt]:
        """Characteristic polynomial det(x - A), low degree first (Berkowitz; division free)."""
        if not self.is_square():
            raise ValueError("charpoly of a non-square matrix")
        n = self.nrows
        R = self.ring
        if n == 0:
            return [R.one]
        a = self.rows
        # Berkowitz: iteratively build the column vector of coefficients.
        vect = [R.one, -a[0][0]]  # high degree first
        for k in range(1, n):
            # A_k is the leading (k+1)x(k+1) block; split as [[A, C],[Rr, a_kk]]
            Rrow = [a[k][j] for j in range(k)]
            Ccol = [a[i][k] for i in range(k)]
            akk = a[k][k]
            # Toeplitz first column: 1, -akk, -R C, -R A C, ...
            col = [R.one, -akk]
            vec = Ccol
            for _ in range(k):
                s = R.zero
                for x, y in zip(Rrow, vec):
                    s = s + x * y
                col.append(-s)
                vec = [sum((a[i][j] * vec[j] for j in range(k)), R.zero) for i in range(k)]
            # multiply the (k+2)x(k+1) Toeplitz matrix by vect
            new = []
            for i in range(k + 2):
                s = R.zero
                for j in range(k + 1):
                    if 0 <= i - j < len(col):
                        s = s + col[i - j] * vect[j]
                new.append(s)
            vect = new
        return list(reversed(vect))

    def det(self) -> Elt:
        if not self.is_square():
            raise ValueError("det of a non-square matrix")
        n = self.nrows
        if n == 0:
            return self.ring.one
        if self.ring.is_field:
            return self._det_gauss()
        c0 = self.charpoly()[0]
        return c0 if n % 2 == 0 else -c0

    def _det_gauss(self) -> Elt:
        a = [list(r) for r in self.rows]
        n = len(a)
        det = self.ring.one
        for c in range(n):
            piv = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
            if piv is None:
                return self.ring.zero
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            det = det * a[c][c]
            inv = a[c][c].inverse()
            for r in range(c + 1, n):
                if not a[r][c].is_zero():
                    f = a[r][c] * inv
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return det

    def is_invertible(self) -> bool:
        return self.is_square() and self.det().is_unit()

    def inverse(self) -> "Matrix":
        """Gauss-Jordan with unit pivots (valid over fields and local rings)."""
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        R = self.ring
        a = [list(r) + [R.one if i == j else R.zero for j in range(n)] for i, r in enumerate(self.rows)]
        for c in range(n):
            piv = next((r for r in range(c, n) if a[r][c].is_unit()), None)
            if piv is None:
                raise RingError("matrix is not invertible")
            a[c], a[piv] = a[piv], a[c]
            inv = a[c][c].inverse()
            a[c] = [x * inv for x in a[c]]
            for r in range(n):
                if r != c and not a[r][c].is_zero():
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return Matrix(R, [row[n:] for row in a], n)

    def rank_over_field(self) -> int:
        return len(self.rref()[1])

    def rref(self) -> tuple["Matrix", list[int]]:
        """Reduced row echelon form over a field."""
        a = [list(r) for r in self.rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            piv = next((i for i in range(r, len(a)) if not a[i][c].is_zero()), None)
            if piv is None:
                continue
            a[r], a[piv] = a[piv], a[r]
            inv = a[r][c].inverse()
            a[r] = [x * inv for x in a[r]]
            for i in range(len(a)):
                if i != r and not a[i][c].is_zero():
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            pivots.append(c)
            r += 1
            if r == len(a):
                break
        return Matrix(self.ring, a, self.ncols), pivots

    def nullspace(self) -> list["Matrix"]:
        """Column vectors spanning the right kernel (over a field)."""
        R, pivots = self.rref()
        free = [c for c in range(self.ncols) if c not in pivots]
        basis = []
        for f in free:
            v = [self.ring.zero] * self.ncols
            v[f] = self.ring.one
            for i, pc in enumerate(pivots):
                v[pc] = -R.rows[i][f]
            basis.append(Matrix(self.ring, [[x] for x in v], 1))
        return basis

    def solve_right(self, b: "Matrix") -> "Matrix | None":
        """One solution of self * x = b over a field, or None."""
        aug = self.hstack(b)
        R, pivots = aug.rref()
        if any(p >= self.ncols for p in pivots):
            return None
        x = [[self.ring.zero] * b.ncols for _ in range(self.ncols)]
        for i, pc in enumerate(pivots):
            for j in range(b.ncols):
                x[pc][j] = R.rows[i][self.ncols + j]
        return Matrix(self.ring, x, b.ncols)


def column(ring: CoeffRing, values: Sequence) -> Matrix:
    return Matrix(ring, [[ring(v)] for v in values], 1)
