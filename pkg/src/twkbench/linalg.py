"""Modular linear algebra on numpy integer arrays.

Two families live here:

* dense Gaussian elimination over ``F_p`` (rank, RREF, kernels, solving),
  with an incremental row-space builder that pushes the heavy reductions
  through float64 BLAS while staying exact;
* Smith normal form over ``Z/p^k`` together with the solve/kernel/size
  helpers that sit on top of it.
"""

from __future__ import annotations

import numpy as np

_EXACT_FLOAT = 2 ** 52


def _as_mod(a, p: int) -> np.ndarray:
    return np.asarray(a, dtype=np.int64) % p


def rref_mod_p(a, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over ``F_p``; returns (nonzero rows, pivots)."""
    m = _as_mod(a, p).copy()
    if m.ndim != 2:
        raise ValueError("expected a 2-d array")
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = (m[r] * inv) % p
        col = m[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            m[rows] = (m[rows] - np.outer(col[rows], m[r])) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank_mod_p(a, p: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if a.shape[0] > 4 * max(a.shape[1], 1) or a.shape[0] > 2048:
        rs = RowSpace(a.shape[1], p)
        rs.add(a)
        return rs.rank
    return len(rref_mod_p(a, p)[1])


def nullspace_mod_p(a, p: int) -> np.ndarray:
    """Rows spanning ``{x : a @ x = 0}`` over ``F_p``."""
    a = np.asarray(a)
    ncols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    if a.shape[0] > 2048:
        rs = RowSpace(ncols, p)
        rs.add(a)
        r, piv = rs.basis, rs.pivots
    else:
        r, piv = rref_mod_p(a, p)
    return _kernel_from_rref(r, piv, ncols, p)


def _kernel_from_rref(r, piv, ncols, p):
    free = [c for c in range(ncols) if c not in set(piv)]
    out = np.zeros((len(free), ncols), dtype=np.int64)
    for i, f in enumerate(free):
        out[i, f] = 1
        if len(piv):
            out[i, piv] = (-r[:, f]) % p
    return out


def solve_mod_p(a, b, p: int) -> np.ndarray | None:
    """One solution ``x`` of ``a @ x = b`` (b a vector), or None."""
    a = _as_mod(a, p)
    b = _as_mod(b, p).reshape(-1, 1)
    aug = np.hstack([a, b])
    r, piv = rref_mod_p(aug, p)
    n = a.shape[1]
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, n]
    return x


def in_span_mod_p(rows, v, p: int) -> bool:
    rows = np.asarray(rows)
    if rows.size == 0:
        return not np.any(_as_mod(v, p))
    return rank_mod_p(np.vstack([rows, np.asarray(v).reshape(1, -1)]), p) == rank_mod_p(rows, p)


def complement_projection(sub_rows, n: int, p: int) -> np.ndarray:
    """Matrix ``Q`` (rows) whose kernel is the span of ``sub_rows``.

    ``Q @ x`` gives coordinates of ``x`` in the quotient ``F_p^n / span``.
    """
    sub_rows = np.asarray(sub_rows, dtype=np.int64).reshape(-1, n)
    if sub_rows.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    # Quotient coordinates: the annihilator of the subspace, i.e. kernel of sub^T.
    return nullspace_mod_p(sub_rows, p)


class RowSpace:
    """Incrementally maintained RREF basis of a row space over ``F_p``.

    New rows are reduced against the basis with one float64 matrix product
    per chunk; exactness needs ``ncols * p^2 < 2^52``, checked on entry.
    """

    def __init__(self, ncols: int, p: int, chunk: int = 2048):
        self.ncols = ncols
        self.p = p
        self.chunk = chunk
        self.basis = np.zeros((0, ncols), dtype=np.int64)
        self.pivots: list[int] = []
        if ncols * p * p >= _EXACT_FLOAT:
            raise ValueError("row space too wide for exact float reduction")

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _reduce(self, rows: np.ndarray) -> np.ndarray:
        if not self.pivots:
            return rows % self.p
        coeff = rows[:, self.pivots].astype(np.float64)
        prod = coeff @ self.basis.astype(np.float64)
        return (rows - np.mod(prod, self.p).astype(np.int64)) % self.p

    def add(self, rows) -> None:
        rows = _as_mod(rows, self.p)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        for start in range(0, rows.shape[0], self.chunk):
            part = self._reduce(rows[start:start + self.chunk])
            part = part[np.any(part, axis=1)]
            if part.size == 0:
                continue
            new, newpiv = rref_mod_p(part, self.p)
            if not newpiv:
                continue
            # clear new pivot columns from the old basis, then merge
            if self.pivots:
                coeff = self.basis[:, newpiv].astype(np.float64)
                prod = coeff @ new.astype(np.float64)
                self.basis = (self.basis - np.mod(prod, self.p).astype(np.int64)) % self.p
            allrows = np.vstack([self.basis, new])
            allpiv = self.pivots + newpiv
            order = np.argsort(allpiv)
            self.basis = allrows[order]
            self.pivots = [allpiv[i] for i in order]
            if self.rank == self.ncols:
                return

    def contains(self, v) -> bool:
        v = _as_mod(v, self.p).reshape(1, -1)
        return not np.any(self._reduce(v))

    def reduce(self, rows) -> np.ndarray:
        rows = _as_mod(rows, self.p)
        if rows.ndim == 1:
            return self._reduce(rows.reshape(1, -1))[0]
        return self._reduce(rows)

    def kernel(self) -> np.ndarray:
        return _kernel_from_rref(self.basis, self.pivots, self.ncols, self.p)


def sparse_to_dense(entries, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=np.int64)
    for (i, j), v in entries.items():
        out[i, j] = v
    return out


# ---------------------------------------------------------------------------
# Z/p^k
# ---------------------------------------------------------------------------

def vp_array(a: np.ndarray, p: int, k: int) -> np.ndarray:
    """Elementwise p-adic valuation in ``Z/p^k`` (zero gets ``k``)."""
    a = np.asarray(a, dtype=np.int64) % (p ** k)
    v = np.zeros(a.shape, dtype=np.int64)
    cur = a.copy()
    zero = cur == 0
    for _ in range(k):
        mask = (cur % p == 0) & ~zero
        v[mask] += 1
        cur[mask] //= p
    v[zero] = k
    return v


def smith_mod_pk(a, p: int, k: int, transforms: bool = True):
    """Smith normal form over ``Z/p^k``: ``U @ a @ V = D``.

    Returns ``(U, diag_valuations, V)`` where the diagonal of ``D`` is
    ``p^v`` for the listed ``v < k`` (zeros omitted).  ``U`` and ``V`` are
    invertible over ``Z/p^k``.
    """
    n = p ** k
    m = np.asarray(a, dtype=np.int64) % n
    rows, cols = m.shape
    U = np.eye(rows, dtype=np.int64) if transforms else None
    V = np.eye(cols, dtype=np.int64) if transforms else None
    vals: list[int] = []
    t = 0
    while t < min(rows, cols):
        sub = m[t:, t:]
        if not np.any(sub):
            break
        vv = vp_array(sub, p, k)
        i, j = np.unravel_index(np.argmin(vv), vv.shape)
        v = int(vv[i, j])
        i += t
        j += t
        if i != t:
            m[[t, i]] = m[[i, t]]
            if transforms:
                U[[t, i]] = U[[i, t]]
        if j != t:
            m[:, [t, j]] = m[:, [j, t]]
            if transforms:
                V[:, [t, j]] = V[:, [j, t]]
        pv = p ** v
        unit = (int(m[t, t]) // pv) % n
        uinv = pow(unit, -1, n)
        m[t] = (m[t] * uinv) % n
        if transforms:
            U[t] = (U[t] * uinv) % n
        # rows below: entries divisible by p^v
        col = m[t + 1:, t]
        nzr = np.nonzero(col)[0]
        if nzr.size:
            f = (col[nzr] // pv) % n
            m[t + 1 + nzr] = (m[t + 1 + nzr] - np.outer(f, m[t])) % n
            if transforms:
                U[t + 1 + nzr] = (U[t + 1 + nzr] - np.outer(f, U[t])) % n
        row = m[t, t + 1:]
        nzc = np.nonzero(row)[0]
        if nzc.size:
            f = (row[nzc] // pv) % n
            m[:, t + 1 + nzc] = (m[:, t + 1 + nzc] - np.outer(m[:, t], f)) % n
            if transforms:
                V[:, t + 1 + nzc] = (V[:, t + 1 + nzc] - np.outer(V[:, t], f)) % n
        vals.append(v)
        t += 1
    return U, vals, V


def span_size_log_mod_pk(a, p: int, k: int) -> int:
    """log_p of the size of the row span (= column span) of ``a`` in ``(Z/p^k)^*``."""
    a = np.asarray(a)
    if a.size == 0:
        return 0
    _, vals, _ = smith_mod_pk(a, p, k, transforms=False)
    return sum(k - v for v in vals)


def solve_mod_pk(a, b, p: int, k: int) -> np.ndarray | None:
    """One solution ``x`` of ``a @ x = b`` over ``Z/p^k`` or None."""
    n = p ** k
    a = np.asarray(a, dtype=np.int64) % n
    b = np.asarray(b, dtype=np.int64).reshape(-1) % n
    U, vals, V = smith_mod_pk(a, p, k)
    c = (U @ b) % n
    y = np.zeros(a.shape[1], dtype=np.int64)
    for i, v in enumerate(vals):
        pv = p ** v
        if c[i] % pv:
            return None
        y[i] = (c[i] // pv) % n
    if np.any(c[len(vals):]):
        return None
    return (V @ y) % n


def kernel_mod_pk(a, p: int, k: int) -> np.ndarray:
    """Rows generating ``{x : a @ x = 0}`` as a ``Z/p^k``-module."""
    n = p ** k
    a = np.asarray(a, dtype=np.int64) % n
    cols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    _, vals, V = smith_mod_pk(a, p, k)
    gens = []
    for i in range(cols):
        if i < len(vals):
            if vals[i] == 0:
                continue
            gens.append((V[:, i] * p ** (k - vals[i])) % n)
        else:
            gens.append(V[:, i] % n)
    if not gens:
        return np.zeros((0, cols), dtype=np.int64)
    return np.array(gens, dtype=np.int64)


def matmul_mod(a, b, n: int) -> np.ndarray:
    """Exact modular matrix product, falling back to object dtype if needed."""
    a = np.asarray(a, dtype=np.int64) % n
    b = np.asarray(b, dtype=np.int64) % n
    inner = a.shape[-1]
    if inner * (n - 1) ** 2 < 2 ** 62:
        return (a @ b) % n
    return ((a.astype(object) @ b.astype(object)) % n).astype(np.int64)
