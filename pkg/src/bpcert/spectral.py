"""Spectral radius of nonnegative matrices by shifted power iteration.

The matrix is first split into strongly connected components; on each
irreducible block a positive diagonal shift makes the iteration primitive,
and the min/max Rayleigh-style ratios bracket the Perron root at every step,
so the returned midpoint carries a certified error bound.  Acyclic patterns
contribute zero.  The shift changes nothing but convergence speed since for
nonnegative A the shifted radius is exactly the radius plus the shift.
"""

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundMatrix:
    """Nonnegative matrix over directed message edges.

    ``labels[k]`` identifies the edge of row/column ``k``; the dense array
    ``matrix`` holds the entries.
    """

    labels: tuple
    matrix: np.ndarray

    @property
    def dimension(self):
        return len(self.labels)

    def entries(self):
        """Iterate ((row_label, col_label), value) over nonzero entries."""
        rows, cols = np.nonzero(self.matrix)
        for r, c in zip(rows, cols):
            yield (self.labels[r], self.labels[c]), float(self.matrix[r, c])

    def l1_norm(self):
        return float(np.abs(self.matrix).sum(axis=0).max()) if self.dimension else 0.0

    def linfty_norm(self):
        return float(np.abs(self.matrix).sum(axis=1).max()) if self.dimension else 0.0


def strongly_connected_components(adjacency):
    """Tarjan's algorithm, iterative; ``adjacency[u]`` lists successors."""
    n = len(adjacency)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    components = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, ptr = work[-1]
            if ptr == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            descended = False
            succ = adjacency[node]
            for k in range(ptr, len(succ)):
                nxt = succ[k]
                if index[nxt] == -1:
                    work[-1] = (node, k + 1)
                    work.append((nxt, 0))
                    descended = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                components.append(comp)
    return components


def _power_block(block, tol, max_iters):
    """Bracket the Perron root of an irreducible nonnegative block."""
    n = block.shape[0]
    scale = float(block.sum(axis=1).max())
    shift = max(0.25 * tol, 0.25 * scale)
    v = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        w = block @ v
        ratios = w / v
        lo = float(ratios.min())
        hi = float(ratios.max())
        if hi - lo <= tol:
            return 0.5 * (lo + hi), True
        v = w + shift * v
        v /= v.sum()
    # iteration cap hit: degrade to the cheaper norm upper bound
    upper = min(float(block.sum(axis=0).max()), float(block.sum(axis=1).max()))
    return upper, False


def spectral_radius_info(matrix, tol=1e-9, max_iters=100000):
    """Spectral radius of a nonnegative matrix within ``tol``.

    Returns (value, certified).  ``certified`` is False only when some
    block hit the iteration cap, in which case the value degrades to the
    smaller of the two induced matrix norms of that block, an upper bound.
    """
    if isinstance(matrix, BoundMatrix):
        matrix = matrix.matrix
    mat = np.asarray(matrix, dtype=float)
    if mat.size == 0:
        return 0.0, True
    if np.any(mat < 0) or not np.all(np.isfinite(mat)):
        raise ValueError("matrix must be nonnegative and finite")
    n = mat.shape[0]
    adjacency = [list(np.nonzero(mat[u])[0]) for u in range(n)]
    best = 0.0
    certified = True
    for comp in strongly_connected_components(adjacency):
        if len(comp) == 1:
            u = comp[0]
            best = max(best, float(mat[u, u]))
            continue
        sub = mat[np.ix_(sorted(comp), sorted(comp))]
        value, ok = _power_block(sub, tol, max_iters)
        best = max(best, value)
        certified = certified and ok
    return best, certified


def spectral_radius(matrix, tol=1e-9, max_iters=100000):
    """Spectral radius as a float; warns when only an upper bound is
    available (iteration cap hit)."""
    value, certified = spectral_radius_info(matrix, tol=tol, max_iters=max_iters)
    if not certified:
        warnings.warn("power iteration hit the cap; returning an upper bound",
                      RuntimeWarning, stacklevel=2)
    return value
