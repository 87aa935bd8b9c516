"""Dense two-phase simplex, feasibility only.

Finds x >= 0 with A x <= b or reports infeasibility.  Rows with negative
right-hand sides get surplus plus artificial columns; phase one minimizes
the artificial sum with Bland's rule, which precludes cycling.  Small and
dense on purpose: the allocation programs this solves have tens of
variables.
"""

import numpy as np


class SimplexError(RuntimeError):
    """Internal failure: the anti-cycling pivot cap was exceeded."""


def feasible_point(a_ub, b_ub, tol=1e-9, max_pivots=None):
    """Search for x >= 0 with ``a_ub @ x <= b_ub``.

    Returns (feasible, x, infeasibility): when feasible, ``x`` satisfies the
    system within ``tol`` and infeasibility is ~0; otherwise ``x`` is None
    and infeasibility is the residual artificial mass.
    """
    a = np.asarray(a_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    if a.ndim != 2 or b.shape != (a.shape[0],):
        raise ValueError("need a 2-D system with matching right-hand side")
    m, n = a.shape
    if m == 0:
        return True, np.zeros(n), 0.0

    flip = b < 0
    a = np.where(flip[:, None], -a, a)
    b = np.where(flip, -b, b)
    # flipped rows read (-A)x >= -b and need surplus + artificial columns
    n_art = int(flip.sum())
    total = n + m + n_art
    tab = np.zeros((m, total + 1))
    tab[:, :n] = a
    tab[:, -1] = b
    basis = np.empty(m, dtype=int)
    art_cols = []
    k = 0
    for r in range(m):
        slack_col = n + r
        tab[r, slack_col] = -1.0 if flip[r] else 1.0
        if flip[r]:
            art_col = n + m + k
            tab[r, art_col] = 1.0
            basis[r] = art_col
            art_cols.append(art_col)
            k += 1
        else:
            basis[r] = slack_col

    if not art_cols:
        return True, np.zeros(n), 0.0

    # phase-one objective row: reduced costs of minimizing the artificial sum
    obj = tab[flip].sum(axis=0)
    art_set = set(art_cols)
    if max_pivots is None:
        max_pivots = 50 * (m + total) + 1000

    for _ in range(max_pivots):
        entering = -1
        for j in range(total):
            if j in art_set:
                continue
            if obj[j] > tol:
                entering = j
                break
        if entering < 0:
            break
        ratios = []
        col = tab[:, entering]
        for r in range(m):
            if col[r] > tol:
                ratios.append((tab[r, -1] / col[r], basis[r], r))
        if not ratios:
            # unbounded direction cannot occur in phase one; treat as stuck
            raise SimplexError("phase-one column without a pivot row")
        ratios.sort()
        _, _, leaving = ratios[0]
        pivot = tab[leaving, entering]
        tab[leaving] /= pivot
        for r in range(m):
            if r != leaving and tab[r, entering] != 0.0:
                tab[r] -= tab[r, entering] * tab[leaving]
        obj = obj - obj[entering] * tab[leaving]
        basis[leaving] = entering
    else:
        raise SimplexError("pivot cap exceeded")

    infeasibility = float(obj[-1])
    if infeasibility > tol:
        return False, None, infeasibility
    x = np.zeros(total)
    x[basis] = tab[:, -1]
    return True, x[:n], max(infeasibility, 0.0)
