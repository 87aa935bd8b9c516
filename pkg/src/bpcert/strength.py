"""Scalar strength measures for factor tables.

All measures quantify how strongly a factor couples two of its variables;
they feed the bound matrices and the rival convergence conditions.  The
primary measure ``potential_strength`` is computed in a square-root quotient
form that stays well defined when tables contain zeros.
"""

import math
import warnings

import numpy as np

from .factor_graph import Factor, ModelError


def _axis_pair(factor, i, j):
    if i == j:
        raise ModelError("strength needs two distinct variables")
    try:
        return factor.scope.index(i), factor.scope.index(j)
    except ValueError:
        raise ModelError(f"variables ({i},{j}) not both in scope {factor.scope}") from None


def table_strength(table, axis_i, axis_j, max_states=1 << 20):
    """Coupling strength of a table between two of its axes.

    Equals the supremum over state pairs (alpha, alpha') of axis_i,
    (beta, beta') of axis_j and completions (gamma, gamma') of

        (sqrt(p(a,b,g) p(a',b',g')) - sqrt(p(a',b,g) p(a,b',g')))
        / (sqrt(p(a,b,g) p(a',b',g')) + sqrt(p(a',b,g) p(a,b',g')))

    which for strictly positive tables is tanh of a quarter of the largest
    log cross-ratio.  Always in [0, 1]; 0 means the two axes decouple.
    """
    arr = np.asarray(table, dtype=float)
    if arr.size > max_states:
        raise ModelError(f"table with {arr.size} states exceeds cap {max_states}")
    a = arr.shape[axis_i]
    b = arr.shape[axis_j]
    if a < 2 or b < 2:
        return 0.0
    arr = np.moveaxis(arr, (axis_i, axis_j), (0, 1)).reshape(a, b, -1)
    off_diag = ~np.eye(b, dtype=bool)
    best = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_arr = np.log(arr)
    for alpha in range(a):
        for alpha2 in range(a):
            if alpha == alpha2:
                continue
            with np.errstate(invalid="ignore"):
                s = log_arr[alpha] - log_arr[alpha2]  # (b, g); NaN at 0/0 slots
            finite = np.isfinite(s)
            has_fin = finite.any(axis=1)
            pos_inf = np.isposinf(s).any(axis=1)
            neg_inf = np.isneginf(s).any(axis=1)
            # a +inf slot pairs validly with any finite or -inf slot (and
            # symmetrically); +inf against +inf is a 0/0 term and is skipped
            blow_up = (pos_inf[:, None] & (has_fin | neg_inf)[None, :]) | \
                      ((has_fin | pos_inf)[:, None] & neg_inf[None, :])
            if np.any(blow_up & off_diag):
                return 1.0
            hi = np.where(has_fin, np.where(finite, s, -np.inf).max(axis=1), -np.inf)
            lo = np.where(has_fin, np.where(finite, s, np.inf).min(axis=1), np.inf)
            gap = (hi[:, None] - lo[None, :])[off_diag]
            gap = gap[np.isfinite(gap)]
            if gap.size:
                best = max(best, math.tanh(0.25 * float(gap.max())))
    return min(best, 1.0)


def potential_strength(factor, i, j, max_states=1 << 20):
    """Strength of ``factor`` between scope variables ``i`` and ``j``."""
    if not isinstance(factor, Factor):
        factor = Factor(range(np.ndim(factor)), factor)
        i, j = int(i), int(j)
    pos_i, pos_j = _axis_pair(factor, i, j)
    return table_strength(factor.table, pos_i, pos_j, max_states=max_states)


def ihler_strength(table):
    """Dynamic-range strength of a positive pair table:
    tanh of half the largest log ratio between any two entries.
    Never smaller than ``potential_strength`` of the same table."""
    arr = np.asarray(table, dtype=float).reshape(-1)
    if np.any(arr <= 0):
        raise ModelError("dynamic-range strength needs a strictly positive table")
    return math.tanh(0.5 * (math.log(arr.max()) - math.log(arr.min())))


def simon_strength(table):
    """Half the largest log ratio between any two entries of a pair table.

    Returns +inf for tables containing zeros, which makes the surrounding
    condition fail, rather than raising.
    """
    arr = np.asarray(table, dtype=float).reshape(-1)
    if np.any(arr <= 0):
        return math.inf
    return 0.5 * (math.log(arr.max()) - math.log(arr.min()))


def heskes_omega(table, max_pairs=1 << 24):
    """Supremum over joint-state pairs (x, x') of

        log p(x) + (k-1) log p(x') - sum_i log p(x' with slot i from x)

    for a k-variable table; nonnegative, zero for uniform or single-variable
    tables.  Zeros are handled as log 0 = -inf; 0/0 contributions are skipped.
    """
    arr = np.asarray(table, dtype=float)
    n = arr.size
    if n * n > max_pairs:
        raise ModelError(f"{n * n} state pairs exceed cap {max_pairs}")
    k = arr.ndim
    with np.errstate(divide="ignore"):
        logp = np.log(arr).ravel()
    if k <= 1:
        return 0.0
    strides = np.empty(k, dtype=int)
    acc = 1
    for axis in range(k - 1, -1, -1):
        strides[axis] = acc
        acc *= arr.shape[axis]
    idx = np.arange(n)
    digits = [(idx // strides[axis]) % arr.shape[axis] for axis in range(k)]
    with np.errstate(invalid="ignore"):
        total = logp[:, None] + (k - 1) * logp[None, :]
        for axis in range(k):
            mixed = idx[None, :] + (digits[axis][:, None] - digits[axis][None, :]) * strides[axis]
            total = total - logp[mixed]
    total = np.where(np.isnan(total), -np.inf, total)
    return float(total.max())


def heskes_sigma(table, max_pairs=1 << 24):
    """Strength ``1 - exp(-omega)`` in [0, 1]; 1 signals an unbounded
    omega from zero entries (outside the positive-table theory)."""
    omega = heskes_omega(table, max_pairs=max_pairs)
    if math.isinf(omega):
        warnings.warn("factor with zeros: strength saturates at 1",
                      RuntimeWarning, stacklevel=2)
        return 1.0
    return -math.expm1(-omega)


def _gain(psi, h):
    """Total-variation response of the normalized mixture ``h``:
    sum_rows |sum_cols h * (psi/Psi - 1)| with Psi = <psi, h>."""
    z = float((psi * h).sum())
    return float(np.abs((h * (psi / z - 1.0)).sum(axis=1)).sum())


def _golden_max(fun, lo=0.0, hi=1.0, iters=64):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = fun(d)
    return max(fc, fd)


def mixture_gain_supremum(psi, iters=64):
    """Supremum of the mixture response, brute force versus closed form.

    ``psi`` is a strictly positive matrix whose rows index the summed
    blocks.  The brute-force side restricts to mixtures with exactly two
    nonzero weights (the extremal set) and line-searches each pair's mixing
    weight; the closed form is twice the tanh of a quarter of the largest
    cross-row log ratio.  Returns (bruteforce, closedform).
    """
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2:
        raise ModelError("need a 2-D matrix")
    if np.any(psi <= 0):
        raise ModelError("need strictly positive entries")
    rows, cols = psi.shape
    if rows < 2:
        return 0.0, 0.0
    log_psi = np.log(psi)
    hi = log_psi.max(axis=1)
    lo = log_psi.min(axis=1)
    gap = (hi[:, None] - lo[None, :])[~np.eye(rows, dtype=bool)].max()
    closed = 2.0 * math.tanh(0.25 * float(gap))

    brute = 0.0
    cells = [(r, c) for r in range(rows) for c in range(cols)]
    for a in range(len(cells)):
        ra, ca = cells[a]
        for b in range(a + 1, len(cells)):
            rb, cb = cells[b]
            if ra == rb:
                continue  # equal-row pairs cancel to zero

            def seg(t, _a=(ra, ca), _b=(rb, cb)):
                h = np.zeros_like(psi)
                h[_a] = t
                h[_b] = 1.0 - t
                return _gain(psi, h)

            brute = max(brute, _golden_max(seg, iters=iters))
    return brute, closed
