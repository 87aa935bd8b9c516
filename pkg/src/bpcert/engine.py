"""Parallel sum-product message passing in the log domain.

Messages live on directed factor-to-variable edges as log vectors; two
message sets are equivalent when they differ per edge by a constant shift,
so residuals are measured in the shift-invariant seminorm
``0.5 * (max - min)`` per edge.  The binary pairwise specialization uses the
scalar parameterization ``tanh(nu) = mu(+1) - mu(-1)`` per directed pair.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .factor_graph import ModelError, check_zero_support


class MessageUnderflowError(RuntimeError):
    """An updated message vector lost all mass (every entry -inf)."""


def _logsumexp(a, axis=None):
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - shift), axis=axis, keepdims=True)) + shift
    if axis is None:
        return float(out.item())
    return np.squeeze(out, axis=axis)


class _Structure:
    """Per-graph index arrays shared by all updates on one FactorGraph."""

    def __init__(self, fg):
        self.edges = fg.message_edges()
        self.edge_index = {key: e for e, key in enumerate(self.edges)}
        with np.errstate(divide="ignore"):
            self.log_tables = {}
            for f_idx, f in enumerate(fg.factors):
                if len(f.scope) >= 2:
                    self.log_tables[f_idx] = np.log(f.table)
        self.evidence = [np.zeros(c) for c in fg.cardinalities]
        for f in fg.factors:
            if len(f.scope) == 1:
                with np.errstate(divide="ignore"):
                    self.evidence[f.scope[0]] = self.evidence[f.scope[0]] + np.log(f.table)


def _structure(fg):
    st = getattr(fg, "_bp_structure", None)
    if st is None:
        st = _Structure(fg)
        fg._bp_structure = st
    return st


def init_messages(fg, mode="uniform", seed=None):
    """Fresh log-message set: all zeros, or i.i.d. uniform [-1, 1] entries
    from a seeded generator."""
    st = _structure(fg)
    if mode == "uniform":
        return [np.zeros(fg.cardinalities[v]) for (_, v) in st.edges]
    if mode == "random":
        rng = np.random.default_rng(seed)
        return [rng.uniform(-1.0, 1.0, fg.cardinalities[v]) for (_, v) in st.edges]
    raise ValueError(f"unknown init mode {mode!r}")


def _prefix_sums(fg, msgs):
    st = _structure(fg)
    sums = [ev.copy() for ev in st.evidence]
    for e, (_, v) in enumerate(st.edges):
        sums[v] += msgs[e]
    return sums


def update_parallel(fg, msgs):
    """One synchronous sweep: every outgoing message is recomputed from the
    same input snapshot and normalized so its exponential sums to one."""
    st = _structure(fg)
    sums = _prefix_sums(fg, msgs)
    out = []
    for e, (f_idx, v) in enumerate(st.edges):
        scope = fg.factors[f_idx].scope
        pos = scope.index(v)
        acc = st.log_tables[f_idx]
        for p2, v2 in enumerate(scope):
            if p2 == pos:
                continue
            # -inf minus -inf can only arise on graphs violating the
            # zero-support hypothesis; the NaN surfaces as an underflow error
            with np.errstate(invalid="ignore"):
                cavity = sums[v2] - msgs[st.edge_index[(f_idx, v2)]]
            shape = [1] * acc.ndim
            shape[p2] = cavity.size
            acc = acc + cavity.reshape(shape)
        moved = np.moveaxis(acc, pos, 0).reshape(acc.shape[pos], -1)
        vec = _logsumexp(moved, axis=1)
        z = _logsumexp(vec)
        if not np.isfinite(z):
            raise MessageUnderflowError(
                f"message from factor {f_idx} to variable {v} lost all mass"
            )
        out.append(vec - z)
    return out


def local_seminorm(vec):
    """Shift-invariant size of one log-message: half its spread."""
    return 0.5 * (float(np.max(vec)) - float(np.min(vec)))


def quotient_residual(new_msgs, old_msgs):
    """Largest per-edge shift-invariant distance between two message sets."""
    if not new_msgs:
        return 0.0
    return max(local_seminorm(n - o) for n, o in zip(new_msgs, old_msgs))


def quotient_equal(msgs_a, msgs_b, tol=1e-9):
    return quotient_residual(msgs_a, msgs_b) <= tol


@dataclass
class BPResult:
    """Outcome of an inference run."""

    converged: bool
    iterations: int
    residual: float
    messages: object
    single_beliefs: list = field(default_factory=list)
    factor_beliefs: list = field(default_factory=list)

    def to_dict(self):
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "single_beliefs": {str(v): list(map(float, b))
                               for v, b in enumerate(self.single_beliefs)},
            "factor_beliefs": {str(f): list(map(float, np.ravel(b)))
                               for f, b in enumerate(self.factor_beliefs)},
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _softmax(logv):
    p = np.exp(logv - np.max(logv))
    return p / p.sum()


def beliefs(fg, msgs):
    """Normalized single-variable and factor beliefs from a message set."""
    st = _structure(fg)
    sums = _prefix_sums(fg, msgs)
    singles = [_softmax(sums[v]) for v in range(fg.num_vars)]
    factor_b = []
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) == 1:
            factor_b.append(singles[f.scope[0]].copy())
            continue
        acc = st.log_tables[f_idx]
        for p2, v2 in enumerate(f.scope):
            cavity = sums[v2] - msgs[st.edge_index[(f_idx, v2)]]
            shape = [1] * acc.ndim
            shape[p2] = cavity.size
            acc = acc + cavity.reshape(shape)
        p = np.exp(acc - np.max(acc))
        factor_b.append(p / p.sum())
    return singles, factor_b


def run(fg, max_iters=10000, tol=1e-9, init="uniform", seed=None):
    """Iterate parallel updates until the quotient residual drops below
    ``tol`` or ``max_iters`` sweeps have run.  Non-convergence is reported
    in the result, not raised."""
    report = check_zero_support(fg)
    if not report.ok:
        raise ModelError(f"zero-support check failed: {report.failures[:3]}")
    msgs = init_messages(fg, init, seed)
    if not msgs:
        singles, factor_b = beliefs(fg, msgs)
        return BPResult(True, 0, 0.0, msgs, singles, factor_b)
    converged = False
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        new = update_parallel(fg, msgs)
        residual = quotient_residual(new, msgs)
        msgs = new
        if residual < tol:
            converged = True
            break
    singles, factor_b = beliefs(fg, msgs)
    return BPResult(converged, iterations, float(residual), msgs, singles, factor_b)


# ---------------------------------------------------------------------------
# binary pairwise specialization

_TANH_CLIP = 1.0 - 1e-15


def _in_matrix(model):
    m = getattr(model, "_in_matrix_cache", None)
    if m is None:
        m = np.zeros((model.num_edges, model.num_vars))
        m[np.arange(model.num_edges), model.edge_dst] = 1.0
        model._in_matrix_cache = m
    return m


def _cavity_fields(model, nu):
    """theta_src + sum of incoming messages at the source, excluding the
    reverse run of the same bond.  Works on (..., E) stacks."""
    nu = np.asarray(nu, dtype=float)
    in_sum = nu @ _in_matrix(model)
    rev = nu[..., np.arange(model.num_edges) ^ 1]
    return model.fields[model.edge_src] + in_sum[..., model.edge_src] - rev


def update_parallel_binary(model, nu):
    """One synchronous sweep of the scalar recursion
    ``nu' = atanh(tanh(J) * tanh(cavity))``; satisfies |nu'| <= |J|."""
    h = _cavity_fields(model, nu)
    t = np.tanh(model.edge_coupling) * np.tanh(h)
    return np.arctanh(np.clip(t, -_TANH_CLIP, _TANH_CLIP))


def init_messages_binary(model, mode="uniform", seed=None, shape=()):
    if mode == "uniform":
        return np.zeros(shape + (model.num_edges,))
    if mode == "random":
        rng = np.random.default_rng(seed)
        return rng.uniform(-1.0, 1.0, shape + (model.num_edges,))
    raise ValueError(f"unknown init mode {mode!r}")


def beliefs_binary(model, nu):
    """Per-variable belief vectors (index 0 is spin +1)."""
    t = np.tanh(nu)
    with np.errstate(divide="ignore"):
        log_up = np.log((1.0 + t) / 2.0)
        log_dn = np.log((1.0 - t) / 2.0)
    out = np.zeros((model.num_vars, 2))
    out[:, 0] = model.fields
    out[:, 1] = -model.fields
    np.add.at(out[:, 0], model.edge_dst, log_up)
    np.add.at(out[:, 1], model.edge_dst, log_dn)
    return np.array([_softmax(row) for row in out])


def pair_beliefs_binary(model, nu):
    """Per-bond 2x2 belief tables (axis order: bond's (i, j))."""
    t = np.tanh(nu)
    with np.errstate(divide="ignore"):
        log_half = np.stack([np.log((1.0 + t) / 2.0), np.log((1.0 - t) / 2.0)])
    incoming = np.zeros((model.num_vars, 2))
    incoming[:, 0] = model.fields
    incoming[:, 1] = -model.fields
    np.add.at(incoming[:, 0], model.edge_dst, log_half[0])
    np.add.at(incoming[:, 1], model.edge_dst, log_half[1])
    tables = []
    for b, (i, j, coupling) in enumerate(model.bonds):
        to_i = incoming[i] - log_half[:, 2 * b + 1]
        to_j = incoming[j] - log_half[:, 2 * b]
        spin = np.array([1.0, -1.0])
        logt = coupling * np.outer(spin, spin) + to_i[:, None] + to_j[None, :]
        p = np.exp(logt - logt.max())
        tables.append(p / p.sum())
    return tables


def run_binary(model, max_iters=10000, tol=1e-9, init="uniform", seed=None,
               nu0=None):
    """Binary analogue of :func:`run`; residual is the largest |delta nu|."""
    nu = np.asarray(nu0, dtype=float) if nu0 is not None \
        else init_messages_binary(model, init, seed)
    if model.num_edges == 0:
        return BPResult(True, 0, 0.0, nu,
                        list(beliefs_binary(model, nu)), [])
    converged = False
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        new = update_parallel_binary(model, nu)
        residual = float(np.max(np.abs(new - nu)))
        nu = new
        if residual < tol:
            converged = True
            break
    return BPResult(converged, iterations, residual, nu,
                    list(beliefs_binary(model, nu)),
                    pair_beliefs_binary(model, nu))


def jacobian_binary(model, nu):
    """Exact derivative of one synchronous binary sweep at ``nu``.

    Entry (e, e') is ``tanh|J_e| * B_e`` when edge e' feeds edge e (same
    bond runs excluded) and zero otherwise, where B_e is the cavity-field
    gain factor bounded by 1 in magnitude.
    """
    nu = np.asarray(nu, dtype=float)
    h = _cavity_fields(model, nu)
    t = np.tanh(model.edge_coupling) * np.tanh(h)
    nu_new = np.arctanh(np.clip(t, -_TANH_CLIP, _TANH_CLIP))
    gain = (1.0 - np.tanh(h) ** 2) / (1.0 - np.tanh(nu_new) ** 2) \
        * np.sign(model.edge_coupling)
    amp = np.tanh(np.abs(model.edge_coupling))
    n_edges = model.num_edges
    jac = np.zeros((n_edges, n_edges))
    rev = np.arange(n_edges) ^ 1
    for e in range(n_edges):
        feeders = model.in_edges[model.edge_src[e]]
        feeders = feeders[feeders != rev[e]]
        jac[e, feeders] = amp[e] * gain[e]
    return jac
