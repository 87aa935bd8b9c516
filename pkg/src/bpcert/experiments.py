"""Model ensembles, parameter sweeps, critical radii, and win counts.

Reproduces the bound-comparison protocol at desk scale: uniform fully
connected models swept over a coupling/field plane, toroidal grids with
normal couplings probed along polar rays, and fully random ensembles
tallied into per-pair win tables.  Everything is deterministic given a
master seed; trial i draws from a counter-split seed sequence so it can be
regenerated in isolation.
"""

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .certificate import Certificate
from .certify_binary import (certify_improved, certify_spectral_binary,
                             l1_condition_binary, linfty_condition)
from .engine import (beliefs, beliefs_binary, init_messages, quotient_residual,
                     update_parallel, update_parallel_binary)
from .ising import BinaryPairwiseModel
from .rivals import dobrushin_condition, heskes_condition, simon_condition


class MonotonicityError(RuntimeError):
    """A bound's verdict was not monotone along the probed ray."""


# ---------------------------------------------------------------------------
# generators

def gen_uniform_model(n, coupling, field_value):
    """Fully connected binary model with one coupling and one field value."""
    bonds = [(i, j, float(coupling)) for i in range(n) for j in range(i + 1, n)]
    return BinaryPairwiseModel(n, bonds, np.full(n, float(field_value)))


def toroidal_bond_pairs(width, height):
    """Nearest-neighbor pairs on a width x height torus, rightward and
    downward from each site.  On 2-wide tori the wrap duplicates a pair;
    the duplicate is kept as a distinct parallel bond."""
    pairs = []
    for r in range(height):
        for c in range(width):
            site = r * width + c
            if width > 1:
                pairs.append((site, r * width + (c + 1) % width))
            if height > 1:
                pairs.append((site, ((r + 1) % height) * width + c))
    return pairs


def gen_toroidal_grid(width, height, j_mean, j_std, seed):
    """Torus with i.i.d. normal nearest-neighbor couplings and zero fields."""
    pairs = toroidal_bond_pairs(width, height)
    rng = np.random.default_rng(seed)
    draws = rng.normal(j_mean, abs(j_std), len(pairs))
    bonds = [(i, j, float(x)) for (i, j), x in zip(pairs, draws)]
    return BinaryPairwiseModel(width * height, bonds)


def _draw_fully_random(n, rng):
    """Two-level law: hyperparameters standard normal, then fields and all
    pairwise couplings normal with those parameters (negative drawn scales
    used by absolute value)."""
    j_mean, j_std, t_mean, t_std = rng.standard_normal(4)
    fields = rng.normal(t_mean, abs(t_std), n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    draws = rng.normal(j_mean, abs(j_std), len(pairs))
    bonds = [(i, j, float(x)) for (i, j), x in zip(pairs, draws)]
    model = BinaryPairwiseModel(n, bonds, fields)
    return model, (float(j_mean), float(j_std), float(t_mean), float(t_std))


def gen_fully_random(n, seed):
    """Fully connected binary model with two-level random parameters."""
    model, _ = _draw_fully_random(n, np.random.default_rng(seed))
    return model


def trial_seed(master_seed, trial):
    """Counter-split seed: trial i is reproducible without drawing 0..i-1."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))


# ---------------------------------------------------------------------------
# bound evaluation by name

def evaluate_bound(name, model, m=1, tol=1e-9, empirical_opts=None):
    """Evaluate one named bound on a binary pairwise model."""
    if name == "linfty":
        return linfty_condition(model)
    if name == "l1":
        return l1_condition_binary(model)
    if name == "spectral":
        return certify_spectral_binary(model, tol=tol)
    if name == "improved":
        return certify_improved(model, m=m, tol=tol)
    if name == "dobrushin":
        return dobrushin_condition(model)
    if name == "simon":
        return simon_condition(model)
    if name == "heskes":
        return heskes_condition(model)
    if name == "empirical":
        opts = dict(empirical_opts or {})
        result = empirical_convergence(model, **opts)
        return Certificate("empirical", 0.0 if result.converged else 1.0,
                           result.converged,
                           detail={"iterations": result.iterations})
    raise ValueError(f"unknown bound {name!r}")


BOUND_NAMES = ("linfty", "l1", "spectral", "improved",
               "dobrushin", "simon", "heskes")


# ---------------------------------------------------------------------------
# empirical convergence

@dataclass
class EmpiricalResult:
    converged: bool
    run_converged: list
    iterations: list
    belief_gap: float


def _run_binary_stack(model, nu0, tol, max_iters, stall_window=None,
                      divergence_limit=None):
    """Run a stack of message vectors in lockstep.

    Per-row exits: converged (residual < tol), stalled (no new best
    residual within the window), diverged (residual beyond the limit).
    Returns (status array: 1 converged / 0 not, iterations array, nus).
    """
    nu = np.array(nu0, dtype=float)
    k = nu.shape[0]
    status = np.full(k, -1, dtype=int)   # -1 running, 1 converged, 0 failed
    iters = np.zeros(k, dtype=int)
    best = np.full(k, np.inf)
    best_iter = np.zeros(k, dtype=int)
    for it in range(1, max_iters + 1):
        new = update_parallel_binary(model, nu)
        resid = np.max(np.abs(new - nu), axis=-1) if model.num_edges else \
            np.zeros(k)
        nu = new
        improved = resid < best
        best[improved] = resid[improved]
        best_iter[improved] = it
        running = status < 0
        hit = running & (resid < tol)
        status[hit] = 1
        iters[hit] = it
        running &= ~hit
        if stall_window is not None:
            stalled = running & (it - best_iter > stall_window)
            status[stalled] = 0
            iters[stalled] = it
            running &= ~stalled
        if divergence_limit is not None:
            blown = running & (resid > divergence_limit)
            status[blown] = 0
            iters[blown] = it
            running &= ~blown
        if not running.any():
            break
    iters[status < 0] = max_iters
    status[status < 0] = 0
    return status, iters, nu


def _general_run_guarded(fg, seed, tol, max_iters, stall_window=None,
                         divergence_limit=None):
    msgs = init_messages(fg, "random", seed)
    best = np.inf
    best_iter = 0
    residual = np.inf
    for it in range(1, max_iters + 1):
        new = update_parallel(fg, msgs)
        residual = quotient_residual(new, msgs)
        msgs = new
        if residual < tol:
            return True, it, msgs
        if residual < best:
            best, best_iter = residual, it
        if stall_window is not None and it - best_iter > stall_window:
            return False, it, msgs
        if divergence_limit is not None and residual > divergence_limit:
            return False, it, msgs
    return False, max_iters, msgs


def empirical_convergence(model_or_fg, inits=10, seed=0, tol=1e-9,
                          max_iters=10000, agree_tol=1e-6,
                          stall_window=None, divergence_limit=None):
    """Run parallel updates from several random starts.

    The verdict is "converged" only when every run converges and all
    resulting single-variable beliefs agree pairwise within ``agree_tol``.
    Optional early exits (stall window, divergence limit) only ever turn a
    would-be non-convergent run around faster; they never affect runs that
    reach the tolerance.
    """
    root = np.random.SeedSequence(entropy=seed, spawn_key=(0xE,))
    child_seeds = root.spawn(inits)
    if isinstance(model_or_fg, BinaryPairwiseModel):
        model = model_or_fg
        nu0 = np.stack([np.random.default_rng(s).uniform(-1, 1, model.num_edges)
                        for s in child_seeds])
        status, iters, nus = _run_binary_stack(
            model, nu0, tol, max_iters, stall_window, divergence_limit)
        all_beliefs = [beliefs_binary(model, nus[r]) for r in range(inits)]
        run_ok = [bool(s) for s in status]
        its = [int(x) for x in iters]
    else:
        fg = model_or_fg
        run_ok, its, all_beliefs = [], [], []
        for s in child_seeds:
            ok, it, msgs = _general_run_guarded(
                fg, s, tol, max_iters, stall_window, divergence_limit)
            run_ok.append(ok)
            its.append(it)
            singles, _ = beliefs(fg, msgs)
            all_beliefs.append(singles)
    gap = 0.0
    for a in range(inits):
        for b in range(a + 1, inits):
            for ba, bb in zip(all_beliefs[a], all_beliefs[b]):
                gap = max(gap, float(np.max(np.abs(np.asarray(ba) - np.asarray(bb)))))
    verdict = all(run_ok) and gap <= agree_tol
    return EmpiricalResult(verdict, run_ok, its, gap)


def soundness_opts(rho, agree_tol=1e-6):
    """Run options strong enough that a model certified at radius ``rho``
    provably reaches belief agreement within ``agree_tol``."""
    margin = max(1e-7, 1.0 - float(rho))
    tol = min(1e-10, agree_tol * margin / 30.0)
    needed = math.log(8.0 / tol) / margin
    return {"tol": tol, "max_iters": int(min(5_000_000, 3.0 * needed + 1000))}


# ---------------------------------------------------------------------------
# critical radii along polar rays

def critical_radius(bound, phi, *, width=6, height=6, instance_seed=0,
                    tol=1e-3, r_max=2.0, scan_points=32, m=1,
                    spectral_tol=1e-9, empirical_opts=None, predicate=None):
    """Largest coupling radius at which ``bound`` still holds on a toroidal
    instance, along the ray (j_mean, j_std) = r (cos phi, sin phi).

    The underlying standard-normal draw is fixed per instance seed, so the
    couplings scale continuously with r.  A coarse scan checks that the
    verdict is monotone (all-hold then all-fail) before bisecting to width
    ``tol``; a non-monotone scan raises :class:`MonotonicityError`.
    """
    pairs = toroidal_bond_pairs(width, height)
    rng = np.random.default_rng(instance_seed)
    gauss = rng.standard_normal(len(pairs))
    n = width * height

    def model_at(r):
        js = r * (math.cos(phi) + math.sin(phi) * gauss)
        bonds = [(i, j, float(x)) for (i, j), x in zip(pairs, js)]
        return BinaryPairwiseModel(n, bonds)

    if predicate is None:
        def predicate(r):
            cert = evaluate_bound(bound, model_at(r), m=m, tol=spectral_tol,
                                  empirical_opts=empirical_opts)
            return cert.holds

    cache = {}

    def holds(r):
        if r not in cache:
            cache[r] = bool(predicate(r))
        return cache[r]

    grid = np.linspace(0.0, r_max, scan_points)
    verdicts = [holds(float(r)) for r in grid]
    first_false = next((k for k, v in enumerate(verdicts) if not v), None)
    if first_false is None:
        raise MonotonicityError(f"bound {bound} never fails up to r_max={r_max}")
    if any(verdicts[first_false:]):
        raise MonotonicityError(f"bound {bound} verdict not monotone along phi={phi}")
    if first_false == 0:
        return 0.0
    lo = float(grid[first_false - 1])
    hi = float(grid[first_false])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def polar_sweep(width, height, angles, instances, bounds, master_seed=0,
                tol=1e-3, r_max=2.0, m=1, empirical_opts=None):
    """Mean and standard deviation of critical radii per angle and bound.

    Returns rows (phi, bound, r_mean, r_std); instances reuse the same
    normal draws across angles so rays differ only in direction.
    """
    phis = np.linspace(0.0, math.pi, angles)
    seeds = [np.random.SeedSequence(entropy=master_seed, spawn_key=(inst,))
             for inst in range(instances)]
    rows = []
    for phi in phis:
        for bound in bounds:
            radii = [critical_radius(bound, float(phi), width=width,
                                     height=height, instance_seed=s,
                                     tol=tol, r_max=r_max, m=m,
                                     empirical_opts=empirical_opts)
                     for s in seeds]
            rows.append((float(phi), bound, float(np.mean(radii)),
                         float(np.std(radii))))
    return rows


# ---------------------------------------------------------------------------
# plane sweep and win table

def sweep_plane(n, j_values, theta_values, bounds, m=1, tol=1e-9):
    """Evaluate bounds on uniform models over a coupling/field grid.

    Returns rows (J, theta, bound, holds, value), one per cell and bound.
    """
    rows = []
    for coupling in j_values:
        for theta in theta_values:
            model = gen_uniform_model(n, coupling, theta)
            for bound in bounds:
                cert = evaluate_bound(bound, model, m=m, tol=tol)
                rows.append((float(coupling), float(theta), bound,
                             cert.holds, float(cert.value)))
    return rows


@dataclass
class TrialRecord:
    trial: int
    seed_key: tuple
    params: tuple
    verdicts: dict
    values: dict
    empirical: bool | None = None
    elapsed: float = 0.0


@dataclass
class WinTable:
    bounds: tuple
    counts: np.ndarray
    records: list = field(default_factory=list)

    def cell(self, winner, loser):
        return int(self.counts[self.bounds.index(winner),
                               self.bounds.index(loser)])


def win_table(trials, n, master_seed,
              bounds=("dobrushin", "spectral", "heskes", "improved"),
              m=1, tol=1e-9, keep_records=True):
    """Per-pair win counts over a random ensemble.

    Cell (A, B) counts trials where A holds and B fails; the diagonal
    holds each bound's total.  Deterministic for a fixed master seed.
    """
    bounds = tuple(bounds)
    k = len(bounds)
    counts = np.zeros((k, k), dtype=int)
    records = []
    for t in range(trials):
        t0 = time.perf_counter()
        rng = np.random.default_rng(trial_seed(master_seed, t))
        model, params = _draw_fully_random(n, rng)
        verdicts = {}
        values = {}
        for name in bounds:
            cert = evaluate_bound(name, model, m=m, tol=tol)
            verdicts[name] = cert.holds
            values[name] = cert.value
        flags = np.array([verdicts[name] for name in bounds])
        counts += np.outer(flags, ~flags)
        counts[np.diag_indices(k)] += flags
        if keep_records:
            records.append(TrialRecord(t, (master_seed, t), params, verdicts,
                                       values, None,
                                       time.perf_counter() - t0))
    return WinTable(bounds, counts, records)


# ---------------------------------------------------------------------------
# CSV output

def _format_cell(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path, header, rows, master_seed=None):
    """Write rows atomically with a comment line recording provenance."""
    seed_part = "none" if master_seed is None else str(master_seed)
    lines = [f"# bpcert {__version__} master_seed={seed_part}", header]
    for row in rows:
        lines.append(",".join(_format_cell(x) for x in row))
    text = "\n".join(lines) + "\n"
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


PLANE_HEADER = "J,theta,bound,holds,value"
POLAR_HEADER = "phi,bound,r_mean,r_std"
WINS_HEADER = "bound_a,bound_b,count"


def wins_rows(table):
    rows = []
    for a, name_a in enumerate(table.bounds):
        for b, name_b in enumerate(table.bounds):
            rows.append((name_a, name_b, int(table.counts[a, b])))
    return rows
