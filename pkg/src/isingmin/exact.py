"""Exact ground states: Gray-code enumeration, a greedy upper bound, and
branch-and-bound with incremental bounds and prune-by-dominance.

Branch-and-bound state
----------------------
``values`` holds +1/-1 for assigned spins and 0 otherwise.  The bound starts
at ``offset - sum|J| - sum|h|`` (every term satisfied) and rises by ``2|J_e|``
when an edge becomes fully assigned in an unsatisfied state, and by ``2|h_i|``
when spin ``i`` is assigned against its field.  An edge therefore adds to the
bound only once all of its spins are assigned, which covers hyperedges.  The
bound at depth ``d`` lives in ``lb_stack[d]`` so backtracking restores it
without arithmetic.

``edge_rem[e]`` counts unassigned members of edge ``e`` and ``unsettled[i]``
counts incident edges of ``i`` that still have unassigned members.  A spin is
settled when ``unsettled[i] == 0``: its flip delta is final for the rest of
the branch.

Dominance: right after assigning ``s``, every free settled spin among ``s``
and its neighbours is tested.  A branch is dropped when flipping such a spin
strictly lowers the energy, or keeps it equal while turning a +1 into a -1.
Either way the flipped configuration is smaller in (energy, lexicographic)
order, so the minimum of that order is never cut.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numba
import numpy as np

from .model import (SpinSystem, _energy_kernel, _flip_delta_kernel, energy,
                    energy_lower_bound)
from .report import SolveReport

MAX_EXHAUSTIVE_SPINS = 30

BRANCHING_ORDERS = ("degree_desc", "index")


# -- exhaustive ------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _lex_less(a, b):
    for i in range(len(a)):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


@numba.njit(cache=True, nogil=True)
def _gray_kernel(edge_ptr, edge_spins, J, h, offset, spin_ptr, spin_edges, config, free,
                 tol, slack, best_cfg):
    e_run = _energy_kernel(edge_ptr, edge_spins, J, h, offset, config)
    best = e_run
    best_cfg[:] = config
    total = np.int64(1) << len(free)
    for t in range(1, total):
        # the bit that changes between gray(t-1) and gray(t) is the lowest set bit of t
        bit = 0
        while not (t >> bit) & 1:
            bit += 1
        s = free[bit]
        e_run += _flip_delta_kernel(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, config, s)
        config[s] = -config[s]
        if e_run <= best + tol + slack:
            exact = _energy_kernel(edge_ptr, edge_spins, J, h, offset, config)
            if exact < best - tol or (exact <= best + tol and _lex_less(config, best_cfg)):
                best = exact
                best_cfg[:] = config
            # resync the running sum whenever an exact value is at hand
            e_run = exact
    return best


def exhaustive_ground_state(system: SpinSystem) -> SolveReport:
    """Enumerate every assignment of the free spins.

    Among configurations within ``system.tolerance`` of the minimum the
    lexicographically smallest one (with -1 before +1) is returned.
    """
    nf = system.num_free
    if nf > MAX_EXHAUSTIVE_SPINS:
        raise ValueError(f"{nf} free spins exceed the exhaustive limit of {MAX_EXHAUSTIVE_SPINS}")
    t0 = time.perf_counter()
    config = np.where(system.clamp != 0, system.clamp, -1).astype(np.int8)
    free = system.free_spins.astype(np.int64)
    best_cfg = config.copy()
    tol = system.tolerance
    # running sums over 2^30 steps can drift further than tol; such near
    # misses are settled by the exact re-evaluation
    slack = 0.0 if system.is_integral else 1e-9 * max(1.0, system.weight_scale)
    _gray_kernel(system.edge_ptr, system.edge_spins, system.J, system.h, system.offset,
                 system.spin_ptr, system.spin_edges, config, free, tol, slack, best_cfg)
    return SolveReport(
        solver="exhaustive",
        best_config=best_cfg,
        best_energy=energy(system, best_cfg),
        proven_optimal=True,
        wall_time=time.perf_counter() - t0,
        nodes_explored=1 << nf,
    )


MAX_ENUMERATE_SPINS = 24


def _config_block(system: SpinSystem, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the enumeration: free spin ``k`` (in index
    order) reads bit ``nf-1-k`` of the row number, so rows run in
    lexicographic order with -1 before +1."""
    free = system.free_spins
    nf = len(free)
    rows = np.arange(start, stop, dtype=np.int64)
    block = np.broadcast_to(system.clamp, (len(rows), system.num_spins)).copy()
    bits = (rows[:, None] >> np.arange(nf - 1, -1, -1)) & 1
    block[:, free] = (2 * bits - 1).astype(np.int8)
    return block


def all_energies(system: SpinSystem, chunk: int = 1 << 16):
    """Yield ``(configs, energies)`` blocks covering every free assignment."""
    nf = system.num_free
    if nf > MAX_ENUMERATE_SPINS:
        raise ValueError(f"{nf} free spins exceed the enumeration limit of {MAX_ENUMERATE_SPINS}")
    total = 1 << nf
    for start in range(0, total, chunk):
        cfg = _config_block(system, start, min(total, start + chunk))
        e = np.full(len(cfg), system.offset)
        # same summation order as energy()
        for k in range(system.num_edges):
            members = system.edge_spins[system.edge_ptr[k]:system.edge_ptr[k + 1]]
            e -= system.J[k] * np.prod(cfg[:, members], axis=1, dtype=np.int64)
        for i in range(system.num_spins):
            e -= system.h[i] * cfg[:, i]
        yield cfg, e


def ground_states(system: SpinSystem) -> np.ndarray:
    """Every configuration within ``system.tolerance`` of the minimum, in
    lexicographic order."""
    best = np.inf
    found: list[np.ndarray] = []
    tol = system.tolerance
    for cfg, e in all_energies(system):
        m = e.min()
        if m < best - tol:
            best = m
            found = []
        if m <= best + tol:
            found.append(cfg[e <= best + tol])
    out = np.concatenate(found)
    exact = np.array([energy(system, c) for c in out])
    return out[exact <= exact.min() + tol]


# -- greedy ---------------------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _greedy_kernel(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, clamp, config):
    n = len(h)
    for i in range(n):
        config[i] = clamp[i]
    for i in range(n):
        if clamp[i] != 0:
            continue
        field = h[i]
        for k in range(spin_ptr[i], spin_ptr[i + 1]):
            e = spin_edges[k]
            prod = 1
            for q in range(edge_ptr[e], edge_ptr[e + 1]):
                j = edge_spins[q]
                if j != i:
                    prod *= config[j]
            field += J[e] * prod  # prod is 0 while any other member is unassigned
        config[i] = 1 if field >= 0.0 else -1


def greedy_initial(system: SpinSystem) -> tuple[np.ndarray, float]:
    """One sweep in index order; each spin minimises its energy against the
    spins already set.  Ties go to +1."""
    config = np.empty(system.num_spins, dtype=np.int8)
    _greedy_kernel(system.edge_ptr, system.edge_spins, system.J, system.h,
                   system.spin_ptr, system.spin_edges, system.clamp, config)
    return config, energy(system, config)


# -- branch and bound ----------------------------------------------------------


@dataclass(frozen=True)
class BnbOptions:
    use_dominance: bool = True
    branching_order: str = "degree_desc"
    node_limit: int | None = None
    time_limit: float | None = None  # seconds

    def __post_init__(self):
        if self.branching_order not in BRANCHING_ORDERS:
            raise ValueError(f"branching_order must be one of {BRANCHING_ORDERS}")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@numba.njit(cache=True, nogil=True)
def _assign(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, values, edge_rem, unsettled, s, v):
    values[s] = v
    delta = 0.0
    if h[s] * v < 0.0:
        delta += 2.0 * abs(h[s])
    for k in range(spin_ptr[s], spin_ptr[s + 1]):
        e = spin_edges[k]
        edge_rem[e] -= 1
        if edge_rem[e] == 0:
            prod = 1
            for q in range(edge_ptr[e], edge_ptr[e + 1]):
                prod *= values[edge_spins[q]]
                unsettled[edge_spins[q]] -= 1
            if J[e] * prod < 0.0:
                delta += 2.0 * abs(J[e])
    return delta


@numba.njit(cache=True, nogil=True)
def _unassign(edge_ptr, edge_spins, spin_ptr, spin_edges, values, edge_rem, unsettled, s):
    for k in range(spin_ptr[s], spin_ptr[s + 1]):
        e = spin_edges[k]
        if edge_rem[e] == 0:
            for q in range(edge_ptr[e], edge_ptr[e + 1]):
                unsettled[edge_spins[q]] += 1
        edge_rem[e] += 1
    values[s] = 0


@numba.njit(cache=True, nogil=True)
def _settled_flip_prunes(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, clamp, values,
                         unsettled, i, tol):
    if clamp[i] != 0 or values[i] == 0 or unsettled[i] != 0:
        return False
    fd = _flip_delta_kernel(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, values, i)
    return fd < -tol or (fd <= tol and values[i] == 1)


@numba.njit(cache=True, nogil=True)
def _dominated(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, clamp, values, unsettled, s, tol):
    if _settled_flip_prunes(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, clamp, values,
                            unsettled, s, tol):
        return True
    for k in range(spin_ptr[s], spin_ptr[s + 1]):
        e = spin_edges[k]
        for q in range(edge_ptr[e], edge_ptr[e + 1]):
            i = edge_spins[q]
            if i != s and _settled_flip_prunes(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges,
                                               clamp, values, unsettled, i, tol):
                return True
    return False


# counters layout
_NODES, _BOUND, _DOM, _LEAVES, _INCUMBENTS = range(5)


@numba.njit(cache=True, nogil=True)
def _bnb_kernel(edge_ptr, edge_spins, J, h, offset, spin_ptr, spin_edges, clamp,
                order, first_val, values, tried, lb_stack, edge_rem, unsettled,
                best_cfg, best_e, tol, use_dom, counters, state, budget,
                incumbents, trace_vals, trace_lb, trace_spin):
    """Depth-first search, resumable: returns 1 when ``budget`` nodes were
    spent (state saved in the arrays), 0 once the tree is exhausted."""
    nf = len(order)
    d = state[0]
    steps = 0
    while d >= 0:
        if steps >= budget:
            state[0] = d
            return 1
        s = order[d]
        if values[s] != 0:
            _unassign(edge_ptr, edge_spins, spin_ptr, spin_edges, values, edge_rem, unsettled, s)
        if tried[d] == 2:
            tried[d] = 0
            d -= 1
            continue
        v = first_val[d] if tried[d] == 0 else -first_val[d]
        tried[d] += 1
        lb = lb_stack[d] + _assign(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, values,
                                   edge_rem, unsettled, s, v)
        steps += 1
        t = counters[_NODES]
        counters[_NODES] += 1
        if t < len(trace_lb):
            trace_vals[t, :] = values
            trace_lb[t] = lb
            trace_spin[t] = s
        if lb >= best_e[0] - tol:
            counters[_BOUND] += 1
            continue
        if use_dom and _dominated(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, clamp,
                                  values, unsettled, s, tol):
            counters[_DOM] += 1
            continue
        if d == nf - 1:
            counters[_LEAVES] += 1
            e = _energy_kernel(edge_ptr, edge_spins, J, h, offset, values)
            if e < best_e[0] - tol:
                best_e[0] = e
                best_cfg[:] = values
                if counters[_INCUMBENTS] < len(incumbents):
                    incumbents[counters[_INCUMBENTS]] = e
                counters[_INCUMBENTS] += 1
            continue
        d += 1
        lb_stack[d] = lb
    state[0] = -1
    return 0


def branching_order(system: SpinSystem, kind: str = "degree_desc") -> np.ndarray:
    free = system.free_spins
    if kind == "index":
        return free.astype(np.int64)
    if kind == "degree_desc":
        deg = system.degrees()[free]
        return free[np.argsort(-deg, kind="stable")].astype(np.int64)
    raise ValueError(f"unknown branching order {kind!r}")


def _root_bound(system: SpinSystem, values: np.ndarray, edge_rem: np.ndarray) -> float:
    """Bound with only the clamped spins assigned."""
    lb = energy_lower_bound(system)
    for i, v in system.clamped.items():
        if system.h[i] * v < 0:
            lb += 2 * abs(system.h[i])
    for e in np.flatnonzero(edge_rem == 0):
        members = system.edge_spins[system.edge_ptr[e]:system.edge_ptr[e + 1]]
        if system.J[e] * np.prod(values[members].astype(np.int64)) < 0:
            lb += 2 * abs(system.J[e])
    return lb


def branch_and_bound(system: SpinSystem, options: BnbOptions | None = None, *,
                     trace_nodes: int = 0, chunk: int = 1 << 20) -> SolveReport:
    """Exact minimum by depth-first branch-and-bound.

    The incumbent starts at :func:`greedy_initial`; each spin first tries its
    greedy value.  With ``trace_nodes > 0`` the first that many nodes are
    recorded in ``report.extra["trace"]`` as (values, bound, assigned spin).
    """
    opts = options or BnbOptions()
    t0 = time.perf_counter()
    n, m = system.num_spins, system.num_edges
    tol = system.tolerance

    greedy_cfg, greedy_e = greedy_initial(system)
    best_cfg = greedy_cfg.copy()
    best_e = np.array([greedy_e])

    order = branching_order(system, opts.branching_order)
    first_val = greedy_cfg[order].astype(np.int8)
    values = system.clamp.copy()
    edge_rem = np.zeros(m, dtype=np.int64)
    for e in range(m):
        members = system.edge_spins[system.edge_ptr[e]:system.edge_ptr[e + 1]]
        edge_rem[e] = np.count_nonzero(values[members] == 0)
    unsettled = np.zeros(n, dtype=np.int64)
    np.add.at(unsettled, system.edge_spins, np.repeat(edge_rem > 0, system.arities))
    nf = len(order)
    tried = np.zeros(max(nf, 1), dtype=np.int8)
    lb_stack = np.zeros(nf + 1)
    lb_stack[0] = _root_bound(system, values, edge_rem)
    counters = np.zeros(5, dtype=np.int64)
    state = np.array([0 if nf else -1], dtype=np.int64)
    incumbents = np.zeros(4096)
    trace_vals = np.zeros((trace_nodes, n), dtype=np.int8)
    trace_lb = np.zeros(trace_nodes)
    trace_spin = np.zeros(trace_nodes, dtype=np.int64)

    if nf == 0:
        best_cfg = values.copy()
        best_e[0] = energy(system, best_cfg)

    finished = nf == 0
    while not finished:
        budget = chunk
        if opts.node_limit is not None:
            budget = min(budget, opts.node_limit - int(counters[_NODES]))
            if budget <= 0:
                break
        status = _bnb_kernel(system.edge_ptr, system.edge_spins, system.J, system.h,
                             system.offset, system.spin_ptr, system.spin_edges, system.clamp,
                             order, first_val, values, tried, lb_stack, edge_rem, unsettled,
                             best_cfg, best_e, tol, opts.use_dominance, counters, state,
                             budget, incumbents, trace_vals, trace_lb, trace_spin)
        finished = status == 0
        if not finished and opts.time_limit is not None \
                and time.perf_counter() - t0 >= opts.time_limit:
            break

    n_inc = int(min(counters[_INCUMBENTS], len(incumbents)))
    extra = {
        "leaves": int(counters[_LEAVES]),
        "initial_energy": greedy_e,
        "incumbents": [float(x) for x in incumbents[:n_inc]],
        "branching_order": opts.branching_order,
        "use_dominance": opts.use_dominance,
    }
    if trace_nodes:
        k = int(min(counters[_NODES], trace_nodes))
        extra["trace"] = (trace_vals[:k].copy(), trace_lb[:k].copy(), trace_spin[:k].copy())
    return SolveReport(
        solver="bnb",
        best_config=best_cfg,
        best_energy=energy(system, best_cfg),
        proven_optimal=bool(finished),
        wall_time=time.perf_counter() - t0,
        nodes_explored=int(counters[_NODES]),
        bound_prunes=int(counters[_BOUND]),
        dominance_prunes=int(counters[_DOM]),
        extra=extra,
    )


def dominance_check(system: SpinSystem, partial, just_assigned: int) -> bool:
    """Reference form of the dominance test on a partial configuration
    (0 = unassigned)."""
    values = np.asarray(partial, dtype=np.int8)
    if values.shape != (system.num_spins,):
        raise ValueError("partial configuration has the wrong length")
    if values[just_assigned] == 0:
        raise ValueError(f"spin {just_assigned} is not assigned")
    tol = system.tolerance
    for i in [just_assigned, *sorted(system.neighbors(just_assigned))]:
        if values[i] == 0 or system.clamp[i] != 0:
            continue
        if any(values[j] == 0 for j in system.neighbors(i)):
            continue
        fd = float(_flip_delta_kernel(system.edge_ptr, system.edge_spins, system.J, system.h,
                                      system.spin_ptr, system.spin_edges, values, i))
        if fd < -tol or (fd <= tol and values[i] == 1):
            return True
    return False
