"""Pass-based local search with hill-climbing moves and a multi-start driver.

A pass moves every free spin exactly once, always taking the largest
available gain (negative gains included), and keeps the lowest-energy prefix
of the move sequence; when several prefixes reach that energy below the
starting one, the longest wins.  Passes repeat from that prefix until one fails to
improve the energy.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from ._native import prefetch
from .heap import (_apply_move, _compute_gains, _gain_at, _heap_add, _heap_build,
                   _heap_pop, _OFF, _spin_at, heap_buffer)
from .model import SpinSystem, as_configuration, energy, random_configuration
from .report import SolveReport


@numba.njit(cache=True, nogil=True)
def _finish_pass(config, moves, nmoves, best_len):
    for k in range(nmoves - 1, best_len - 1, -1):
        config[moves[k]] = -config[moves[k]]


@numba.njit(cache=True, nogil=True)
def _pass_kernel(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, clamp, config, start_energy,
                 gains, edge_sign, heap, pos, locked, moves, move_gain, running):
    _compute_gains(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, config, gains, edge_sign)
    for s in range(len(clamp)):
        locked[s] = clamp[s] != 0
    size = _heap_build(heap, pos, gains, locked)
    nmoves = size
    e = start_energy
    best = start_energy
    best_len = 0
    for k in range(nmoves):
        spin = int(_spin_at(heap, 0))
        g = _gain_at(heap, 0)
        size = _apply_move(edge_ptr, edge_spins, J, spin_ptr, spin_edges, config, gains,
                           edge_sign, heap, pos, locked, size, spin)
        e -= g
        moves[k] = spin
        move_gain[k] = g
        running[k] = e
        # among equally good prefixes below the start keep the longest one
        if e < best or (e == best and e < start_energy):
            best = e
            best_len = k + 1
    _finish_pass(config, moves, nmoves, best_len)
    return nmoves, best_len


@numba.njit(cache=True, nogil=True)
def _pair_pass_kernel(adj_ptr, adj, h, clamp, config, start_energy,
                      gains, heap, pos, locked, moves, move_gain, running):
    # same arithmetic as _pass_kernel, minus the edge indirection;
    # adj interleaves (coupling, neighbour) per adjacency slot
    for s in range(len(h)):
        acc = 0.0
        for q in range(adj_ptr[s], adj_ptr[s + 1]):
            acc += adj[2 * q] * config[int(adj[2 * q + 1])]
        gains[s] = -2.0 * config[s] * (acc + h[s])
        locked[s] = clamp[s] != 0
    size = _heap_build(heap, pos, gains, locked)
    nmoves = size
    e = start_energy
    best = start_energy
    best_len = 0
    for k in range(nmoves):
        i = int(_spin_at(heap, 0))
        g = _gain_at(heap, 0)
        size = _heap_pop(heap, pos, size)
        locked[i] = True
        si = config[i]
        for q in range(adj_ptr[i], adj_ptr[i + 1]):
            slot = pos[int(adj[2 * q + 1])]
            if slot >= 0:
                prefetch(heap, 2 * (slot + _OFF))
        for q in range(adj_ptr[i], adj_ptr[i + 1]):
            j = int(adj[2 * q + 1])
            # locked spins never come back this pass, so only heap keys are kept current
            if pos[j] >= 0:
                _heap_add(heap, pos, size, j, 4.0 * adj[2 * q] * si * config[j])
        config[i] = -si
        e -= g
        moves[k] = i
        move_gain[k] = g
        running[k] = e
        # among equally good prefixes below the start keep the longest one
        if e < best or (e == best and e < start_energy):
            best = e
            best_len = k + 1
    _finish_pass(config, moves, nmoves, best_len)
    return nmoves, best_len


@dataclass
class PassTrace:
    start_energy: float
    moves: np.ndarray          # spin moved at step k
    gains: np.ndarray          # gain of that move when selected
    running: np.ndarray        # energy after step k, from accumulated gains
    best_prefix_length: int
    best_prefix_energy: float  # exact re-evaluation of the kept prefix


class _Workspace:
    def __init__(self, system: SpinSystem):
        n, m = system.num_spins, system.num_edges
        self.gains = np.empty(n)
        self.edge_sign = np.empty(m, dtype=np.int8)
        self.heap = heap_buffer(n)
        self.pos = np.empty(n, dtype=np.int32)
        self.locked = np.empty(n, dtype=np.bool_)
        self.moves = np.empty(n, dtype=np.int64)
        self.move_gain = np.empty(n)
        self.running = np.empty(n)


def run_pass(system: SpinSystem, config, start_energy: float | None = None,
             _ws: _Workspace | None = None,
             _force_general: bool = False) -> tuple[np.ndarray, float, PassTrace]:
    """One pass from ``config``; returns the best prefix configuration and its energy."""
    cfg = as_configuration(system, config).copy()
    if start_energy is None:
        start_energy = energy(system, cfg)
    ws = _ws or _Workspace(system)
    s = system
    if s.max_arity <= 2 and not _force_general:
        adj_ptr, adj = s.pair_records
        nmoves, best_len = _pair_pass_kernel(
            adj_ptr, adj, s.h, s.clamp, cfg, float(start_energy), ws.gains,
            ws.heap, ws.pos, ws.locked, ws.moves, ws.move_gain, ws.running)
    else:
        nmoves, best_len = _pass_kernel(
            s.edge_ptr, s.edge_spins, s.J, s.h, s.spin_ptr, s.spin_edges, s.clamp, cfg,
            float(start_energy), ws.gains, ws.edge_sign, ws.heap, ws.pos,
            ws.locked, ws.moves, ws.move_gain, ws.running)
    best_e = energy(system, cfg) if best_len else float(start_energy)
    trace = PassTrace(
        start_energy=float(start_energy),
        moves=ws.moves[:nmoves].copy(),
        gains=ws.move_gain[:nmoves].copy(),
        running=ws.running[:nmoves].copy(),
        best_prefix_length=int(best_len),
        best_prefix_energy=best_e,
    )
    return cfg, best_e, trace


def local_search(system: SpinSystem, start_config) -> SolveReport:
    """Repeat passes until one yields no strict improvement."""
    t0 = time.perf_counter()
    eps = 0.0 if system.is_integral else 1e-12
    cur = as_configuration(system, start_config).copy()
    cur_e = energy(system, cur)
    ws = _Workspace(system)
    history = [cur_e]
    passes = moves = 0
    while True:
        cand, cand_e, trace = run_pass(system, cur, cur_e, ws)
        passes += 1
        moves += len(trace.moves)
        if cand_e < cur_e - eps:
            cur, cur_e = cand, cand_e
            history.append(cur_e)
        else:
            break
    return SolveReport(
        solver="local",
        best_config=cur,
        best_energy=cur_e,
        wall_time=time.perf_counter() - t0,
        passes=passes,
        moves=moves,
        extra={"pass_energies": history},
    )


def derive_seed(seed: int, start: int) -> int:
    """Seed of start ``start``; independent of scheduling."""
    return int(np.random.SeedSequence([int(seed), int(start)]).generate_state(1, np.uint64)[0])


@dataclass
class StartSample:
    start_index: int
    seed: int
    energy: float
    passes: int
    wall_ms: float


def default_workers() -> int:
    env = os.environ.get("ISINGMIN_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_starts(system: SpinSystem, num_starts: int, seed: int,
               max_workers: int | None = 1) -> list[tuple[StartSample, SolveReport]]:
    """Local search from ``num_starts`` seeded random configurations, in start order."""
    if num_starts < 1:
        raise ValueError("num_starts must be >= 1")

    def one(index: int):
        t0 = time.perf_counter()
        sd = derive_seed(seed, index)
        rep = local_search(system, random_configuration(system, sd))
        ms = (time.perf_counter() - t0) * 1e3
        return StartSample(index, sd, rep.best_energy, rep.passes, ms), rep

    workers = max_workers or default_workers()
    if workers <= 1 or num_starts == 1:
        return [one(i) for i in range(num_starts)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(num_starts)))


def multi_start(system: SpinSystem, num_starts: int, seed: int,
                max_workers: int | None = 1) -> tuple[SolveReport, list[StartSample]]:
    """Best of ``num_starts`` independent local searches (ties go to the earliest start)."""
    t0 = time.perf_counter()
    results = run_starts(system, num_starts, seed, max_workers)
    best_idx = min(range(len(results)), key=lambda i: (results[i][0].energy, i))
    sample, rep = results[best_idx]
    best = SolveReport(
        solver="local-multistart",
        best_config=rep.best_config,
        best_energy=rep.best_energy,
        wall_time=time.perf_counter() - t0,
        passes=sum(r.passes for _, r in results),
        moves=sum(r.moves for _, r in results),
        extra={"num_starts": num_starts, "seed": seed, "best_start": best_idx},
    )
    return best, [s for s, _ in results]
