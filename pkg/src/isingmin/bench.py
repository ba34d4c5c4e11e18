"""Per-pass timing of the local search on 2-D bimodal tori."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .lattice import generate_lattice
from .local import _Workspace, run_pass
from .model import energy, random_configuration

# 10^4, 10^5, 10^6 spins
DEFAULT_SHAPES = ((100, 100), (250, 400), (1000, 1000))


@dataclass
class TimingRow:
    num_spins: int
    round: int
    passes: int
    mean_pass_seconds: float


def _default_passes(n: int) -> int:
    # roughly 0.5 s of work per measurement, at least two passes
    return max(2, 2_000_000 // n)


def scaling_benchmark(shapes=DEFAULT_SHAPES, rounds: int = 5, seed: int = 0,
                      passes: int | None = None) -> tuple[list[TimingRow], list[float]]:
    """Time passes across sizes.  Returns timing rows and the per-step ratios.

    Every pass starts from the same state, the one reached after one warm-up
    pass, so repeated passes do identical work.  Within a round sizes are
    visited small-to-large and then large-to-small, and each size's time is
    the mean of both visits; this cancels slow drift in machine speed.  The
    reported ratio for each step is the median over rounds of
    ``t(larger) / t(smaller)``.
    """
    setups = []
    for dims in shapes:
        system = generate_lattice(dims, periodic_dims=len(dims), coupling_dist="bimodal", seed=seed)
        ws = _Workspace(system)
        cfg = random_configuration(system, seed)
        cfg, e, _ = run_pass(system, cfg, energy(system, cfg), ws)
        reps = passes or _default_passes(system.num_spins)
        setups.append((system, ws, cfg, e, reps))

    def measure(k):
        system, ws, cfg, e, reps = setups[k]
        t0 = time.perf_counter()
        for _ in range(reps):
            run_pass(system, cfg, e, ws)
        return (time.perf_counter() - t0) / reps

    rows: list[TimingRow] = []
    per_round: list[list[float]] = []
    order = list(range(len(setups)))
    for r in range(rounds):
        up = [measure(k) for k in order]
        down = [measure(k) for k in reversed(order)][::-1]
        means = [(a + b) / 2 for a, b in zip(up, down)]
        per_round.append(means)
        for k, m in enumerate(means):
            rows.append(TimingRow(setups[k][0].num_spins, r, 2 * setups[k][4], m))
    ratios = [statistics.median(rm[k + 1] / rm[k] for rm in per_round)
              for k in range(len(setups) - 1)]
    return rows, ratios
