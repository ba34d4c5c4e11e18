"""Spin systems on graphs and hypergraphs, and their energy function.

Energy convention (pairwise edges are the arity-2 special case)::

    E(S) = offset - sum_e J_e * prod_{i in e} S_i - sum_i h_i * S_i

Configurations are ``int8`` numpy arrays of +1/-1.  Partial configurations
used by the branch-and-bound solver additionally allow 0 for "unassigned".
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numba
import numpy as np

# integer-weight systems stay exact in float64 below this magnitude
EXACT_LIMIT = 2.0**53


class SpinSystem:
    """Immutable weighted hypergraph over ``num_spins`` Ising spins.

    Edges are stored in CSR form (``edge_ptr``/``edge_spins``) together with
    a per-spin incidence index (``spin_ptr``/``spin_edges``).  At construction
    each edge's spin set is sorted, duplicate spin sets are merged by adding
    their couplings, and zero couplings are dropped.  Edges are ordered by
    arity, then lexicographically by spin set.

    Parameters
    ----------
    num_spins : int
    h : sequence of float, optional
        Per-spin magnetization; zeros when omitted.
    edges : iterable of (spins, coupling)
        Each ``spins`` is a sequence of at least two distinct indices.
    offset : float
        Constant added to every energy.
    clamped : mapping spin -> +1/-1, optional
        Spins with fixed values; solvers never treat these as free.
    """

    def __init__(
        self,
        num_spins: int,
        h: Sequence[float] | np.ndarray | None = None,
        edges: Iterable[tuple[Sequence[int], float]] = (),
        offset: float = 0.0,
        clamped: Mapping[int, int] | None = None,
    ):
        spins: list[int] = []
        ptr = [0]
        couplings: list[float] = []
        for members, coupling in edges:
            spins.extend(int(i) for i in members)
            ptr.append(len(spins))
            couplings.append(float(coupling))
        self._init_arrays(
            num_spins,
            h,
            np.asarray(ptr, dtype=np.int64),
            np.asarray(spins, dtype=np.int64),
            np.asarray(couplings, dtype=np.float64),
            offset,
            clamped,
        )

    @classmethod
    def from_arrays(cls, num_spins, h, edge_ptr, edge_spins, J, offset=0.0, clamped=None):
        """Build from CSR edge arrays without going through Python tuples."""
        obj = cls.__new__(cls)
        obj._init_arrays(
            num_spins,
            h,
            np.asarray(edge_ptr, dtype=np.int64),
            np.asarray(edge_spins, dtype=np.int64),
            np.asarray(J, dtype=np.float64),
            offset,
            clamped,
        )
        return obj

    @classmethod
    def from_pairs(cls, num_spins, pairs, J, h=None, offset=0.0, clamped=None):
        """Build a pairwise system from an ``(m, 2)`` index array."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        ptr = np.arange(0, 2 * len(pairs) + 1, 2, dtype=np.int64)
        return cls.from_arrays(num_spins, h, ptr, pairs.ravel(), J, offset, clamped)

    def _init_arrays(self, num_spins, h, edge_ptr, edge_spins, J, offset, clamped):
        n = int(num_spins)
        if n < 0:
            raise ValueError("num_spins must be non-negative")
        if h is None:
            h = np.zeros(n)
        h = np.array(h, dtype=np.float64)
        if h.shape != (n,):
            raise ValueError(f"expected {n} magnetizations, got shape {h.shape}")
        if len(edge_ptr) != len(J) + 1:
            raise ValueError("edge_ptr and couplings disagree on the edge count")
        ptr, spins, J = _canonical_edges(n, edge_ptr, edge_spins, J)

        clamp = np.zeros(n, dtype=np.int8)
        for spin, value in (clamped or {}).items():
            if not 0 <= spin < n:
                raise ValueError(f"clamped spin {spin} out of range")
            if value not in (1, -1):
                raise ValueError(f"clamp value for spin {spin} must be +1 or -1")
            clamp[spin] = value

        self.num_spins = n
        self.h = h
        self.edge_ptr = ptr
        self.edge_spins = spins
        self.J = J
        self.offset = float(offset)
        self.clamp = clamp
        self.spin_ptr, self.spin_edges = _incidence(n, ptr, spins)
        for arr in (self.h, self.edge_ptr, self.edge_spins, self.J, self.clamp,
                    self.spin_ptr, self.spin_edges):
            arr.setflags(write=False)

    # -- views ---------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.J)

    @property
    def arities(self) -> np.ndarray:
        return np.diff(self.edge_ptr)

    @property
    def max_arity(self) -> int:
        return int(self.arities.max()) if self.num_edges else 0

    @property
    def clamped(self) -> dict[int, int]:
        idx = np.flatnonzero(self.clamp)
        return {int(i): int(self.clamp[i]) for i in idx}

    @property
    def free_spins(self) -> np.ndarray:
        return np.flatnonzero(self.clamp == 0)

    @property
    def num_free(self) -> int:
        return int(np.count_nonzero(self.clamp == 0))

    def edge(self, e: int) -> tuple[tuple[int, ...], float]:
        lo, hi = self.edge_ptr[e], self.edge_ptr[e + 1]
        return tuple(int(i) for i in self.edge_spins[lo:hi]), float(self.J[e])

    def edges(self) -> list[tuple[tuple[int, ...], float]]:
        return [self.edge(e) for e in range(self.num_edges)]

    def incident_edges(self, spin: int) -> np.ndarray:
        return self.spin_edges[self.spin_ptr[spin]:self.spin_ptr[spin + 1]]

    def neighbors(self, spin: int) -> set[int]:
        out: set[int] = set()
        for e in self.incident_edges(spin):
            out.update(int(i) for i in self.edge_spins[self.edge_ptr[e]:self.edge_ptr[e + 1]])
        out.discard(spin)
        return out

    @functools.cached_property
    def pair_adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Spin-major ``(ptr, neighbour, coupling)`` arrays; pairwise systems only."""
        if self.max_arity > 2:
            raise ValueError("pair_adjacency needs a system without hyperedges")
        pairs = self.edge_spins.reshape(-1, 2)
        a = np.concatenate([pairs[:, 0], pairs[:, 1]])
        b = np.concatenate([pairs[:, 1], pairs[:, 0]])
        w = np.concatenate([self.J, self.J])
        order = np.lexsort((b, a))
        ptr = np.zeros(self.num_spins + 1, dtype=np.int64)
        np.cumsum(np.bincount(a, minlength=self.num_spins), out=ptr[1:])
        return ptr, b[order].astype(np.int32), w[order]

    @functools.cached_property
    def pair_records(self) -> tuple[np.ndarray, np.ndarray]:
        """``pair_adjacency`` with coupling and neighbour interleaved in one float array."""
        ptr, nbr, w = self.pair_adjacency
        rec = np.empty(2 * len(nbr))
        rec[0::2] = w
        rec[1::2] = nbr
        return ptr, rec

    def degrees(self) -> np.ndarray:
        """Number of incident edges per spin."""
        return np.diff(self.spin_ptr)

    @property
    def weight_scale(self) -> float:
        return float(np.abs(self.J).sum() + np.abs(self.h).sum() + abs(self.offset))

    @property
    def is_integral(self) -> bool:
        """True when every weight is an integer and all energies are exact."""
        vals = np.concatenate([self.J, self.h, [self.offset]])
        return bool(np.all(vals == np.round(vals))) and self.weight_scale < EXACT_LIMIT

    @property
    def tolerance(self) -> float:
        """Absolute slack used when comparing accumulated energies."""
        return 0.0 if self.is_integral else 1e-12 * max(1.0, self.weight_scale)

    def __eq__(self, other):
        if not isinstance(other, SpinSystem):
            return NotImplemented
        return (
            self.num_spins == other.num_spins
            and self.offset == other.offset
            and np.array_equal(self.h, other.h)
            and np.array_equal(self.edge_ptr, other.edge_ptr)
            and np.array_equal(self.edge_spins, other.edge_spins)
            and np.array_equal(self.J, other.J)
            and np.array_equal(self.clamp, other.clamp)
        )

    __hash__ = None

    def __repr__(self):
        return (f"SpinSystem(num_spins={self.num_spins}, num_edges={self.num_edges}, "
                f"max_arity={self.max_arity}, clamped={int(np.count_nonzero(self.clamp))})")


def _canonical_edges(n, ptr, spins, J):
    arity = np.diff(ptr)
    if len(arity) and arity.min() < 2:
        bad = int(np.flatnonzero(arity < 2)[0])
        raise ValueError(f"edge {bad} has fewer than two spins")
    if len(spins) and (spins.min() < 0 or spins.max() >= n):
        raise ValueError("edge references a spin index out of range")

    out_ptr = [np.zeros(1, dtype=np.int64)]
    out_spins, out_J = [], []
    base = 0
    for k in np.unique(arity):
        idx = np.flatnonzero(arity == k)
        rows = np.sort(spins[ptr[idx][:, None] + np.arange(k)], axis=1)
        if np.any(rows[:, 1:] == rows[:, :-1]):
            raise ValueError("edge contains a duplicate spin")
        if n > 0 and k * np.log2(max(n, 2)) < 62:
            key = np.zeros(len(rows), dtype=np.int64)
            for col in range(k):
                key = key * n + rows[:, col]
            _, first, inv = np.unique(key, return_index=True, return_inverse=True)
            uniq = rows[first]
        else:
            uniq, inv = np.unique(rows, axis=0, return_inverse=True)
        merged = np.bincount(inv.ravel(), weights=J[idx], minlength=len(uniq))
        keep = merged != 0.0
        uniq, merged = uniq[keep], merged[keep]
        out_spins.append(uniq.ravel())
        out_J.append(merged)
        out_ptr.append(base + k * np.arange(1, len(uniq) + 1, dtype=np.int64))
        base += k * len(uniq)
    return (
        np.concatenate(out_ptr),
        np.concatenate(out_spins).astype(np.int64) if out_spins else np.zeros(0, dtype=np.int64),
        np.concatenate(out_J) if out_J else np.zeros(0),
    )


def _incidence(n, ptr, spins):
    edge_ids = np.repeat(np.arange(len(ptr) - 1, dtype=np.int64), np.diff(ptr))
    order = np.argsort(spins, kind="stable")
    spin_edges = edge_ids[order]
    counts = np.bincount(spins, minlength=n) if len(spins) else np.zeros(n, dtype=np.int64)
    spin_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=spin_ptr[1:])
    return spin_ptr, spin_edges


# -- numba kernels ----------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _energy_kernel(edge_ptr, edge_spins, J, h, offset, config):
    acc = offset
    for e in range(len(J)):
        prod = 1
        for k in range(edge_ptr[e], edge_ptr[e + 1]):
            prod *= config[edge_spins[k]]
        acc -= J[e] * prod
    for i in range(len(h)):
        acc -= h[i] * config[i]
    return acc


@numba.njit(cache=True, nogil=True)
def _flip_delta_kernel(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, config, spin):
    acc = 0.0
    for k in range(spin_ptr[spin], spin_ptr[spin + 1]):
        e = spin_edges[k]
        prod = 1
        for q in range(edge_ptr[e], edge_ptr[e + 1]):
            prod *= config[edge_spins[q]]
        acc += J[e] * prod
    return 2.0 * (acc + h[spin] * config[spin])


# -- public operations ---------------------------------------------------------


def as_configuration(system: SpinSystem, config) -> np.ndarray:
    """Validate ``config`` against ``system`` and return it as ``int8``."""
    arr = np.asarray(config)
    if arr.shape != (system.num_spins,):
        raise ValueError(f"configuration has shape {arr.shape}, expected ({system.num_spins},)")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("configuration values must be +1 or -1")
    mask = system.clamp != 0
    if np.any(arr[mask] != system.clamp[mask]):
        raise ValueError("configuration disagrees with a clamped spin")
    return arr.astype(np.int8, copy=False)


def energy(system: SpinSystem, config) -> float:
    """Energy of ``config``; edges are summed in stored order, then fields."""
    cfg = as_configuration(system, config)
    return float(_energy_kernel(system.edge_ptr, system.edge_spins, system.J, system.h,
                                system.offset, cfg))


def energy_lower_bound(system: SpinSystem) -> float:
    """Energy with every bond and field satisfied; often unattainable."""
    return system.offset - float(np.abs(system.J).sum()) - float(np.abs(system.h).sum())


def flip_delta(system: SpinSystem, config, spin: int) -> float:
    """``energy(config with spin flipped) - energy(config)``."""
    cfg = as_configuration(system, config)
    if not 0 <= spin < system.num_spins:
        raise IndexError(f"spin {spin} out of range")
    if system.clamp[spin]:
        raise ValueError(f"spin {spin} is clamped")
    return float(_flip_delta_kernel(system.edge_ptr, system.edge_spins, system.J, system.h,
                                    system.spin_ptr, system.spin_edges, cfg, spin))


def random_configuration(system: SpinSystem, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    cfg = (rng.integers(0, 2, size=system.num_spins, dtype=np.int8) * 2 - 1).astype(np.int8)
    mask = system.clamp != 0
    cfg[mask] = system.clamp[mask]
    return cfg


def global_flip(config) -> np.ndarray:
    return (-np.asarray(config)).astype(np.int8)


def bond_satisfied(J: float, si: int, sj: int) -> bool:
    """A pairwise bond is satisfied when it contributes ``-|J|``."""
    return -J * si * sj == -abs(J)


# -- Table 1 classification ----------------------------------------------------


class Hardness(str, enum.Enum):
    POLY_ANALYTICAL = "poly_analytical"
    POLY_MWPM = "poly_mwpm"
    POLY_MAXFLOW = "poly_maxflow"
    NP_HARD = "np_hard"


@dataclass(frozen=True)
class InstanceClass:
    dimensions: int
    boundary_conditions: int
    has_magnetization: bool
    coupling_signs: str = "mixed"  # or "nonnegative"

    def __post_init__(self):
        if self.dimensions < 1:
            raise ValueError("dimensions must be >= 1")
        if not 0 <= self.boundary_conditions <= self.dimensions:
            raise ValueError("boundary_conditions must lie in [0, dimensions]")
        if self.coupling_signs not in ("mixed", "nonnegative"):
            raise ValueError("coupling_signs must be 'mixed' or 'nonnegative'")


def classify_hardness(ic: InstanceClass) -> Hardness:
    """Look up the complexity class of a lattice instance family."""
    if ic.dimensions == 1:
        return Hardness.POLY_ANALYTICAL
    if ic.coupling_signs == "nonnegative":
        return Hardness.POLY_MAXFLOW
    if ic.dimensions == 2 and ic.boundary_conditions <= 1 and not ic.has_magnetization:
        return Hardness.POLY_MWPM
    return Hardness.NP_HARD
