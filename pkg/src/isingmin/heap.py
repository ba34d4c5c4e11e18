"""Indexed max-heap of spin flip gains.

The heap is a single float64 array of interleaved ``(gain, spin)`` entries and
``pos`` maps each spin to its heap slot (-1 once the spin is locked and
removed), so a spin's entry is found in O(1) and re-keyed in O(log n).
Ordering: larger gain first, ties to the lower spin index.

Nodes have four children.  Slot ``k`` lives at entry ``k + 3`` of a 64-byte
aligned buffer, which puts the four children of any node in one cache line.
"""

from __future__ import annotations

import numba
import numpy as np

from ._native import prefetch
from .model import SpinSystem, as_configuration

ARITY = 4
_OFF = 3


def heap_buffer(n: int) -> np.ndarray:
    """Zeroed heap storage for ``n`` entries, aligned to a 64-byte boundary."""
    raw = np.zeros(2 * (n + _OFF) + 8)
    shift = (-raw.ctypes.data % 64) // 8
    return raw[shift:shift + 2 * (n + _OFF)]


@numba.njit(cache=True, nogil=True, inline="always")
def _before(ga, sa, gb, sb):
    return ga > gb or (ga == gb and sa < sb)


@numba.njit(cache=True, nogil=True, inline="always")
def _gain_at(heap, k):
    return heap[2 * (k + _OFF)]


@numba.njit(cache=True, nogil=True, inline="always")
def _spin_at(heap, k):
    return heap[2 * (k + _OFF) + 1]


@numba.njit(cache=True, nogil=True, inline="always")
def _put(heap, pos, k, g, s):
    heap[2 * (k + _OFF)] = g
    heap[2 * (k + _OFF) + 1] = s
    pos[int(s)] = k


@numba.njit(cache=True, nogil=True)
def _sift_up(heap, pos, k):
    g = _gain_at(heap, k)
    s = _spin_at(heap, k)
    while k > 0:
        parent = (k - 1) // ARITY
        pg = _gain_at(heap, parent)
        ps = _spin_at(heap, parent)
        if not _before(g, s, pg, ps):
            break
        _put(heap, pos, k, pg, ps)
        k = parent
    _put(heap, pos, k, g, s)


@numba.njit(cache=True, nogil=True)
def _sift_down(heap, pos, k, size):
    g = _gain_at(heap, k)
    s = _spin_at(heap, k)
    while True:
        first = ARITY * k + 1
        if first >= size:
            break
        grand = ARITY * first + 1
        if grand < size:
            for c in range(ARITY):
                prefetch(heap, 2 * (grand + ARITY * c + _OFF))
        best = first
        bg = _gain_at(heap, first)
        bs = _spin_at(heap, first)
        last = min(first + ARITY, size)
        for c in range(first + 1, last):
            cg = _gain_at(heap, c)
            cs = _spin_at(heap, c)
            if _before(cg, cs, bg, bs):
                best = c
                bg = cg
                bs = cs
        if not _before(bg, bs, g, s):
            break
        _put(heap, pos, k, bg, bs)
        k = best
    _put(heap, pos, k, g, s)


@numba.njit(cache=True, nogil=True)
def _heap_build(heap, pos, gains, locked):
    size = 0
    for s in range(len(gains)):
        pos[s] = -1
        if not locked[s]:
            _put(heap, pos, size, gains[s], s)
            size += 1
    for k in range((size - 2) // ARITY, -1, -1):
        _sift_down(heap, pos, k, size)
    return size


@numba.njit(cache=True, nogil=True)
def _heap_remove(heap, pos, size, spin):
    k = pos[spin]
    size -= 1
    pos[spin] = -1
    if k != size:
        _put(heap, pos, k, _gain_at(heap, size), _spin_at(heap, size))
        _sift_down(heap, pos, k, size)
        _sift_up(heap, pos, k)
    return size


@numba.njit(cache=True, nogil=True)
def _heap_pop(heap, pos, size):
    """Remove the root.  The hole walks down along best children before the
    last entry fills it, which saves one comparison per level."""
    pos[int(_spin_at(heap, 0))] = -1
    size -= 1
    if size == 0:
        return size
    k = 0
    while True:
        first = ARITY * k + 1
        if first >= size:
            break
        grand = ARITY * first + 1
        if grand < size:
            for c in range(ARITY):
                prefetch(heap, 2 * (grand + ARITY * c + _OFF))
        best = first
        bg = _gain_at(heap, first)
        bs = _spin_at(heap, first)
        last = min(first + ARITY, size)
        for c in range(first + 1, last):
            cg = _gain_at(heap, c)
            cs = _spin_at(heap, c)
            if _before(cg, cs, bg, bs):
                best = c
                bg = cg
                bs = cs
        _put(heap, pos, k, bg, bs)
        k = best
    if k != size:
        _put(heap, pos, k, _gain_at(heap, size), _spin_at(heap, size))
        _sift_up(heap, pos, k)
    return size


@numba.njit(cache=True, nogil=True)
def _heap_add(heap, pos, size, spin, change):
    """Re-key ``spin``'s entry by adding ``change`` to its gain."""
    k = pos[spin]
    heap[2 * (k + _OFF)] += change
    if change > 0.0:
        _sift_up(heap, pos, k)
    elif change < 0.0:
        _sift_down(heap, pos, k, size)


@numba.njit(cache=True, nogil=True)
def _compute_gains(edge_ptr, edge_spins, J, h, spin_ptr, spin_edges, config, gains, edge_sign):
    for e in range(len(J)):
        prod = 1
        for q in range(edge_ptr[e], edge_ptr[e + 1]):
            prod *= config[edge_spins[q]]
        edge_sign[e] = prod
    for s in range(len(h)):
        acc = 0.0
        for k in range(spin_ptr[s], spin_ptr[s + 1]):
            e = spin_edges[k]
            acc += J[e] * edge_sign[e]
        gains[s] = -2.0 * (acc + h[s] * config[s])


@numba.njit(cache=True, nogil=True)
def _apply_move(edge_ptr, edge_spins, J, spin_ptr, spin_edges, config, gains, edge_sign,
                heap, pos, locked, size, spin):
    """Flip ``spin``, lock it, and patch neighbour gains.  Returns the new heap size.

    Flipping ``spin`` negates the product of every edge containing it, which
    moves each other member's gain by ``4 * J_e * product_before``.
    """
    if pos[spin] >= 0:
        size = _heap_remove(heap, pos, size, spin)
    locked[spin] = True
    for k in range(spin_ptr[spin], spin_ptr[spin + 1]):
        e = spin_edges[k]
        bump = 4.0 * J[e] * edge_sign[e]
        for q in range(edge_ptr[e], edge_ptr[e + 1]):
            j = edge_spins[q]
            if j != spin:
                gains[j] += bump
                if pos[j] >= 0:
                    _heap_add(heap, pos, size, j, bump)
        edge_sign[e] = -edge_sign[e]
    gains[spin] = -gains[spin]
    config[spin] = -config[spin]
    return size


class GainContainer:
    """Flip gains of every spin for one configuration, with an indexed heap.

    ``gains[i]`` is the energy decrease from flipping spin ``i`` (the negated
    flip delta).  Gains are kept current for all spins, locked or not; only
    unlocked spins live in the heap.  Clamped spins start locked.
    """

    def __init__(self, system: SpinSystem, config):
        self.system = system
        self.config = as_configuration(system, config).copy()
        n = system.num_spins
        self.gains = np.empty(n)
        self.edge_sign = np.empty(system.num_edges, dtype=np.int8)
        self.locked = system.clamp != 0
        self.heap = heap_buffer(n)
        self.pos = np.empty(n, dtype=np.int64)
        _compute_gains(system.edge_ptr, system.edge_spins, system.J, system.h,
                       system.spin_ptr, system.spin_edges, self.config, self.gains, self.edge_sign)
        self.size = _heap_build(self.heap, self.pos, self.gains, self.locked)

    def __len__(self):
        return self.size

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        """Heap-ordered ``(spins, gains)`` of the unlocked entries."""
        body = self.heap[2 * _OFF:2 * (_OFF + self.size)]
        return body[1::2].astype(np.int64), body[0::2].copy()

    def gain(self, spin: int) -> float:
        return float(self.gains[spin])

    def select_best_move(self) -> tuple[int, float]:
        if self.size == 0:
            raise LookupError("every spin is locked")
        return int(self.heap[2 * _OFF + 1]), float(self.heap[2 * _OFF])

    def apply_move(self, spin: int) -> float:
        """Flip and lock ``spin``; returns the energy change it caused."""
        if self.locked[spin]:
            raise ValueError(f"spin {spin} is locked")
        delta = -float(self.gains[spin])
        s = self.system
        self.size = _apply_move(s.edge_ptr, s.edge_spins, s.J, s.spin_ptr, s.spin_edges,
                                self.config, self.gains, self.edge_sign, self.heap,
                                self.pos, self.locked, self.size, spin)
        return delta

    def check_invariants(self) -> None:
        """Raise AssertionError if heap order or the position index is broken."""
        hs, hg = self.entries()
        for k in range(self.size):
            assert self.pos[hs[k]] == k, "position index out of sync"
            assert not self.locked[hs[k]], "locked spin in heap"
            assert hg[k] == self.gains[hs[k]], "heap gain disagrees with gains[]"
            if k:
                p = (k - 1) // ARITY
                assert hg[p] > hg[k] or (hg[p] == hg[k] and hs[p] < hs[k]), "heap order"
        assert np.count_nonzero(self.pos >= 0) == self.size
        assert np.array_equal(np.sort(hs), np.flatnonzero(~self.locked))


def compute_gains(system: SpinSystem, config) -> GainContainer:
    return GainContainer(system, config)


def select_best_move(gc: GainContainer) -> tuple[int, float]:
    return gc.select_best_move()


def apply_move_and_update(system: SpinSystem, config: np.ndarray, gc: GainContainer, spin: int) -> float:
    """Apply a move through ``gc`` and mirror it into the caller's ``config``."""
    if gc.system is not system:
        raise ValueError("gain container belongs to a different system")
    delta = gc.apply_move(spin)
    config[spin] = gc.config[spin]
    return delta
