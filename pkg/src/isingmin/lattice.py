"""Edwards-Anderson lattice instances with optional periodic wrap."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import SpinSystem

COUPLING_DISTS = ("gaussian", "bimodal")
FIELD_DISTS = ("zero", "gaussian")


def lattice_pairs(dims: Sequence[int], periodic_dims: int = 0) -> np.ndarray:
    """Nearest-neighbour pairs of a row-major grid; the first ``periodic_dims`` wrap.

    Pairs come out spin-major: for each spin, one +1 step along each dimension.
    """
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("need at least one dimension")
    if not 0 <= periodic_dims <= len(dims):
        raise ValueError("periodic_dims must lie in [0, len(dims)]")
    for axis, extent in enumerate(dims):
        if extent < 2:
            raise ValueError(f"extent {extent} along axis {axis} is below 2")
        # a 2-wide ring would put the wrap bond on top of the ordinary one
        if axis < periodic_dims and extent < 3:
            raise ValueError(f"periodic axis {axis} needs extent >= 3")

    n = int(np.prod(dims))
    coords = np.indices(dims).reshape(len(dims), n)
    strides = np.array([int(np.prod(dims[a + 1:])) for a in range(len(dims))], dtype=np.int64)
    ids = np.arange(n, dtype=np.int64)

    blocks = []
    for axis, extent in enumerate(dims):
        c = coords[axis]
        nxt = c + 1
        if axis < periodic_dims:
            valid = np.ones(n, dtype=bool)
            nxt = nxt % extent
        else:
            valid = nxt < extent
        nb = ids + (nxt - c) * strides[axis]
        block = np.full((n, 2), -1, dtype=np.int64)
        block[valid, 0] = ids[valid]
        block[valid, 1] = nb[valid]
        blocks.append(block)
    stacked = np.stack(blocks, axis=1).reshape(-1, 2)
    return stacked[stacked[:, 0] >= 0]


def generate_lattice(
    dims: Sequence[int],
    periodic_dims: int = 0,
    coupling_dist: str = "gaussian",
    magnetization_dist: str = "zero",
    seed: int = 0,
) -> SpinSystem:
    """Random spin glass on a hypercubic grid.

    Couplings are drawn first (one per bond, in :func:`lattice_pairs` order),
    then fields, all from ``numpy.random.default_rng(seed)``.
    """
    if coupling_dist not in COUPLING_DISTS:
        raise ValueError(f"coupling_dist must be one of {COUPLING_DISTS}")
    if magnetization_dist not in FIELD_DISTS:
        raise ValueError(f"magnetization_dist must be one of {FIELD_DISTS}")
    pairs = lattice_pairs(dims, periodic_dims)
    n = int(np.prod(dims))
    rng = np.random.default_rng(seed)
    if coupling_dist == "gaussian":
        J = rng.standard_normal(len(pairs))
    else:
        J = (rng.integers(0, 2, size=len(pairs)) * 2 - 1).astype(np.float64)
    h = rng.standard_normal(n) if magnetization_dist == "gaussian" else np.zeros(n)
    return SpinSystem.from_pairs(n, pairs, J, h=h)
