from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``best_energy`` is always a full re-evaluation of ``best_config``.
    Counters irrelevant to a solver stay at zero.
    """

    solver: str
    best_config: np.ndarray
    best_energy: float
    proven_optimal: bool = False
    wall_time: float = 0.0
    nodes_explored: int = 0
    bound_prunes: int = 0
    dominance_prunes: int = 0
    passes: int = 0
    moves: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "best_energy": self.best_energy,
            "best_config": [int(v) for v in self.best_config],
            "proven_optimal": self.proven_optimal,
            "wall_time": self.wall_time,
            "nodes_explored": self.nodes_explored,
            "bound_prunes": self.bound_prunes,
            "dominance_prunes": self.dominance_prunes,
            "passes": self.passes,
            "moves": self.moves,
            **({"extra": self.extra} if self.extra else {}),
        }
