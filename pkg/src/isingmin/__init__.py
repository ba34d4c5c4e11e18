"""Ground states of Ising spin glasses on graphs and hypergraphs."""

__version__ = "0.1.0"

from .exact import (BnbOptions, branch_and_bound, dominance_check, exhaustive_ground_state,
                    greedy_initial, ground_states)
from .heap import GainContainer, apply_move_and_update, compute_gains, select_best_move
from .lattice import generate_lattice
from .local import PassTrace, local_search, multi_start, run_pass
from .model import (Hardness, InstanceClass, SpinSystem, bond_satisfied, classify_hardness,
                    energy, energy_lower_bound, flip_delta, global_flip, random_configuration)
from .report import SolveReport

__all__ = [
    "BnbOptions", "GainContainer", "Hardness", "InstanceClass", "PassTrace", "SolveReport",
    "SpinSystem", "apply_move_and_update", "bond_satisfied", "branch_and_bound",
    "classify_hardness", "compute_gains", "dominance_check", "energy", "energy_lower_bound",
    "exhaustive_ground_state", "flip_delta", "generate_lattice", "global_flip",
    "greedy_initial", "ground_states", "local_search", "multi_start", "random_configuration",
    "run_pass", "select_best_move",
]
