"""Output distributions of the local search on factoring encodings."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..exact import ground_states
from ..local import run_starts
from .encode import FactoringEncoding, decode_factors, encode


@dataclass
class FactorSample:
    start_index: int
    seed: int
    x: int
    y: int
    penalty: float
    energy: float

    @property
    def product(self) -> int:
        return self.x * self.y

    @property
    def consistent(self) -> bool:
        return self.penalty == 0.0


@dataclass
class FactoringResult:
    N: int
    encoder: str
    num_starts: int
    seed: int
    n_x: int
    n_y: int
    num_spins: int
    num_free: int
    samples: list = field(repr=False)

    @property
    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(s.product for s in self.samples).items()))

    @property
    def success_probability(self) -> float:
        return sum(s.product == self.N for s in self.samples) / len(self.samples)

    @property
    def consistent_fraction(self) -> float:
        return sum(s.consistent for s in self.samples) / len(self.samples)

    @property
    def entropy(self) -> float:
        """Shannon entropy, in bits, of the decoded products."""
        return product_entropy(self.histogram)

    def distribution_rows(self) -> list[tuple[int, int, float, bool]]:
        total = len(self.samples)
        return [(p, c, c / total, p == self.N) for p, c in self.histogram.items()]

    def summary(self) -> dict:
        return {
            "N": self.N,
            "encoder": self.encoder,
            "num_starts": self.num_starts,
            "seed": self.seed,
            "n_x": self.n_x,
            "n_y": self.n_y,
            "num_spins": self.num_spins,
            "num_free": self.num_free,
            "success_probability": self.success_probability,
            "consistent_fraction": self.consistent_fraction,
            "entropy_bits": self.entropy,
            "distinct_products": len(self.histogram),
        }


def product_entropy(histogram: dict) -> float:
    counts = np.array(list(histogram.values()), dtype=float)
    if counts.sum() == 0:
        return 0.0
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum()) + 0.0  # no negative zero


def factoring_experiment(N: int, encoder: str = "direct", num_starts: int = 100, seed: int = 0,
                         n_x: int | None = None, n_y: int | None = None, max_arity: int = 2,
                         max_workers: int | None = 1) -> FactoringResult:
    """One local search per start on the chosen encoding, each decoded to (x, y)."""
    enc = encode(N, encoder, n_x, n_y, max_arity)
    return run_encoding(enc, num_starts, seed, max_workers)


def run_encoding(enc: FactoringEncoding, num_starts: int, seed: int = 0,
                 max_workers: int | None = 1) -> FactoringResult:
    results = run_starts(enc.system, num_starts, seed, max_workers)
    samples = []
    for st, rep in results:
        x, y, pen = decode_factors(enc, rep.best_config)
        samples.append(FactorSample(st.start_index, st.seed, x, y, pen, rep.best_energy))
    return FactoringResult(enc.N, enc.kind, num_starts, seed, enc.n_x, enc.n_y,
                           enc.num_spins, enc.num_free, samples)


def ground_set_factors(enc: FactoringEncoding) -> list[tuple[int, int]]:
    """Decoded (x, y) of every ground state, by full enumeration."""
    return [decode_factors(enc, c)[:2] for c in ground_states(enc.system)]


def ground_set_success(enc: FactoringEncoding) -> float:
    """Fraction of ground states that decode to a factorization of N."""
    pairs = ground_set_factors(enc)
    return sum(x * y == enc.N for x, y in pairs) / len(pairs)

