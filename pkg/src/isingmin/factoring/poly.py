"""Multilinear polynomials over +1/-1 spin variables.

A monomial is a frozenset of spin indices; multiplying two monomials takes the
symmetric difference of their sets because ``S * S = 1``.  Coefficients stay
as Python ints (or Fractions) so expansions are exact.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

from ..model import SpinSystem

Monomial = frozenset


def _check_coef(c):
    if isinstance(c, (bool, np.bool_)):
        raise TypeError("boolean coefficient")
    if isinstance(c, (int, np.integer)):
        return int(c)
    if isinstance(c, Rational):
        c = Fraction(c)
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, (float, np.floating)):
        return float(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class SpinPolynomial:
    """Immutable map from monomials to nonzero coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Iterable[int], object] | None = None):
        acc: dict[frozenset, object] = {}
        for mono, c in (terms or {}).items():
            key = frozenset()
            for i in ([mono] if isinstance(mono, (int, np.integer)) else mono):
                key = key ^ {int(i)}
            acc[key] = acc.get(key, 0) + _check_coef(c)
        self._terms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def constant(cls, c) -> "SpinPolynomial":
        return cls({(): c})

    @classmethod
    def spin(cls, i: int, c=1) -> "SpinPolynomial":
        return cls({(i,): c})

    @classmethod
    def bit(cls, i: int) -> "SpinPolynomial":
        """The 0/1 variable ``(1 - S_i) / 2``: 0 at S_i = +1, 1 at S_i = -1."""
        return cls({(): Fraction(1, 2), (i,): Fraction(-1, 2)})

    @property
    def terms(self) -> dict[frozenset, object]:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.sorted_terms())

    def coefficient(self, mono: Iterable[int] = ()) -> object:
        return self._terms.get(frozenset(int(i) for i in mono), 0)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], object]]:
        """Terms ordered by degree, then by sorted index tuple."""
        items = [(tuple(sorted(k)), v) for k, v in self._terms.items()]
        return sorted(items, key=lambda kv: (len(kv[0]), kv[0]))

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def variables(self) -> set[int]:
        return set().union(*self._terms) if self._terms else set()

    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self._terms.values())

    # arithmetic

    @staticmethod
    def _lift(other) -> "SpinPolynomial":
        return other if isinstance(other, SpinPolynomial) else SpinPolynomial.constant(other)

    def __add__(self, other):
        other = self._lift(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v
        return SpinPolynomial(acc)

    __radd__ = __add__

    def __neg__(self):
        return SpinPolynomial({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        acc: dict[frozenset, object] = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                k = ka ^ kb
                acc[k] = acc.get(k, 0) + va * vb
        return SpinPolynomial(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative int")
        out = SpinPolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, float, Fraction)):
            other = SpinPolynomial.constant(other)
        if not isinstance(other, SpinPolynomial):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    def scale(self, c) -> "SpinPolynomial":
        return self * c

    def evaluate(self, spins) -> object:
        """Value at a +1/-1 assignment (sequence indexed by spin, or a mapping)."""
        total = 0
        for k, v in self._terms.items():
            p = 1
            for i in k:
                p *= int(spins[i])
            total += v * p
        return total

    def to_system(self, num_spins: int | None = None, clamped=None) -> SpinSystem:
        """Spin system whose energy equals this polynomial.

        Energy is ``offset - sum J prod S - sum h S``, so the constant becomes
        the offset and every other coefficient is negated.
        """
        n = num_spins if num_spins is not None else max(self.variables(), default=-1) + 1
        h = np.zeros(n)
        edges = []
        offset = 0.0
        for mono, c in self.sorted_terms():
            c = float(c)
            if not mono:
                offset = c
            elif len(mono) == 1:
                h[mono[0]] = -c
            else:
                edges.append((mono, -c))
        return SpinSystem(n, h, edges, offset=offset, clamped=clamped)

    def __repr__(self):
        if not self._terms:
            return "SpinPolynomial(0)"
        parts = []
        for mono, c in self.sorted_terms():
            parts.append(f"{c}" + "".join(f"*S{i}" for i in mono))
        return "SpinPolynomial(" + " + ".join(parts) + ")"


def poly_add(a: SpinPolynomial, b: SpinPolynomial) -> SpinPolynomial:
    return a + b


def poly_multiply(a: SpinPolynomial, b: SpinPolynomial) -> SpinPolynomial:
    return a * b


def poly_square(a: SpinPolynomial) -> SpinPolynomial:
    return a * a
