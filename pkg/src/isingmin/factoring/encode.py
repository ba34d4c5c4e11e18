"""Factoring ``N = x * y`` as a spin-system ground-state problem.

Bits and spins share one convention everywhere: bit ``b = (1 - S) / 2``, so
``S = +1`` reads as 0 and ``S = -1`` as 1.  Both factors are odd, so their
lowest bits are fixed at 1 and carry no spin.

Direct encoding
    ``f(x, y) = (N - x y)^2`` expanded over the free bits of ``x`` and ``y``.
    It contains terms of up to four spins and is zero exactly at the
    factorizations that fit the bit widths.

Ancilla encoding
    Long-hand multiplication with pairwise terms only.  Partial products
    ``a[i][j] = x_i y_j`` get their own spins ``p[i][j]`` (``i, j >= 1``) tied
    to the factor bits by the penalty ``3p + x y - 2 p x - 2 p y``, which is 0
    when ``p = x y`` and at least 1 otherwise.  Row and column 0 need no
    ancilla because ``x_0 = y_0 = 1``.

    Column ``k`` must satisfy::

        sum_{i+j=k} a[i][j] + (carries into k) = m_k + sum_{t=1..r_k} 2^t c[k][t]

    where ``m_k`` is bit ``k`` of ``N`` (a clamped spin) and ``c[k][t]`` is a
    carry worth one unit in column ``k + t``.  ``r_k`` is the fewest carries
    able to absorb the largest possible left side ``V_k``, namely
    ``bitlen(V_k) - 1``.  Columns continue past the product width until no
    carry is pending and all bits of ``N`` are covered.  The penalty is the
    sum of squared column residuals plus the AND penalties, multiplied by 4
    so that every coefficient is an integer.

Spin layout: x bits from n_x-1 down to 1, then y bits from n_y-1 down to 1,
then (ancilla only) partial products row-major, carries by column, and
finally the bits of N.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..model import EXACT_LIMIT, SpinSystem, as_configuration, energy
from .poly import SpinPolynomial

ENCODERS = ("direct", "ancilla", "truncated")


@dataclass(frozen=True)
class FactoringEncoding:
    N: int
    n_x: int
    n_y: int
    kind: str
    system: SpinSystem
    spin_roles: dict = field(repr=False)   # spin -> ("x", k) | ("y", k) | ("p", i, j) | ("c", k, t) | ("m", k)
    x_spins: tuple                         # spin of x bit k is x_spins[k - 1]
    y_spins: tuple
    polynomial: SpinPolynomial | None = field(default=None, repr=False)

    @property
    def num_spins(self) -> int:
        return self.system.num_spins

    @property
    def num_free(self) -> int:
        return self.system.num_free


def default_widths(N: int) -> tuple[int, int]:
    """``(ceil(L/2), L-1)`` for ``L = bitlen(N)``: the smaller factor of an odd
    composite has at most ceil(L/2) bits and the larger one at most L-1."""
    L = int(N).bit_length()
    return (L + 1) // 2, L - 1


def _check(N, n_x, n_y):
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise TypeError("N must be an integer")
    N = int(N)
    if N % 2 == 0:
        raise ValueError(f"N = {N} is even")
    if N < 9:
        raise ValueError(f"N = {N} is too small (need N >= 9)")
    dx, dy = default_widths(N)
    n_x = dx if n_x is None else int(n_x)
    n_y = dy if n_y is None else int(n_y)
    if n_x < 1 or n_y < 1:
        raise ValueError("bit widths must be at least 1")
    if n_x + n_y < N.bit_length():
        raise ValueError(f"widths {n_x}+{n_y} cannot represent N = {N}")
    return N, n_x, n_y


def _bit_spins(n_x, n_y):
    """Spins of bits 1.. of x and of y.  Each factor's bits occupy consecutive
    spins from most to least significant, x first."""
    xs = tuple(range(n_x - 2, -1, -1))
    ys = tuple(range(n_x + n_y - 3, n_x - 2, -1))
    return xs, ys


def _factor_poly(spins) -> SpinPolynomial:
    """``1 + sum_k 2^k b_k`` over the given bit spins (bits 1, 2, ...)."""
    p = SpinPolynomial.constant(1)
    for k, s in enumerate(spins, start=1):
        p = p + SpinPolynomial.bit(s) * (2 ** k)
    return p


def _warn_if_inexact(system: SpinSystem, what: str):
    if system.weight_scale >= EXACT_LIMIT:
        warnings.warn(f"{what}: coefficient magnitudes reach {system.weight_scale:.3g}; "
                      "float64 energies are no longer exact", RuntimeWarning, stacklevel=3)


def direct_polynomial(N: int, n_x: int | None = None, n_y: int | None = None) -> SpinPolynomial:
    N, n_x, n_y = _check(N, n_x, n_y)
    xs, ys = _bit_spins(n_x, n_y)
    return (N - _factor_poly(xs) * _factor_poly(ys)) ** 2


def encode_direct(N: int, n_x: int | None = None, n_y: int | None = None) -> FactoringEncoding:
    """Hyper-coupling encoding with ``(n_x - 1) + (n_y - 1)`` spins."""
    N, n_x, n_y = _check(N, n_x, n_y)
    poly = direct_polynomial(N, n_x, n_y)
    xs, ys = _bit_spins(n_x, n_y)
    n = len(xs) + len(ys)
    system = poly.to_system(n)
    _warn_if_inexact(system, f"direct encoding of {N}")
    roles = {s: ("x", k) for k, s in enumerate(xs, 1)}
    roles.update({s: ("y", k) for k, s in enumerate(ys, 1)})
    return FactoringEncoding(N, n_x, n_y, "direct", system, roles, xs, ys, poly)


def ancilla_polynomial(N: int, n_x: int | None = None, n_y: int | None = None):
    """Scaled penalty polynomial, spin roles, and the clamp map of N's bits."""
    N, n_x, n_y = _check(N, n_x, n_y)
    roles: dict[int, tuple] = {}
    counter = 0

    def new(role):
        nonlocal counter
        roles[counter] = role
        counter += 1
        return counter - 1

    xs = [new(("x", k)) for k in range(n_x - 1, 0, -1)][::-1]
    ys = [new(("y", k)) for k in range(n_y - 1, 0, -1)][::-1]
    one = SpinPolynomial.constant(1)
    xbit = [one] + [SpinPolynomial.bit(s) for s in xs]
    ybit = [one] + [SpinPolynomial.bit(s) for s in ys]

    penalty = SpinPolynomial()
    a = {}
    for i in range(n_x):
        for j in range(n_y):
            if i == 0:
                a[i, j] = ybit[j]
            elif j == 0:
                a[i, j] = xbit[i]
            else:
                p = SpinPolynomial.bit(new(("p", i, j)))
                a[i, j] = p
                penalty = penalty + 3 * p + xbit[i] * ybit[j] - 2 * p * xbit[i] - 2 * p * ybit[j]

    incoming: dict[int, list[SpinPolynomial]] = {}
    columns = []
    k = 0
    width = n_x + n_y - 1
    while k < width or incoming.get(k) or k < N.bit_length():
        terms = [a[i, k - i] for i in range(max(0, k - n_y + 1), min(k, n_x - 1) + 1)] if k < width else []
        carries_in = incoming.pop(k, [])
        v_max = len(terms) + len(carries_in)
        r = max(0, v_max.bit_length() - 1)
        carries_out = []
        for t in range(1, r + 1):
            c = SpinPolynomial.bit(new(("c", k, t)))
            carries_out.append((t, c))
            incoming.setdefault(k + t, []).append(c)
        columns.append((k, terms, carries_in, carries_out))
        k += 1

    clamp = {}
    for k, terms, carries_in, carries_out in columns:
        m = new(("m", k))
        clamp[m] = -1 if (N >> k) & 1 else 1
        lhs = sum(terms + carries_in, SpinPolynomial())
        rhs = SpinPolynomial.bit(m) + sum((c * (2 ** t) for t, c in carries_out), SpinPolynomial())
        penalty = penalty + (lhs - rhs) ** 2
    scaled = penalty * 4
    assert scaled.is_integral()
    return scaled, roles, clamp, tuple(xs), tuple(ys), n_x, n_y


def encode_ancilla(N: int, n_x: int | None = None, n_y: int | None = None) -> FactoringEncoding:
    """Pairwise penalty encoding; N's bits are clamped spins."""
    poly, roles, clamp, xs, ys, n_x, n_y = ancilla_polynomial(N, n_x, n_y)
    system = poly.to_system(len(roles), clamped=clamp)
    _warn_if_inexact(system, f"ancilla encoding of {N}")
    return FactoringEncoding(int(N), n_x, n_y, "ancilla", system, roles, xs, ys, poly)


def truncate_hypercouplings(system: SpinSystem, max_arity: int) -> SpinSystem:
    """Copy of ``system`` without edges of more than ``max_arity`` spins."""
    if max_arity < 2:
        raise ValueError("max_arity must be at least 2")
    keep = np.flatnonzero(system.arities <= max_arity)
    lens = system.arities[keep]
    ptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
    spins = (np.concatenate([system.edge_spins[system.edge_ptr[e]:system.edge_ptr[e + 1]] for e in keep])
             if len(keep) else np.zeros(0, dtype=np.int64))
    return SpinSystem.from_arrays(system.num_spins, system.h, ptr, spins, system.J[keep],
                                  offset=system.offset, clamped=system.clamped)


def truncate_encoding(enc: FactoringEncoding, max_arity: int = 2) -> FactoringEncoding:
    return FactoringEncoding(enc.N, enc.n_x, enc.n_y, "truncated",
                             truncate_hypercouplings(enc.system, max_arity),
                             enc.spin_roles, enc.x_spins, enc.y_spins, None)


def encode(N: int, encoder: str, n_x: int | None = None, n_y: int | None = None,
           max_arity: int = 2) -> FactoringEncoding:
    if encoder == "direct":
        return encode_direct(N, n_x, n_y)
    if encoder == "ancilla":
        return encode_ancilla(N, n_x, n_y)
    if encoder == "truncated":
        return truncate_encoding(encode_direct(N, n_x, n_y), max_arity)
    raise ValueError(f"encoder must be one of {ENCODERS}")


def _read_factor(config, spins) -> int:
    v = 1
    for k, s in enumerate(spins, start=1):
        if config[s] == -1:
            v |= 1 << k
    return v


def decode_factors(enc: FactoringEncoding, config) -> tuple[int, int, float]:
    """``(x, y, penalty)``; penalty is the configuration's energy in the
    encoding's system, computed with integers for the direct encoding."""
    cfg = as_configuration(enc.system, config)
    x = _read_factor(cfg, enc.x_spins)
    y = _read_factor(cfg, enc.y_spins)
    if enc.kind == "direct":
        return x, y, float((enc.N - x * y) ** 2)
    return x, y, energy(enc.system, cfg)


def is_consistent(enc: FactoringEncoding, config) -> bool:
    """True when every constraint of the encoding holds (zero penalty)."""
    return decode_factors(enc, config)[2] == 0.0
