"""Integer factoring compiled to spin systems."""

from .encode import (ENCODERS, FactoringEncoding, ancilla_polynomial, decode_factors,
                     default_widths, direct_polynomial, encode, encode_ancilla, encode_direct,
                     is_consistent, truncate_encoding, truncate_hypercouplings)
from .poly import SpinPolynomial, poly_add, poly_multiply, poly_square

__all__ = [
    "ENCODERS", "FactoringEncoding", "SpinPolynomial", "ancilla_polynomial", "decode_factors",
    "default_widths", "direct_polynomial", "encode", "encode_ancilla", "encode_direct",
    "is_consistent", "poly_add", "poly_multiply", "poly_square", "truncate_encoding",
    "truncate_hypercouplings",
]
