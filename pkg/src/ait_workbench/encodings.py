"""Primitive bit-exact encodings.

Bit strings are plain ``str`` objects over the alphabet ``{'0', '1'}``; the
empty word is ``""``.  Naturals and bit strings are identified through the
length-lexicographic bijection ``ε, 0, 1, 00, 01, 10, 11, 000, ...``.
"""

from __future__ import annotations

from math import isqrt

from .errors import MalformedCode

BitString = str

EMPTY_SYMBOL = "ε"


def is_bitstring(value: object) -> bool:
    return isinstance(value, str) and value.strip("01") == ""


def lex_index(x: BitString) -> int:
    """Position of ``x`` in length-lexicographic order (``ε`` is 0)."""
    return (1 << len(x)) - 1 + (int(x, 2) if x else 0)


def lex_string(n: int) -> BitString:
    """Inverse of :func:`lex_index`."""
    if n < 0:
        raise ValueError(f"lex_string needs a natural, got {n}")
    # n + 1 written in binary is "1" followed by the string itself.
    return bin(n + 1)[3:]


def gamma_encode(n: int) -> BitString:
    """Elias gamma code: floor(log2 n) zeros, then n in binary."""
    if n < 1:
        raise ValueError(f"gamma code is defined for n >= 1, got {n}")
    digits = bin(n)[2:]
    return "0" * (len(digits) - 1) + digits


def gamma_length(n: int) -> int:
    return 2 * n.bit_length() - 1


def gamma_decode(stream: str, start: int = 0) -> tuple[int, int]:
    """Decode one gamma code from ``stream[start:]``.

    Returns ``(n, bits_consumed)``.
    """
    zeros = 0
    pos = start
    end = len(stream)
    while pos < end and stream[pos] == "0":
        zeros += 1
        pos += 1
    if pos + zeros + 1 > end:
        raise MalformedCode(
            f"gamma code at offset {start} needs {2 * zeros + 1} bits, "
            f"only {end - start} available"
        )
    value = int(stream[pos:pos + zeros + 1], 2)
    return value, 2 * zeros + 1


def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def triple_code(x: BitString, p: BitString, t: int) -> int:
    """The triple code ``<x, p, t>``: pairs (x, p) first, then with ``t``."""
    return cantor_pair(cantor_pair(lex_index(x), lex_index(p)), t)


def triple_decode(m: int) -> tuple[BitString, BitString, int]:
    inner, t = cantor_unpair(m)
    ix, ip = cantor_unpair(inner)
    return lex_string(ix), lex_string(ip), t


def show(x: BitString) -> str:
    """Human-facing rendering; the empty word prints as ``ε``."""
    return x if x else EMPTY_SYMBOL
