"""Infinite binary sequences seen through finite prefixes."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path
from typing import Callable, Union

from .encodings import BitString


class SequenceSource:
    """A sequence with a prefix cache and a per-bit stability flag.

    ``kind`` is one of ``rule``, ``file``, ``alpha-of-f`` or ``omega-so-far``.
    Bits of an ``omega-so-far`` source may change when the enumeration
    advances, so they are all flagged unstable.
    """

    def __init__(self, kind: str, ident: str, extend: Callable[[int], BitString],
                 stable: bool = True, limit: int | None = None):
        self.kind = kind
        self.ident = ident
        self._extend = extend
        self._cache = ""
        self._stable = stable
        self.limit = limit

    def prefix(self, n: int) -> BitString:
        if self.limit is not None and n > self.limit:
            raise IndexError(f"{self.ident} has only {self.limit} bits")
        if n > len(self._cache):
            self._cache = self._extend(max(n, 2 * len(self._cache)))
        return self._cache[:n]

    def bit(self, i: int) -> str:
        return self.prefix(i + 1)[i]

    def stable(self, i: int) -> bool:
        return self._stable

    def __repr__(self) -> str:
        return f"SequenceSource({self.kind}:{self.ident})"


def _from_generator(gen_factory):
    def extend(n: int) -> str:
        out = []
        for b in gen_factory():
            if len(out) == n:
                break
            out.append(b)
        return "".join(out)
    return extend


def zeros() -> SequenceSource:
    return SequenceSource("rule", "zeros", lambda n: "0" * n)


def ones() -> SequenceSource:
    return SequenceSource("rule", "ones", lambda n: "1" * n)


def thue_morse() -> SequenceSource:
    return SequenceSource("rule", "thue-morse",
                          lambda n: "".join(str(bin(i).count("1") & 1) for i in range(n)))


def champernowne() -> SequenceSource:
    """Binary numerals 1, 10, 11, 100, ... concatenated."""
    def gen():
        i = 1
        while True:
            yield from format(i, "b")
            i += 1
    return SequenceSource("rule", "champernowne", _from_generator(gen))


def seeded(seed: int) -> SequenceSource:
    """Pseudo-random bits from a seeded generator (a computable rule)."""
    def extend(n: int) -> str:
        # whole 32-bit words keep shorter prefixes consistent with longer ones
        rng = random.Random(seed)
        words = (n + 31) // 32
        return "".join(format(rng.getrandbits(32), "032b") for _ in range(words))[:n]
    return SequenceSource("rule", f"seeded:{seed}", extend)


def from_bits(bits: BitString, ident: str = "literal") -> SequenceSource:
    """A finite prefix; asking beyond it raises ``IndexError``."""
    return SequenceSource("file", ident, lambda n: bits, limit=len(bits))


def from_file(path: Union[str, Path]) -> SequenceSource:
    """Text file of ``0``/``1`` characters; whitespace and ``#`` comment lines are ignored."""
    text = Path(path).read_text(encoding="ascii")
    bits = "".join(ch for line in text.splitlines() if not line.lstrip().startswith("#")
                   for ch in line if ch in "01")
    return from_bits(bits, f"file:{Path(path).name}")


def alpha_of(f) -> SequenceSource:
    """Certified binary digits of ``sum_n 2^-f(n)`` (needs a tail certificate)."""
    from .solovay import certified_bits
    return SequenceSource("alpha-of-f", f"alpha:{f.name}", lambda n: certified_bits(f, n))


def dyadic_bits(q: Fraction, n: int) -> BitString:
    """First ``n`` binary digits of ``q`` in ``[0, 1)``; bit ``i`` weighs ``2^-(i+1)``."""
    if not 0 <= q < 1:
        raise ValueError("expected a value in [0, 1)")
    w = (q.numerator << n) // q.denominator
    return format(w, f"0{n}b") if n else ""


def omega_so_far(state) -> SequenceSource:
    """Binary digits of the current halting-probability approximation; never stable."""
    q = state.omega()
    return SequenceSource("omega-so-far", f"omega@{state.watermark}",
                          lambda n: dyadic_bits(q, n), stable=False)


NAMED = {
    "zeros": zeros,
    "ones": ones,
    "thue-morse": thue_morse,
    "champernowne": champernowne,
}


def by_spec(spec: str, state=None, profile=None) -> SequenceSource:
    """Parse a source spec: a rule name, ``file:PATH``, ``seeded:N``, ``alpha:RULE`` or ``omega``."""
    if spec in NAMED:
        return NAMED[spec]()
    kind, _, arg = spec.partition(":")
    if kind == "file":
        return from_file(arg)
    if kind == "seeded":
        return seeded(int(arg))
    if kind == "alpha":
        from .functions import by_name
        return alpha_of(by_name(arg))
    if kind == "omega":
        if state is None:
            raise ValueError("omega source needs an enumeration state")
        return omega_so_far(state)
    raise KeyError(f"unknown source spec {spec!r}")
