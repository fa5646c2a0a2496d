"""Online Kraft-Chaitin allocation.

Free space is a list of aligned dyadic intervals ``[a/2^e, (a+1)/2^e)``
sorted by left endpoint.  A request for length ``k`` takes the leftmost
interval of size at least ``2^-k`` and keeps splitting off its left half
until the size is ``2^-k``; the unused right halves stay free.

Free sizes are distinct and increase from left to right after every
request, so the leftmost fitting interval is also the smallest one, and a
request fails only when the free weight really is below ``2^-k``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .codetree import CodeTree
from .errors import InsufficientBudget
from .functions import UpperBoundFunction
from .machine import DEFAULT_PROFILE, MachineProfile
from .programs import tree_decode_overhead, tree_decode_program


class Allocator:
    """Issues prefix-free codewords of requested lengths, total weight at most 1."""

    def __init__(self):
        self.free: list[tuple[int, int]] = [(0, 0)]  # (a, e) for [a/2^e, (a+1)/2^e)
        self.issued: list[tuple[str, int]] = []

    def request(self, k: int, payload: int) -> str:
        if k < 0:
            raise ValueError("codeword length must be >= 0")
        for i, (a, e) in enumerate(self.free):
            if e <= k:
                break
        else:
            raise InsufficientBudget(
                f"no free interval of size 2^-{k}; free weight is {self.free_weight()}")
        pieces = []
        while e < k:
            a, e = 2 * a, e + 1
            pieces.append((a + 1, e))
        pieces.reverse()
        self.free[i:i + 1] = pieces
        word = format(a, f"0{k}b") if k else ""
        self.issued.append((word, payload))
        return word

    def free_weight(self) -> Fraction:
        return sum((Fraction(1, 1 << e) for _, e in self.free), Fraction(0))

    def issued_weight(self) -> Fraction:
        return sum((Fraction(1, 1 << len(w)) for w, _ in self.issued), Fraction(0))

    def tree(self) -> CodeTree:
        return CodeTree.from_codewords(self.issued)


def exact_weight(f: UpperBoundFunction, N: int) -> Fraction:
    """``sum_{n <= N} 2^-f(n)`` exactly."""
    values = [f(n) for n in range(N + 1)]
    top = max(values, default=0)
    return Fraction(sum(1 << (top - v) for v in values), 1 << top)


class CompiledCode:
    """A compiled upper-bound function: tree, registered profile and overhead."""

    def __init__(self, tree: CodeTree, profile: MachineProfile, r: int, codewords: dict[int, str]):
        self.tree = tree
        self.profile = profile
        self.r = r
        self.codewords = codewords
        self.overhead = tree_decode_overhead(r)

    def program(self, n: int) -> str:
        return tree_decode_program(self.r, self.codewords[n])


def compile_function(f: UpperBoundFunction, c: int, N: int,
                     profile: Optional[MachineProfile] = None) -> CompiledCode:
    """Request ``(f(n) + c, n)`` for ``n = 0..N`` and register the tree.

    The weight check ``sum 2^-f(n) <= 2^c`` is exact and done up front.
    """
    if profile is None:
        profile = DEFAULT_PROFILE
    weight = exact_weight(f, N)
    if c < 0:
        raise ValueError("c must be a natural number")
    if weight > (1 << c):
        raise InsufficientBudget(f"sum of 2^-f(n) for n <= {N} is {weight} > 2^{c}")
    alloc = Allocator()
    codewords = {n: alloc.request(f(n) + c, n) for n in range(N + 1)}
    tree = alloc.tree()
    new_profile, r = profile.with_tree(tree)
    return CompiledCode(tree, new_profile, r, codewords)
