"""Total computable upper-bound functions ``n -> f(n)`` and their tail certificates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .encodings import gamma_encode, lex_index, lex_string, triple_decode
from .machine import DEFAULT_PROFILE, Halted, MachineProfile, frame, run_plain, run_prefix


@dataclass(frozen=True)
class TailCertificate:
    """``sum_{n > N(k)} 2^-f(n) <= 2^-k`` for every ``k``; ``N`` nondecreasing."""

    N: Callable[[int], int]
    note: str


class UpperBoundFunction:
    """A named total rule with a memo table.

    ``f(n)`` is indexed by naturals; a function of strings is read through
    the length-lex bijection, so ``f.of_string(x) == f(lex_index(x))``.
    """

    def __init__(self, name: str, rule: Callable[[int], int],
                 certificate: Optional[TailCertificate] = None):
        self.name = name
        self._rule = rule
        self.certificate = certificate
        self._memo: dict[int, int] = {}

    def __call__(self, n: int) -> int:
        try:
            return self._memo[n]
        except KeyError:
            pass
        if n < 0:
            raise ValueError("f is defined on naturals")
        value = self._rule(n)
        if value < 0:
            raise ValueError(f"{self.name}({n}) = {value} is negative")
        self._memo[n] = value
        return value

    def of_string(self, x: str) -> int:
        return self(lex_index(x))

    def __repr__(self) -> str:
        return f"UpperBoundFunction({self.name!r})"


# -- builtin rules ---------------------------------------------------------

def zero() -> UpperBoundFunction:
    return UpperBoundFunction("zero", lambda n: 0)


def constant(v: int) -> UpperBoundFunction:
    return UpperBoundFunction(f"const{v}", lambda n: v)


def twice_length_plus_two() -> UpperBoundFunction:
    """``f(n) = 2|lex_string(n)| + 2``; the full sum is 1/2.

    Strings of length ``L`` contribute ``2^-(L+2)`` in total, so everything
    after the last string of length ``L`` weighs ``2^-(L+2)``.
    """
    def N(k: int) -> int:
        L = max(k - 2, 0)
        return (1 << (L + 1)) - 2

    cert = TailCertificate(N, "block of length L weighs 2^-(L+2); tail after length L is 2^-(L+2)")
    return UpperBoundFunction("const2len", lambda n: 2 * len(lex_string(n)) + 2, cert)


def twice_log() -> UpperBoundFunction:
    """``f(n) = 2 ceil(log2(n + 2))``; the full sum is 1/2.

    The ``2^(j-1)`` values of ``n`` with ``ceil(log2(n+2)) = j`` weigh
    ``2^-(j+1)`` together, and ``n > 2^k`` forces ``j >= k + 1``.
    """
    cert = TailCertificate(lambda k: 1 << k, "blocks j >= k+1 weigh at most 2^-(k+1)")
    return UpperBoundFunction("log2", lambda n: 2 * (n + 1).bit_length(), cert)


def geometric() -> UpperBoundFunction:
    """``f(n) = n + 2``; the tail after ``N`` is exactly ``2^-(N+2)``."""
    cert = TailCertificate(lambda k: max(k - 2, 0), "tail after N is 2^-(N+2)")
    return UpperBoundFunction("geometric", lambda n: n + 2, cert)


def fallback_bound(x: str, p: str, t: int) -> int:
    """``ceil(2|x| + 2|p| + 2 log2(t + 2))`` in integer arithmetic."""
    return 2 * len(x) + 2 * len(p) + ((t + 2) ** 2 - 1).bit_length()


def solovay(profile: MachineProfile = DEFAULT_PROFILE) -> UpperBoundFunction:
    """The Solovay function over ``profile``.

    ``m`` decodes to ``(x, p, t)``; if ``p`` halts in prefix mode with output
    ``x`` after exactly ``t`` steps, using all of ``p``, the value is ``|p|``.
    Otherwise a coarse bound keeps the sum finite.
    """
    def rule(m: int) -> int:
        x, p, t = triple_decode(m)
        if t >= 1:
            res = run_prefix(profile, p, t)
            if (isinstance(res, Halted) and res.output == x
                    and res.consumed == len(p) and res.steps == t):
                return len(p)
        return fallback_bound(x, p, t)

    return UpperBoundFunction(f"solovay@{profile.fingerprint}", rule)


def from_bytecode(f_code: str, profile: MachineProfile = DEFAULT_PROFILE,
                  budget: Optional[int] = None) -> UpperBoundFunction:
    """``f(n)`` = index of the plain-mode output of ``F`` on ``gamma(n + 1)``.

    This is exactly the value SEARCH_GE compares against its threshold.
    """
    if budget is None:
        budget = profile.search_inner_budget
    header = frame(f_code)

    def rule(n: int) -> int:
        res = run_plain(profile, header + gamma_encode(n + 1), budget)
        if not isinstance(res, Halted):
            raise ValueError(f"bytecode rule did not halt on {n}: {res}")
        return lex_index(res.output)

    return UpperBoundFunction(f"bytecode:{len(f_code)}b", rule)


def from_table(state, fallback: Optional[int] = None) -> UpperBoundFunction:
    """``n -> K_s(lex_string(n))`` from an enumeration snapshot.

    Undiscovered entries use ``fallback``; without one they raise.
    """
    def rule(n: int) -> int:
        k = state.K.get(lex_string(n))
        if k is None:
            if fallback is None:
                raise ValueError(f"K_s undiscovered at {n}")
            return fallback
        return k

    return UpperBoundFunction(f"K_s@{state.watermark}", rule)


RULES: dict[str, Callable[[], UpperBoundFunction]] = {
    "zero": zero,
    "const2len": twice_length_plus_two,
    "log2": twice_log,
    "geometric": geometric,
    "solovay": solovay,
}


def by_name(name: str, profile: MachineProfile = DEFAULT_PROFILE) -> UpperBoundFunction:
    if name == "solovay":
        return solovay(profile)
    if name.startswith("const") and name[5:].isdigit():
        return constant(int(name[5:]))
    try:
        return RULES[name]()
    except KeyError:
        raise KeyError(f"unknown function rule {name!r}; known: {', '.join(sorted(RULES))}, constN") from None
