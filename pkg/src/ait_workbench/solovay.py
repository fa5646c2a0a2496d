"""Partial sums, gap statistics, certified digits and the Berry search.

Every statistic that involves ``K_s`` is one-sided: ``K_s`` only bounds
``K`` from above, so a gap ``f - K_s`` under-estimates ``f - K``.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .encodings import BitString, gamma_length, lex_string, show
from .errors import BoundaryAmbiguity, ResourceLimit, SearchBudgetExceeded, UndiscoveredPrefix
from .functions import UpperBoundFunction
from .machine import DEFAULT_PROFILE, Halted, MachineProfile, run_prefix
from .programs import berry_program

GUARD_BITS = 64
MAX_TERMS = 1 << 22


# -- sums --------------------------------------------------------------------

class DyadicSum:
    """Exact ``sum 2^-v`` kept as a count per exponent."""

    def __init__(self):
        self.counts: Counter[int] = Counter()

    def add(self, v: int) -> None:
        self.counts[v] += 1

    def value(self) -> Fraction:
        if not self.counts:
            return Fraction(0)
        top = max(self.counts)
        return Fraction(sum(c << (top - v) for v, c in self.counts.items()), 1 << top)


def alpha_approx(f: UpperBoundFunction, N: int) -> Fraction:
    """``sum_{n <= N} 2^-f(n)`` exactly."""
    acc = DyadicSum()
    for n in range(N + 1):
        acc.add(f(n))
    return acc.value()


def partial_sums(f: UpperBoundFunction, checkpoints: Iterable[int]) -> list[tuple[int, Fraction]]:
    """Exact partial sums at increasing checkpoints, in one pass."""
    acc = DyadicSum()
    out = []
    n = 0
    for M in sorted(checkpoints):
        while n <= M:
            acc.add(f(n))
            n += 1
        out.append((M, acc.value()))
    return out


@dataclass(frozen=True)
class Membership:
    N: int
    partial_sum: Fraction
    certified: bool
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None


def membership_check(f: UpperBoundFunction, N: int, k: Optional[int] = None) -> Membership:
    """Exact partial sum up to ``N``; with a certificate, an enclosure of the full sum.

    With ``k`` given, the partial sum is taken to ``max(N, N(k))`` so the
    enclosure width is at most ``2^-k``.
    """
    cert = f.certificate
    if cert is None:
        return Membership(N, alpha_approx(f, N), False)
    if k is None:
        k = 0
        while cert.N(k + 1) <= N:
            k += 1
    top = max(N, cert.N(k))
    s = alpha_approx(f, top)
    return Membership(top, s, True, s, s + Fraction(1, 1 << k))


def certified_bits(f: UpperBoundFunction, k: int, max_terms: int = MAX_TERMS) -> BitString:
    """First ``k`` binary digits of ``sum_n 2^-f(n)``, valid under the certificate.

    A prefix ``w`` is returned only when the whole enclosure ``[lo, hi]`` lies
    in the closed dyadic interval ``[0.w, 0.w + 2^-k]``.  Guard precisions up
    to ``k + 64`` are tried (fewer if the certificate would need more than
    ``max_terms`` terms) before giving up.
    """
    if f.certificate is None:
        raise ValueError(f"{f.name} has no tail certificate")
    if k == 0:
        return ""
    if f.certificate.N(k) > max_terms:
        raise ResourceLimit(f"certificate needs {f.certificate.N(k) + 1} terms at precision {k}")
    guard = k
    for guard in range(k, k + GUARD_BITS + 1):
        if f.certificate.N(guard) > max_terms:
            break
        enc = membership_check(f, 0, guard)
        lo, hi = enc.lower, enc.upper
        w = (lo.numerator << k) // lo.denominator
        if hi * (1 << k) <= w + 1:
            if w >> k:
                raise ValueError("sum exceeds 1; no binary expansion below 1")
            return format(w, f"0{k}b")
    raise BoundaryAmbiguity(
        f"enclosure of {f.name} still straddles a multiple of 2^-{k} at guard precision {guard}")


# -- gaps ------------------------------------------------------------------

@dataclass
class GapReport:
    """Per-``m`` gap ``f(m) - K_s(lex_string(m))`` and its running minimum."""

    function: str
    fingerprint: str
    watermark: int
    rows: list[tuple[int, int, Optional[int], Optional[int], Optional[int]]] = field(default_factory=list)
    undiscovered: int = 0

    @property
    def running_min(self) -> Optional[int]:
        return self.rows[-1][4] if self.rows else None

    def csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# gap f={self.function} profile={self.fingerprint} stage={self.watermark} "
                  f"undiscovered={self.undiscovered} direction=evidence-only\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "f", "K_s", "gap", "running_min"])
        for row in self.rows:
            writer.writerow(["" if v is None else v for v in row])
        return buf.getvalue()


def gap_points(f: UpperBoundFunction, state, ms: Iterable[int]) -> GapReport:
    rep = GapReport(f.name, state.fingerprint, state.watermark)
    best = None
    for m in ms:
        fm = f(m)
        k = state.K.get(lex_string(m))
        gap = None if k is None else fm - k
        if gap is None:
            rep.undiscovered += 1
        elif best is None or gap < best:
            best = gap
        rep.rows.append((m, fm, k, gap, best))
    return rep


def gap_table(f: UpperBoundFunction, state, M: int) -> GapReport:
    return gap_points(f, state, range(M + 1))


def shift_and_patch(f: UpperBoundFunction, c: int, N0: int, state) -> UpperBoundFunction:
    """``K_s(n)`` below ``N0``, ``max(f(n) - c, 0)`` from ``N0`` on."""
    patched = {}
    for n in range(N0):
        k = state.K.get(lex_string(n))
        if k is None:
            raise UndiscoveredPrefix(f"K_s({show(lex_string(n))}) is undiscovered at stage {state.watermark}")
        patched[n] = k

    def rule(n: int) -> int:
        if n < N0:
            return patched[n]
        return max(f(n) - c, 0)

    return UpperBoundFunction(f"patch({f.name},c={c},N0={N0})", rule)


def patch_violations(g: UpperBoundFunction, state, M: int) -> list[int]:
    """Indices ``m <= M`` with discovered ``K_s`` where ``g(m) < K_s(m)``."""
    out = []
    for m in range(M + 1):
        k = state.K.get(lex_string(m))
        if k is not None and g(m) < k:
            out.append(m)
    return out


# -- Berry ---------------------------------------------------------------

def berry_x(f: UpperBoundFunction, n: int, limit: int = 1 << 20) -> BitString:
    """Length-lex first ``x`` with ``f(x) >= n``, scanning at most ``limit`` strings."""
    for i in range(limit):
        if f(i) >= n:
            return lex_string(i)
    raise SearchBudgetExceeded(f"no x among the first {limit} strings has {f.name}(x) >= {n}")


def berry_length(f_code: BitString, n: int) -> int:
    return 12 + len(f_code) + gamma_length(len(f_code)) + gamma_length(n)


@dataclass(frozen=True)
class BerryRow:
    n: int
    x: BitString
    f_x: int
    bound: int
    C_s: Optional[int]
    K_s: Optional[int]
    machine_output: Optional[BitString]

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.f_x, self.bound)


def ratio_table(f: UpperBoundFunction, f_code: BitString, ns: Sequence[int], state=None,
                profile: MachineProfile = DEFAULT_PROFILE, run_budget: int = 1 << 40,
                limit: int = 1 << 40) -> list[BerryRow]:
    """One row per ``n``: the Berry string, its ``f`` value and the constructive bound.

    The Berry program is executed on the machine and its output recorded, so
    callers can check it against the host-side search.
    """
    rows = []
    for n in ns:
        prog = berry_program(f_code, n)
        res = run_prefix(profile, prog, run_budget)
        out = res.output if isinstance(res, Halted) and res.consumed == len(prog) else None
        x = out if out is not None else berry_x(f, n, limit)
        c_s = k_s = None
        if state is not None:
            c_s, k_s = state.C.get(x), state.K.get(x)
        rows.append(BerryRow(n, x, f.of_string(x), len(prog), c_s, k_s, out))
    return rows


def ratio_csv(rows: Sequence[BerryRow], f_code: BitString, fingerprint: str,
              watermark: Optional[int]) -> str:
    buf = io.StringIO()
    buf.write(f"# berry profile={fingerprint} stage={'' if watermark is None else watermark} "
              f"F_bits={len(f_code)} gamma_F_bits={gamma_length(len(f_code))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "x_n", "f_x", "C_s", "K_s", "bound", "ratio"])
    for r in rows:
        writer.writerow([r.n, show(r.x), r.f_x, "" if r.C_s is None else r.C_s,
                         "" if r.K_s is None else r.K_s, r.bound, f"{r.ratio.numerator}/{r.ratio.denominator}"])
    return buf.getvalue()
