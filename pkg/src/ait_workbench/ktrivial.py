"""The request-set strategy for sequences whose prefixes are cheap relative to ``g``.

For each ``n`` the strategy adopts the current value ``v = K_s(n)`` and a
witness ``m = <lex_string(n), p, t>`` from the program achieving it.  Every
string ``w`` of length ``m`` with ``K_s(w) <= g(m) + c`` yields a request
``(w | n, v)``, at most ``d`` per assumption.  When ``K_s(n)`` drops the
strategy restarts with the new witness.  Requests are never withdrawn.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from .codetree import CodeTree
from .encodings import BitString, lex_index, lex_string, triple_code
from .errors import CorruptLedger, InsufficientBudget, InvalidStream
from .functions import UpperBoundFunction, solovay
from .kraft_chaitin import Allocator
from .machine import DEFAULT_PROFILE


@dataclass(frozen=True)
class AssumptionEvent:
    """``K_s(n)`` is now ``value``, witnessed by ``m``."""

    stage: int
    n: int
    value: int
    m: int


@dataclass(frozen=True)
class CandidateEvent:
    """``K_s(w)`` is now at most ``k``."""

    stage: int
    w: BitString
    k: int


Event = Union[AssumptionEvent, CandidateEvent]


@dataclass
class StrategyState:
    value: int
    m: int
    emitted: int = 0
    capped: bool = False
    restarts: int = 0


@dataclass(frozen=True)
class Request:
    n: int
    k: int
    w: BitString
    stage: int


@dataclass
class RequestLedger:
    requests: list[Request] = field(default_factory=list)
    _seen: set[tuple[BitString, int]] = field(default_factory=set)
    counters: dict[tuple[int, int], int] = field(default_factory=dict)

    def add(self, req: Request) -> bool:
        key = (req.w, req.k)
        if key in self._seen:
            return False
        self._seen.add(key)
        self.requests.append(req)
        self.counters[(req.n, req.k)] = self.counters.get((req.n, req.k), 0) + 1
        return True

    def __contains__(self, pair: object) -> bool:
        return pair in self._seen

    def __len__(self) -> int:
        return len(self.requests)

    def pairs(self) -> list[tuple[BitString, int]]:
        return [(r.w, r.k) for r in self.requests]

    def dumps(self) -> str:
        lines = ["# ktriv-ledger n k w stage"]
        lines.extend(f"{r.n} {r.k} {r.w} {r.stage}" for r in self.requests)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RequestLedger":
        ledger = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line or line.startswith("#"):
                continue
            parts = line.split(" ")
            if len(parts) != 4 or parts[2].strip("01"):
                raise CorruptLedger(f"line {lineno}: expected 'n k w stage', got {line!r}")
            try:
                n, k, stage = int(parts[0]), int(parts[1]), int(parts[3])
            except ValueError as exc:
                raise CorruptLedger(f"line {lineno}: {exc}") from exc
            if len(parts[2]) != n:
                raise CorruptLedger(f"line {lineno}: |w| != n")
            ledger.add(Request(n, k, parts[2], stage))
        return ledger


@dataclass
class StrategyResult:
    ledger: RequestLedger
    states: dict[int, StrategyState]
    drops: int
    cap_hits: int

    def summary_csv(self, d: int, c: int) -> str:
        buf = io.StringIO()
        buf.write(f"# ktriv summary d={d} c={c} weight={ledger_weight(self.ledger)} "
                  f"requests={len(self.ledger)} drops={self.drops} cap_hits={self.cap_hits}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "value", "m", "emitted", "capped", "restarts"])
        for n in sorted(self.states):
            st = self.states[n]
            writer.writerow([n, st.value, st.m, st.emitted, int(st.capped), st.restarts])
        return buf.getvalue()


def run_strategy(stream: Iterable[Event], alpha, c: int, d: int, n_max: int,
                 g: Optional[UpperBoundFunction] = None) -> StrategyResult:
    """Run the per-``n`` strategies over ``stream``.

    ``alpha`` is accepted for provenance; candidates come from the stream.
    ``g`` defaults to the Solovay function over the default profile.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if g is None:
        g = solovay(DEFAULT_PROFILE)
    ledger = RequestLedger()
    states: dict[int, StrategyState] = {}
    pool: dict[int, dict[BitString, int]] = {}  # length -> w -> best K_s(w)
    by_m: dict[int, set[int]] = {}  # witness length -> n using it
    drops = cap_hits = 0

    def offer(n: int, w: BitString, k: int, stage: int) -> None:
        nonlocal cap_hits
        st = states[n]
        if st.capped or len(w) < n or k > g(st.m) + c:
            return
        if ledger.add(Request(n, st.value, w[:n], stage)):
            st.emitted += 1
            if st.emitted == d:
                st.capped = True
                cap_hits += 1

    for ev in stream:
        if isinstance(ev, AssumptionEvent):
            if ev.n > n_max:
                continue
            st = states.get(ev.n)
            if st is not None:
                if ev.value >= st.value:
                    raise InvalidStream(
                        f"K_s({ev.n}) went from {st.value} to {ev.value} at stage {ev.stage}")
                by_m[st.m].discard(ev.n)
                states[ev.n] = StrategyState(ev.value, ev.m, restarts=st.restarts + 1)
                drops += 1
            else:
                states[ev.n] = StrategyState(ev.value, ev.m)
            by_m.setdefault(ev.m, set()).add(ev.n)
            for w, k in sorted(pool.get(ev.m, {}).items()):
                offer(ev.n, w, k, ev.stage)
        else:
            known = pool.setdefault(len(ev.w), {})
            prev = known.get(ev.w)
            if prev is not None and ev.k >= prev:
                raise InvalidStream(f"K_s({ev.w}) did not decrease at stage {ev.stage}")
            known[ev.w] = ev.k
            for n in sorted(by_m.get(len(ev.w), ())):
                offer(n, ev.w, ev.k, ev.stage)
    return StrategyResult(ledger, states, drops, cap_hits)


def ledger_weight(ledger: RequestLedger) -> Fraction:
    if not ledger.requests:
        return Fraction(0)
    top = max(r.k for r in ledger.requests)
    return Fraction(sum(1 << (top - r.k) for r in ledger.requests), 1 << top)


def headroom(d: int) -> int:
    """``ceil(log2(2d))``."""
    return (2 * d - 1).bit_length()


def compile_ledger(ledger: RequestLedger, e: int) -> tuple[CodeTree, dict[tuple[BitString, int], str]]:
    """Allocate ``(k + e, w)`` for every request, in ledger order.

    Leaves carry ``lex_index(w)``, so the machine's tree decoder prints ``w``.
    """
    if ledger_weight(ledger) > (1 << e):
        raise InsufficientBudget(f"ledger weight {ledger_weight(ledger)} exceeds 2^{e}")
    alloc = Allocator()
    words = {}
    for r in ledger.requests:
        words[(r.w, r.k)] = alloc.request(r.k + e, lex_index(r.w))
    return alloc.tree(), words


# -- streams -----------------------------------------------------------------

def live_stream(state, n_max: int) -> Iterator[Event]:
    """Events replayed from an enumeration state in stage order.

    Each time ``K_s`` of some output improves, a candidate event is emitted;
    if that output is ``lex_string(n)`` with ``n <= n_max``, an assumption
    event with the new witness follows.
    """
    best: dict[BitString, int] = {}
    names = {lex_string(n): n for n in range(n_max + 1)}
    for ev in state.prefix_events():
        k = len(ev.p)
        if ev.x in best and best[ev.x] <= k:
            continue
        best[ev.x] = k
        yield CandidateEvent(ev.stage, ev.x, k)
        if ev.x in names:
            yield AssumptionEvent(ev.stage, names[ev.x], k, triple_code(ev.x, ev.p, ev.t))


def synthetic_stream(rng: random.Random, n_max: int = 6, max_drops: int = 3,
                     candidates: int = 6) -> tuple[list[Event], int]:
    """A random well-formed stream; returns it with the number of drops injected.

    Final values satisfy ``sum_n 2^-v_n <= 1/2`` and witnesses are small
    lengths ``m >= n`` so candidates can be generated directly.
    """
    events: list[Event] = []
    drops = 0
    stage = 0
    best_w: dict[BitString, int] = {}
    for n in range(n_max + 1):
        final = 2 * (n + 1).bit_length() + rng.randrange(3)
        chain_len = 1 + rng.randrange(max_drops + 1)
        values = sorted(rng.sample(range(final, final + 3 * chain_len + 3), chain_len - 1) + [final],
                        reverse=True)
        values = sorted(set(values), reverse=True)
        drops += len(values) - 1
        for v in values:
            stage += 1
            m = n + rng.randrange(6)
            events.append(AssumptionEvent(stage, n, v, m))
            for _ in range(rng.randrange(candidates + 1)):
                w = format(rng.getrandbits(m), f"0{m}b") if m else ""
                k = rng.randrange(1, 40)
                prev = best_w.get(w)
                if prev is not None and k >= prev:
                    continue
                best_w[w] = k
                events.append(CandidateEvent(stage, w, k))
    return events, drops
