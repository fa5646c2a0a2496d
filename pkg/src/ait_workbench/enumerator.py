"""Dovetailed enumeration of the machine's domain.

Stage ``s`` means: every program of length at most ``s`` runs with a budget
of ``s`` steps, in prefix mode and in plain mode.  Because runs are
deterministic and read their data on demand, the events found at stage ``s``
are exactly the programs with ``max(|p|, t) <= s``, and an event is first
seen at stage ``max(|p|, t)``.  Discovery walks the tree of data bits a
program actually asks for instead of iterating over all ``2^s`` strings.

Plain-mode events are recorded for *tight* programs only: those whose run
uses every bit of ``p``.  A plain program that halts before its end has a
shorter tight prefix with the same output, so the ``C_s`` table is unchanged.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, log2
from pathlib import Path
from typing import Iterator, Optional, Union

from .encodings import BitString, gamma_encode, lex_string, show
from .errors import CorruptLedger, FingerprintMismatch, ResourceLimit
from .machine import Halted, MachineProfile, NeedsInput, _run

PREFIX = "prefix"
PLAIN = "plain"
MODES = (PREFIX, PLAIN)

DEFAULT_WORK_CAP = 2 ** 34

LEDGER_MAGIC = "# ait-ledger v1"


@dataclass(frozen=True, order=True)
class HaltEvent:
    stage: int
    mode: str
    p: BitString
    x: BitString
    t: int

    def record(self) -> str:
        return f"{self.mode} {self.p} {self.x} {self.t} {self.stage}"


def discover(profile: MachineProfile, stage: int) -> Iterator[HaltEvent]:
    """Yield every halting event with ``|p| <= stage`` and ``t <= stage``."""
    if stage < 1:
        return
    length = 1
    while True:
        header = gamma_encode(length)
        if len(header) + length > stage:
            break
        for code in _words(length):
            yield from _explore(profile, header + code, stage)
        length += 1


def _words(n: int) -> Iterator[str]:
    fmt = f"0{n}b"
    for i in range(1 << n):
        yield format(i, fmt)


def _explore(profile: MachineProfile, base: str, stage: int) -> Iterator[HaltEvent]:
    stack = [base]
    while stack:
        bits = stack.pop()
        res = _run(profile, bits, stage, False)
        if isinstance(res, Halted):
            when = max(len(bits), res.steps)
            yield HaltEvent(when, PREFIX, bits, res.output, res.steps)
            yield HaltEvent(when, PLAIN, bits, res.output, res.steps)
        elif isinstance(res, NeedsInput) and not res.in_header:
            t = res.steps + 1
            yield HaltEvent(max(len(bits), t), PLAIN, bits, res.output, t)
            if len(bits) < stage:
                stack.append(bits + "1")
                stack.append(bits + "0")


class ComplexityTable:
    """Best known program length per output, with a replayable witness."""

    def __init__(self):
        self._best: dict[BitString, HaltEvent] = {}

    def offer(self, ev: HaltEvent) -> bool:
        cur = self._best.get(ev.x)
        if cur is None or (len(ev.p), ev.stage, ev.p) < (len(cur.p), cur.stage, cur.p):
            self._best[ev.x] = ev
            return True
        return False

    def get(self, x: BitString) -> Optional[int]:
        ev = self._best.get(x)
        return None if ev is None else len(ev.p)

    def witness(self, x: BitString) -> Optional[HaltEvent]:
        return self._best.get(x)

    def items(self) -> Iterator[tuple[BitString, int]]:
        for x in sorted(self._best, key=lambda s: (len(s), s)):
            yield x, len(self._best[x].p)

    def outputs_of_length(self, n: int) -> list[BitString]:
        return sorted(x for x in self._best if len(x) == n)

    def __contains__(self, x: object) -> bool:
        return x in self._best

    def __len__(self) -> int:
        return len(self._best)


class EnumerationState:
    """Events, tables and the halting-probability accumulator at a watermark."""

    def __init__(self, profile: MachineProfile):
        self.profile = profile
        self.fingerprint = profile.fingerprint
        self.watermark = 0
        self.events: dict[tuple[str, BitString], HaltEvent] = {}
        self.K = ComplexityTable()
        self.C = ComplexityTable()
        self._omega_counts: dict[int, dict[int, int]] = {}

    def _add(self, ev: HaltEvent) -> None:
        key = (ev.mode, ev.p)
        if key in self.events:
            return
        self.events[key] = ev
        if ev.mode == PREFIX:
            self.K.offer(ev)
            by_len = self._omega_counts.setdefault(ev.stage, {})
            by_len[len(ev.p)] = by_len.get(len(ev.p), 0) + 1
        else:
            self.C.offer(ev)

    def prefix_events(self) -> list[HaltEvent]:
        return sorted(ev for ev in self.events.values() if ev.mode == PREFIX)

    def omega(self, stage: Optional[int] = None) -> Fraction:
        """Sum of ``2^-|p|`` over prefix-mode events first seen by ``stage``."""
        if stage is None:
            stage = self.watermark
        total = Fraction(0)
        for s, by_len in self._omega_counts.items():
            if s <= stage:
                for n, count in by_len.items():
                    total += Fraction(count, 1 << n)
        return total

    def omega_history(self) -> list[Fraction]:
        return [self.omega(s) for s in range(self.watermark + 1)]

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 1 << k) for _, k in self.K.items()), Fraction(0))


def advance(state: EnumerationState, target_stage: int,
            work_cap: int = DEFAULT_WORK_CAP) -> EnumerationState:
    """Bring ``state`` up to ``target_stage`` (returns a new state)."""
    if target_stage < state.watermark:
        raise ValueError(f"target stage {target_stage} is below watermark {state.watermark}")
    work = (1 << (target_stage + 1)) * target_stage
    if work > work_cap:
        raise ResourceLimit(f"stage {target_stage} needs {work} work units, cap is {work_cap}")
    new = EnumerationState(state.profile)
    for ev in sorted(state.events.values()):
        new._add(ev)
    if target_stage > state.watermark:
        for ev in sorted(discover(state.profile, target_stage)):
            new._add(ev)
    new.watermark = target_stage
    return new


def enumerate_to(profile: MachineProfile, stage: int,
                 work_cap: int = DEFAULT_WORK_CAP) -> EnumerationState:
    return advance(EnumerationState(profile), stage, work_cap)


def query_K(state: EnumerationState, x: BitString) -> Optional[int]:
    """Best prefix-mode program length for ``x``; ``None`` when undiscovered."""
    return state.K.get(x)


def query_C(state: EnumerationState, x: BitString) -> Optional[int]:
    return state.C.get(x)


def counting_report(state: EnumerationState, n: int, c: int) -> int:
    """``#{w : |w| = n and K_s(w) <= K_s(lex_string(n)) + c}``, undiscovered = +inf."""
    ref = state.K.get(lex_string(n))
    count = 0
    for w in state.K.outputs_of_length(n):
        k = state.K.get(w)
        if ref is None or k <= ref + c:
            count += 1
    return count


def implied_constant(count: int, c: int) -> int:
    """``ceil(log2 max(count, 1)) - c``."""
    return (max(count, 1) - 1).bit_length() - c


def counting_matrix(state: EnumerationState, n_max: int, c_max: int) -> list[tuple[int, int, int, int]]:
    """Rows ``(n, c, count, implied constant)`` for ``n <= n_max``, ``c <= c_max``."""
    rows = []
    for n in range(n_max + 1):
        for c in range(c_max + 1):
            count = counting_report(state, n, c)
            rows.append((n, c, count, implied_constant(count, c)))
    return rows


def plain_prefix_overhead(state: EnumerationState) -> Optional[int]:
    """``max(C_s(x) - K_s(x))`` over outputs present in both tables."""
    diffs = [state.C.get(x) - k for x, k in state.K.items() if x in state.C]
    return max(diffs) if diffs else None


# --------------------------------------------------------------------------
# persistence

def dumps(state: EnumerationState) -> str:
    lines = [f"{LEDGER_MAGIC} fingerprint={state.fingerprint} watermark={state.watermark}"]
    lines.extend(ev.record() for ev in sorted(state.events.values()))
    return "\n".join(lines) + "\n"


def loads(text: str, profile: MachineProfile) -> EnumerationState:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(LEDGER_MAGIC):
        raise CorruptLedger("missing ledger header")
    fields = dict(part.split("=", 1) for part in lines[0][len(LEDGER_MAGIC):].split() if "=" in part)
    try:
        fingerprint = fields["fingerprint"]
        watermark = int(fields["watermark"])
    except (KeyError, ValueError) as exc:
        raise CorruptLedger(f"bad ledger header: {lines[0]!r}") from exc
    if fingerprint != profile.fingerprint:
        raise FingerprintMismatch(
            f"ledger fingerprint {fingerprint} does not match profile {profile.fingerprint}")
    state = EnumerationState(profile)
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != 5 or parts[0] not in MODES:
            raise CorruptLedger(f"line {lineno}: expected 'mode p x t stage', got {line!r}")
        mode, p, x, t, stage = parts
        if not p or p.strip("01") or x.strip("01"):
            raise CorruptLedger(f"line {lineno}: bits must be 0/1 text")
        try:
            ev = HaltEvent(int(stage), mode, p, x, int(t))
        except ValueError as exc:
            raise CorruptLedger(f"line {lineno}: {exc}") from exc
        if ev.stage > watermark or ev.stage != max(len(p), ev.t):
            raise CorruptLedger(f"line {lineno}: stage inconsistent with watermark or (|p|, t)")
        state._add(ev)
    state.watermark = watermark
    return state


def snapshot(state: EnumerationState, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(state), encoding="ascii")


def restore(path: Union[str, Path], profile: MachineProfile) -> EnumerationState:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise CorruptLedger(str(exc)) from exc
    return loads(text, profile)


def table_csv(state: EnumerationState) -> str:
    """K_s / C_s table as CSV with a provenance header."""
    buf = io.StringIO()
    buf.write(f"# profile={state.fingerprint} stage={state.watermark}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "K_s", "C_s"])
    outputs = sorted(set(x for x, _ in state.K.items()) | set(x for x, _ in state.C.items()),
                     key=lambda s: (len(s), s))
    for x in outputs:
        k, c = state.K.get(x), state.C.get(x)
        writer.writerow([show(x), "" if k is None else k, "" if c is None else c])
    return buf.getvalue()
