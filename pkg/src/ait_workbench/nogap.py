"""Zero-insertion schedules and the selection rule that recovers them.

Given a nondecreasing unbounded ``h`` and an oracle machine ``Phi`` with
``Phi^alpha(k) = h^-1(k)`` after ``t(k)`` steps, zeros are inserted into
``alpha`` at positions ``n_k = h^-1(k) + t(k)``.  The selection rule ``S``
runs ``Phi`` on the bits it has read so far and selects position ``n``
exactly when the answer plus the step count equals ``n``; on a matched
construction it picks out precisely the inserted zeros.

Step convention: every oracle machine declares its own cost model (see
``OracleMachine.cost_model``) and the budget at stage ``n`` is ``n`` of
those steps.  The convention is copied into schedule and trace provenance.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable, Optional

from .encodings import BitString, gamma_encode
from .errors import NonIncreasingSchedule, OracleDisagreement
from .sources import SequenceSource, dyadic_bits

PAD_MAX = "max"
PAD_STRICT = "strict"


# -- h ---------------------------------------------------------------------

class NondecreasingFn:
    """``h`` with memo and ``h^-1(k) = min{n : h(n) >= k}``."""

    def __init__(self, name: str, rule: Callable[[int], int],
                 inverse: Optional[Callable[[int], int]] = None, search_limit: int = 1 << 24):
        self.name = name
        self._rule = rule
        self._inverse = inverse
        self._memo: dict[int, int] = {}
        self.search_limit = search_limit

    def __call__(self, n: int) -> int:
        v = self._memo.get(n)
        if v is None:
            v = self._memo[n] = self._rule(n)
        return v

    def inverse(self, k: int) -> int:
        if self._inverse is not None:
            return self._inverse(k)
        # h is nondecreasing: gallop, then bisect
        hi = 1
        while self(hi) < k:
            hi *= 2
            if hi > self.search_limit:
                raise ValueError(f"{self.name} stays below {k} up to {self.search_limit}")
        lo = 0
        while lo < hi:
            mid = (lo + hi) // 2
            if self(mid) >= k:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def monotone_on(self, N: int) -> bool:
        return all(self(n) <= self(n + 1) for n in range(N))

    def looks_bounded(self, N: int) -> bool:
        """True when ``h`` is flat on ``[0, N]``, the degenerate case."""
        return self(0) == self(N)

    def __repr__(self) -> str:
        return f"NondecreasingFn({self.name!r})"


def h_identity() -> NondecreasingFn:
    return NondecreasingFn("identity", lambda n: n, lambda k: k)


def h_half() -> NondecreasingFn:
    return NondecreasingFn("half", lambda n: n // 2, lambda k: 2 * k)


def _ceil_sqrt(n: int) -> int:
    r = isqrt(n)
    return r if r * r == n else r + 1


def h_sqrt() -> NondecreasingFn:
    return NondecreasingFn("sqrt", _ceil_sqrt, lambda k: (k - 1) ** 2 + 1 if k else 0)


def h_log() -> NondecreasingFn:
    # ceil(log2(n + 2)) == (n + 1).bit_length()
    return NondecreasingFn("log", lambda n: (n + 1).bit_length(),
                           lambda k: max((1 << (k - 1)) - 1, 0) if k else 0)


def h_constant(c: int) -> NondecreasingFn:
    def inverse(k: int) -> int:
        if k > c:
            raise ValueError(f"constant {c} never reaches {k}")
        return 0
    return NondecreasingFn(f"const{c}", lambda n: c, inverse)


H_RULES = {"identity": h_identity, "half": h_half, "sqrt": h_sqrt, "log": h_log}


def h_by_name(name: str) -> NondecreasingFn:
    if name.startswith("const") and name[5:].isdigit():
        return h_constant(int(name[5:]))
    return H_RULES[name]()


def dual_compose(h_prime: NondecreasingFn) -> NondecreasingFn:
    """``h(n) = ceil(log2(h'(n) + 2))``."""
    return NondecreasingFn(f"log({h_prime.name})", lambda n: (h_prime(n) + 1).bit_length())


# -- oracle machines ---------------------------------------------------------

class OracleExhausted(Exception):
    """The machine asked for an oracle bit past the available prefix."""


class Oracle:
    """Bit access to a finite prefix or a whole source; records the furthest read."""

    def __init__(self, bits: Optional[BitString] = None, source: Optional[SequenceSource] = None):
        self._bits = bits
        self._source = source
        self.use = 0

    def __call__(self, i: int) -> str:
        if self._bits is not None:
            if i >= len(self._bits):
                raise OracleExhausted(i)
            b = self._bits[i]
        else:
            b = self._source.bit(i)
        if i + 1 > self.use:
            self.use = i + 1
        return b


@dataclass(frozen=True)
class PhiResult:
    value: int
    steps: int
    use: int


class OracleMachine:
    """``Phi``: ``(oracle, k, budget) -> PhiResult`` or ``None`` (no answer within budget)."""

    name = "abstract"
    cost_model = ""

    def compute(self, oracle: Oracle, k: int) -> tuple[int, int]:
        """Return ``(value, steps)``; may raise ``OracleExhausted``."""
        raise NotImplementedError

    def run(self, oracle: Oracle, k: int, budget: Optional[int] = None) -> Optional[PhiResult]:
        try:
            value, steps = self.compute(oracle, k)
        except OracleExhausted:
            return None
        if budget is not None and steps > budget:
            return None
        return PhiResult(value, steps, oracle.use)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class Immediate(OracleMachine):
    """Answers ``h^-1(k)`` in one step without touching the oracle."""

    cost_model = "1 step, no oracle reads"

    def __init__(self, h: NondecreasingFn):
        self.h = h
        self.name = "immediate"

    def compute(self, oracle, k):
        return self.h.inverse(k), 1


class LinearDelay(OracleMachine):
    cost_model = "3k+1 steps, no oracle reads"

    def __init__(self, h: NondecreasingFn):
        self.h = h
        self.name = "linear-delay"

    def compute(self, oracle, k):
        return self.h.inverse(k), 3 * k + 1


class OracleReading(OracleMachine):
    """Reads oracle bits ``0..2k-1`` (one step each), then answers (one step)."""

    cost_model = "1 step per oracle bit read, 2k reads, +1 to answer"

    def __init__(self, h: NondecreasingFn):
        self.h = h
        self.name = "oracle-reading"

    def compute(self, oracle, k):
        for i in range(2 * k):
            oracle(i)
        return self.h.inverse(k), 2 * k + 1


class Coded(OracleMachine):
    """Decodes ``h^-1(k)`` from the oracle itself.

    Even oracle positions carry ``gamma(h^-1(0) + 1) gamma(h^-1(1) + 1) ...``;
    the machine scans positions in order (one step each, odd ones skipped)
    and answers after the ``k``-th record (one more step).
    """

    cost_model = "1 step per oracle position scanned, +1 to answer"

    def __init__(self):
        self.name = "coded"

    def compute(self, oracle, k):
        pos = 0
        value = 0
        for _ in range(k + 1):
            zeros = 0
            while oracle(2 * pos) == "0":
                zeros += 1
                pos += 1
            pos += 1
            digits = "1"
            for _ in range(zeros):
                digits += oracle(2 * pos)
                pos += 1
            value = int(digits, 2) - 1
        scanned = 2 * pos - 1
        return value, scanned + 1


class Faulty(OracleMachine):
    """Wraps a machine and answers one more than it should at ``bad_k``."""

    def __init__(self, inner: OracleMachine, bad_k: int):
        self.inner = inner
        self.bad_k = bad_k
        self.name = f"faulty({inner.name},{bad_k})"
        self.cost_model = inner.cost_model

    def compute(self, oracle, k):
        value, steps = self.inner.compute(oracle, k)
        return (value + 1 if k == self.bad_k else value), steps


class Padded(OracleMachine):
    """Runs ``inner`` on ``0..k`` and reports the padded step count ``t'(k)``.

    ``t'`` is the running maximum of the inner step counts, raised further
    under ``strict`` padding so that the insertion points strictly increase.
    """

    def __init__(self, inner: OracleMachine, h: NondecreasingFn, mode: str):
        if mode not in (PAD_MAX, PAD_STRICT):
            raise ValueError(f"unknown padding mode {mode!r}")
        self.inner = inner
        self.h = h
        self.mode = mode
        self.name = f"{inner.name}+pad-{mode}"
        self.cost_model = f"{inner.cost_model}; padded to the {mode} schedule"

    def compute(self, oracle, k):
        t = 0
        prev_pos = -1
        value = 0
        for j in range(k + 1):
            value, steps = self.inner.compute(oracle, j)
            t = max(t, steps)
            if self.mode == PAD_STRICT:
                t = max(t, prev_pos + 1 - self.h.inverse(j))
            prev_pos = self.h.inverse(j) + t
        return value, t


def phi_by_name(name: str, h: NondecreasingFn) -> OracleMachine:
    if name == "immediate":
        return Immediate(h)
    if name == "linear-delay":
        return LinearDelay(h)
    if name == "oracle-reading":
        return OracleReading(h)
    if name == "coded":
        return Coded()
    raise KeyError(f"unknown oracle machine {name!r}")


PHI_NAMES = ("immediate", "linear-delay", "oracle-reading", "coded")


def coded_alpha(h: NondecreasingFn, base: SequenceSource) -> SequenceSource:
    """Even bits carry the ``gamma(h^-1(k) + 1)`` records, odd bits come from ``base``."""
    def extend(n: int) -> str:
        half = (n + 1) // 2
        code = []
        size = 0
        k = 0
        while size < half:
            word = gamma_encode(h.inverse(k) + 1)
            code.append(word)
            size += len(word)
            k += 1
        stream = "".join(code)
        other = base.prefix(half)
        return "".join(a + b for a, b in zip(stream, other))[:n]

    return SequenceSource("rule", f"coded({h.name},{base.ident})", extend)


# -- schedules -------------------------------------------------------------

@dataclass
class InsertionSchedule:
    positions: list[int]
    hinv: list[int]
    steps: list[int]
    uses: list[int]
    machine: OracleMachine
    provenance: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.positions)

    def insertions_below(self, n: int) -> int:
        return sum(1 for p in self.positions if p < n)

    def serialize(self) -> str:
        head = " ".join(f"{k}={v}" for k, v in self.provenance.items())
        lines = [f"# schedule {head}", "k n_k hinv t use"]
        for k, row in enumerate(zip(self.positions, self.hinv, self.steps, self.uses)):
            lines.append(f"{k} " + " ".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


def build_schedule(h: NondecreasingFn, phi: OracleMachine, alpha: SequenceSource, K: int,
                   pad: str = PAD_MAX) -> InsertionSchedule:
    """Positions ``n_k = h^-1(k) + t(k)`` for ``k < K``.

    ``t`` is the step count of ``Phi`` padded to its running maximum.  With
    ``pad="strict"`` it is padded further so the positions strictly increase;
    the default raises ``NonIncreasingSchedule`` instead.
    """
    positions, hinvs, steps, uses = [], [], [], []
    t = 0
    for k in range(K):
        oracle = Oracle(source=alpha)
        res = phi.run(oracle, k)
        expected = h.inverse(k)
        if res is None:
            raise OracleDisagreement(f"{phi.name} gave no answer at k={k}")
        if res.value != expected:
            raise OracleDisagreement(f"{phi.name} answered {res.value} at k={k}, h^-1({k}) = {expected}")
        t = max(t, res.steps)
        n_k = expected + t
        if positions and n_k <= positions[-1]:
            if pad != PAD_STRICT:
                raise NonIncreasingSchedule(
                    f"n_{k} = {n_k} <= n_{k - 1} = {positions[-1]} after running-max padding")
            t = positions[-1] + 1 - expected
            n_k = positions[-1] + 1
        positions.append(n_k)
        hinvs.append(expected)
        steps.append(t)
        uses.append(res.use)
    provenance = {
        "h": h.name, "phi": phi.name, "alpha": alpha.ident, "pad": pad,
        "steps": phi.cost_model.replace(" ", "_"),
    }
    return InsertionSchedule(positions, hinvs, steps, uses, Padded(phi, h, pad), provenance)


def insert_zeros(alpha: SequenceSource, positions, N: int) -> BitString:
    """``beta | N``: zeros at the scheduled positions, ``alpha`` bits elsewhere."""
    marks = set(p for p in positions if p < N)
    need = N - len(marks)
    a = alpha.prefix(need)
    out = []
    j = 0
    for n in range(N):
        if n in marks:
            out.append("0")
        else:
            out.append(a[j])
            j += 1
    return "".join(out)


def delete_positions(beta: BitString, positions) -> BitString:
    marks = set(positions)
    return "".join(b for n, b in enumerate(beta) if n not in marks)


def beta_source(h: NondecreasingFn, phi: OracleMachine, alpha: SequenceSource,
                pad: str = PAD_MAX) -> SequenceSource:
    """The stitched sequence as a source, growing the schedule on demand."""
    def extend(n: int) -> str:
        K = 1
        while True:
            sched = build_schedule(h, phi, alpha, K, pad)
            if sched.positions[-1] >= n:
                return insert_zeros(alpha, sched.positions, n)
            K *= 2

    return SequenceSource(alpha.kind, f"beta({h.name},{phi.name},{alpha.ident},{pad})", extend)


# -- selection ---------------------------------------------------------------

@dataclass
class SelectionTrace:
    stages: list[tuple[int, int]] = field(default_factory=list)  # (k_n, |x_n|) for n = 0..N
    selected: list[int] = field(default_factory=list)
    bits: list[str] = field(default_factory=list)
    x: BitString = ""
    provenance: dict[str, str] = field(default_factory=dict)

    def arithmetic_ok(self) -> bool:
        return all(k + xl == n for n, (k, xl) in enumerate(self.stages))

    def serialize(self) -> str:
        head = " ".join(f"{k}={v}" for k, v in self.provenance.items())
        lines = [f"# trace {head}", "n k_n len_x selected bit"]
        chosen = dict(zip(self.selected, self.bits))
        for n, (k, xl) in enumerate(self.stages[:-1]):
            lines.append(f"{n} {k} {xl} {int(n in chosen)} {chosen.get(n, '')}")
        return "\n".join(lines) + "\n"


def selection_rule_S(xi: SequenceSource, phi: OracleMachine, N: int) -> SelectionTrace:
    """Scan ``xi | N``: select bit ``n`` iff ``Phi`` on oracle ``x_n``, input ``k_n``,
    budget ``n`` halts after ``s`` steps with value ``v`` and ``v + s = n``."""
    trace = SelectionTrace(provenance={"phi": phi.name, "xi": xi.ident, "N": str(N),
                                       "steps": phi.cost_model.replace(" ", "_")})
    seq = xi.prefix(N)
    x: list[str] = []
    k = 0
    for n in range(N):
        trace.stages.append((k, len(x)))
        res = phi.run(Oracle("".join(x)), k, n)
        if res is not None and res.value + res.steps == n:
            trace.selected.append(n)
            trace.bits.append(seq[n])
            k += 1
        else:
            x.append(seq[n])
    trace.stages.append((k, len(x)))
    trace.x = "".join(x)
    return trace


@dataclass(frozen=True)
class BiasReport:
    zeros: int
    ones: int

    @property
    def selected(self) -> int:
        return self.zeros + self.ones

    @property
    def frequency_of_one(self) -> Optional[Fraction]:
        return Fraction(self.ones, self.selected) if self.selected else None

    @property
    def flag(self) -> str:
        if not self.selected:
            return "no selection"
        if self.ones == 0:
            return "all selected bits are 0"
        return "mixed"


def bias_report(trace: SelectionTrace) -> BiasReport:
    ones = sum(1 for b in trace.bits if b == "1")
    return BiasReport(len(trace.bits) - ones, ones)


def exact_recovery(schedule: InsertionSchedule, trace: SelectionTrace, N: int) -> bool:
    """Selected set equals the inserted set below ``N`` and every selected bit is 0."""
    inserted = [p for p in schedule.positions if p < N]
    return trace.selected == inserted and all(b == "0" for b in trace.bits)


# -- complexity profile ------------------------------------------------------

@dataclass
class ConsistencyReport:
    rows: list[tuple[int, Optional[int], Optional[int]]]
    undiscovered: int
    watermark: int

    @property
    def running_max(self) -> Optional[int]:
        return self.rows[-1][2] if self.rows else None


def complexity_consistency(beta: SequenceSource, state, h: NondecreasingFn, N: int) -> ConsistencyReport:
    """``c(n) = n - h(n) - K_s(beta | n)`` with its running maximum, ``n = 1..N``."""
    rows = []
    best = None
    missing = 0
    for n in range(1, N + 1):
        k = state.K.get(beta.prefix(n))
        c = None if k is None else n - h(n) - k
        if c is None:
            missing += 1
        elif best is None or c > best:
            best = c
        rows.append((n, c, best))
    return ConsistencyReport(rows, missing, state.watermark)


def schedule_constant(schedule: InsertionSchedule, h: NondecreasingFn, N: int) -> int:
    """``max_{n <= N} (#insertions below n - h(n))``."""
    best = None
    count = 0
    marks = set(schedule.positions)
    for n in range(N + 1):
        v = count - h(n)
        best = v if best is None else max(best, v)
        if n in marks:
            count += 1
    return best


# -- settling times ----------------------------------------------------------

@dataclass
class SettlingSchedule:
    watermark: int
    rows: list[tuple[int, Optional[int], Optional[int], str]]

    @property
    def positions(self) -> list[int]:
        return [p for _, _, p, _ in self.rows if p is not None]


def settling_schedule(state, N: int) -> SettlingSchedule:
    """``t_s(n)``: least stage whose approximation already shows the current first ``n`` bits.

    Positions are ``t_s(n) + n``.  Every approximation up to stage ``s`` is a
    multiple of ``2^-s``, so only ``n <= s`` bits are meaningful; larger ``n``
    are reported without a position.  All positions are unstable: further
    enumeration can only push them later.
    """
    s = state.watermark
    rows = []
    if s == 0:
        return SettlingSchedule(0, rows)
    history = state.omega_history()
    final = history[-1]
    for n in range(1, N + 1):
        if n > s:
            rows.append((n, None, None, "beyond-precision"))
            continue
        target = dyadic_bits(final, n)
        t = next(sp for sp in range(s + 1) if dyadic_bits(history[sp], n) == target)
        rows.append((n, t, t + n, "unstable"))
    return SettlingSchedule(s, rows)


def report_csv(header: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()
