"""Initial-segment deficiency monitors.

``K_s`` and ``C_s`` bound ``K`` and ``C`` from above, so a deficiency
computed from them is a lower bound on the true one: a large value refutes
a candidate constant, a small value proves nothing.  Reports therefore
carry direction labels instead of verdicts.  Undiscovered prefixes are
skipped and counted.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .functions import UpperBoundFunction
from .solovay import GapReport, gap_table
from .sources import SequenceSource

SUP = "sup"
INF = "inf"


@dataclass
class DeficiencyReport:
    criterion: str
    source: str
    fingerprint: Optional[str]
    watermark: Optional[int]
    extremum: str = SUP
    rows: list[tuple[int, Optional[int], Optional[int], bool]] = field(default_factory=list)
    undiscovered: int = 0

    def _push(self, n: int, value: Optional[int], stable: bool) -> None:
        best = self.rows[-1][2] if self.rows else None
        if value is None:
            self.undiscovered += 1
        elif best is None or (value > best if self.extremum == SUP else value < best):
            best = value
        self.rows.append((n, value, best, stable))

    @property
    def running(self) -> Optional[int]:
        return self.rows[-1][2] if self.rows else None

    def values(self) -> list[Optional[int]]:
        return [r[1] for r in self.rows]

    def label(self, c: int) -> str:
        """Direction label for candidate constant ``c``.

        For a supremum-type deficiency, exceeding ``c`` refutes ``c``;
        otherwise the data are only consistent with ``c`` up to this stage.
        """
        r = self.running
        if self.extremum == SUP:
            if r is not None and r > c:
                return f"refutes-at-{c}"
        elif r is not None and r < -c:
            return f"refutes-at-{c}"
        stage = "exact" if self.watermark is None else f"stage-{self.watermark}"
        return f"consistent-up-to-{stage}"

    def csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# monitor criterion={self.criterion} source={self.source} "
                  f"profile={self.fingerprint or ''} stage={'' if self.watermark is None else self.watermark} "
                  f"undiscovered={self.undiscovered}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "statistic", f"running_{self.extremum}", "stable"])
        for n, v, best, stable in self.rows:
            writer.writerow([n, "" if v is None else v, "" if best is None else best, int(stable)])
        return buf.getvalue()


def _prefix_stable(src: SequenceSource, n: int) -> bool:
    return all(src.stable(i) for i in range(n)) if n else True


def levin_schnorr(src: SequenceSource, state, N: int) -> DeficiencyReport:
    """``d(n) = n - K_s(src|n)`` for ``n = 1..N``."""
    rep = DeficiencyReport("levin-schnorr", src.ident, state.fingerprint, state.watermark)
    for n in range(1, N + 1):
        k = state.K.get(src.prefix(n))
        rep._push(n, None if k is None else n - k, _prefix_stable(src, n))
    return rep


def miller_yu(src: SequenceSource, state, g: UpperBoundFunction, N: int) -> DeficiencyReport:
    """``d(n) = n - g(n) - C_s(src|n)``; any ``g`` in the summable class works here."""
    rep = DeficiencyReport(f"miller-yu[{g.name}]", src.ident, state.fingerprint, state.watermark)
    for n in range(1, N + 1):
        c = state.C.get(src.prefix(n))
        rep._push(n, None if c is None else n - g(n) - c, _prefix_stable(src, n))
    return rep


def bm_criterion(src: SequenceSource, f: UpperBoundFunction, N: int) -> DeficiencyReport:
    """``d(n) = n - f(src|n)``; exact, since ``f`` is computable."""
    rep = DeficiencyReport(f"bm[{f.name}]", src.ident, None, None)
    for n in range(1, N + 1):
        rep._push(n, n - f.of_string(src.prefix(n)), _prefix_stable(src, n))
    return rep


def chaitin_trend(src: SequenceSource, state, N: int) -> DeficiencyReport:
    """``g(n) = K_s(src|n) - n`` with its running minimum."""
    rep = DeficiencyReport("chaitin-trend", src.ident, state.fingerprint, state.watermark, INF)
    for n in range(1, N + 1):
        k = state.K.get(src.prefix(n))
        rep._push(n, None if k is None else k - n, _prefix_stable(src, n))
    return rep


def solovayness_probe(g: UpperBoundFunction, state, M: int) -> GapReport:
    """Running minimum of ``g - K_s``; the same observable as ``gap_table``."""
    return gap_table(g, state, M)


def cross_criterion_violations(src: SequenceSource, state, N: int, c_pc: int) -> list[int]:
    """``n`` where ``n - K_s > n - C_s + c_pc``, i.e. ``C_s > K_s + c_pc``.

    Any hit means the measured plain/prefix constant was wrong, which
    points at an enumerator bug.
    """
    out = []
    for n in range(1, N + 1):
        x = src.prefix(n)
        k, c = state.K.get(x), state.C.get(x)
        if k is not None and c is not None and c > k + c_pc:
            out.append(n)
    return out


CRITERIA = ("levin-schnorr", "miller-yu", "bm", "chaitin")
