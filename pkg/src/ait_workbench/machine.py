"""The reference universal prefix-free machine and its plain-mode sibling.

Program format: ``gamma(L) ++ bytecode (L bits) ++ data``.  The header and
the bytecode are always read in full; data bits are read only when an
instruction asks for one.  Opcodes are 4 bits, MSB first:

====  ========  ============================================================
bits  mnemonic  effect
====  ========  ============================================================
0000  HALT      stop
0001  OUT0      append 0 to the output
0010  OUT1      append 1 to the output
0011  READOUT   read a data bit and append it to the output
0100  READWORK  read a data bit and write it under the head
0101  W0        write 0 under the head
0110  W1        write 1 under the head
0111  LEFT      move the head left (stays at cell 0)
1000  RIGHT     move the head right
1001  OUTW      append the bit under the head to the output
1010  SETCTR n  counter := n
1011  DECJNZB d if counter > 0: decrement, then jump back d if still > 0
1100  JZF d     if the bit under the head is 0, jump forward d
1101  JZB d     if the bit under the head is 0, jump back d
1110  JMPB d    jump back d
1111  ESCAPE j  run host builtin j (the run halts when the builtin returns)
====  ========  ============================================================

Operands are gamma codes inside the bytecode; jump distances are measured
from the bit following the operand.  Every executed opcode costs one step,
builtins charge extra as documented on :class:`MachineProfile`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence, Union

from .codetree import CodeTree, Leaf
from .encodings import (
    BitString,
    gamma_decode,
    gamma_encode,
    lex_index,
    lex_string,
    triple_code,
)
from .errors import CorruptLedger, MalformedCode, OperandOutOfRange

OPCODE_TABLE_VERSION = 1

MNEMONICS = (
    "HALT", "OUT0", "OUT1", "READOUT", "READWORK", "W0", "W1", "LEFT",
    "RIGHT", "OUTW", "SETCTR", "DECJNZB", "JZF", "JZB", "JMPB", "ESCAPE",
)
OPCODES = {name: code for code, name in enumerate(MNEMONICS)}
OPERAND_OPS = frozenset(("SETCTR", "DECJNZB", "JZF", "JZB", "JMPB", "ESCAPE"))

(HALT, OUT0, OUT1, READOUT, READWORK, W0, W1, LEFT, RIGHT, OUTW,
 SETCTR, DECJNZB, JZF, JZB, JMPB, ESCAPE) = range(16)

PRINT_INDEX = 1
SEARCH_GE = 2
TRIPLE_WRAP = 3
TREE_DECODE = 4
BUILTIN_NAMES = {
    PRINT_INDEX: "PRINT_INDEX",
    SEARCH_GE: "SEARCH_GE",
    TRIPLE_WRAP: "TRIPLE_WRAP",
    TREE_DECODE: "TREE_DECODE",
}


# --------------------------------------------------------------------------
# run outcomes

@dataclass(frozen=True)
class Halted:
    output: BitString
    consumed: int
    steps: int


@dataclass(frozen=True)
class NeedsInput:
    """A read went past the provided bits (prefix mode only).

    ``steps`` and ``output`` describe the state when the reading instruction
    started; ``in_header`` is true when the header or bytecode was cut short.
    """

    consumed: int
    steps: int = 0
    output: BitString = ""
    in_header: bool = False


@dataclass(frozen=True)
class Undefined:
    reason: str = ""


@dataclass(frozen=True)
class OutOfBudget:
    budget: int


RunOutcome = Union[Halted, NeedsInput, Undefined, OutOfBudget]


# --------------------------------------------------------------------------
# profile

@dataclass(frozen=True)
class MachineProfile:
    """Everything that determines the machine's input/output behaviour.

    Builtins (``ESCAPE j``):

    * ``j=1`` PRINT_INDEX: read ``gamma(n)``, output ``lex_string(n)``.  1 step.
    * ``j=2`` SEARCH_GE: read ``gamma(l)``, ``l`` bits of bytecode ``F`` and
      ``gamma(n)``; output the length-lex first ``x`` whose plain run of ``F``
      on ``gamma(lex_index(x) + 1)`` outputs a string of index ``>= n``.
      1 step plus one per candidate examined; each inner run gets
      ``search_inner_budget`` steps of its own.
    * ``j=3`` TRIPLE_WRAP: run a nested prefix-mode program from the remaining
      input; on ``(x, p, t)`` output ``lex_string(<x, p, t>)``.  1 step plus
      the inner steps.
    * ``j=4`` TREE_DECODE: read ``gamma(r)``, walk registered tree ``r`` one
      input bit per branch, output ``lex_string(leaf)``.  1 step.

    ``notes`` are annotations (e.g. recorded regression constants) and do not
    take part in the fingerprint.
    """

    builtins: tuple[int, ...] = (PRINT_INDEX, SEARCH_GE, TRIPLE_WRAP, TREE_DECODE)
    trees: tuple[CodeTree, ...] = ()
    search_inner_budget: int = 4096
    max_nesting: int = 8
    opcode_table_version: int = OPCODE_TABLE_VERSION
    notes: tuple[tuple[str, str], ...] = ()

    def canonical(self) -> str:
        lines = [
            f"opcode_table_version={self.opcode_table_version}",
            "builtins=" + ",".join(str(b) for b in self.builtins),
            f"search_inner_budget={self.search_inner_budget}",
            f"max_nesting={self.max_nesting}",
        ]
        for r, tree in enumerate(self.trees, start=1):
            lines.append(f"tree.{r}={tree.serialize()}")
        return "\n".join(lines) + "\n"

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical().encode("ascii")).hexdigest()[:16]

    def serialize(self) -> str:
        text = "# machine profile; fingerprint=" + self.fingerprint + "\n"
        text += self.canonical()
        for key, value in self.notes:
            text += f"note.{key}={value}\n"
        return text

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.serialize(), encoding="ascii")

    @classmethod
    def parse(cls, text: str) -> "MachineProfile":
        values: dict[str, str] = {}
        trees: dict[int, CodeTree] = {}
        notes: list[tuple[str, str]] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CorruptLedger(f"profile line without '=': {line!r}")
            key, value = key.strip(), value.strip()
            if key.startswith("tree."):
                trees[int(key[5:])] = CodeTree.parse(value)
            elif key.startswith("note."):
                notes.append((key[5:], value))
            else:
                values[key] = value
        if sorted(trees) != list(range(1, len(trees) + 1)):
            raise CorruptLedger("registered tree ids must be 1..r without gaps")
        builtins = tuple(int(b) for b in values.get("builtins", "").split(",") if b)
        return cls(
            builtins=builtins,
            trees=tuple(trees[r] for r in sorted(trees)),
            search_inner_budget=int(values.get("search_inner_budget", 4096)),
            max_nesting=int(values.get("max_nesting", 8)),
            opcode_table_version=int(values.get("opcode_table_version", OPCODE_TABLE_VERSION)),
            notes=tuple(notes),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MachineProfile":
        return cls.parse(Path(path).read_text(encoding="ascii"))

    def with_tree(self, tree: CodeTree) -> tuple["MachineProfile", int]:
        """Return a new profile with ``tree`` registered, and its id."""
        return replace(self, trees=self.trees + (tree,)), len(self.trees) + 1

    def without_builtins(self) -> "MachineProfile":
        return replace(self, builtins=())

    def note(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.notes:
            if k == key:
                return v
        return default

    def with_note(self, key: str, value: str) -> "MachineProfile":
        kept = tuple((k, v) for k, v in self.notes if k != key)
        return replace(self, notes=kept + ((key, value),))


# counting_constant: max implied constant of the n <= 10, c <= 4 table at stage 22,
# fixed on first release and checked as a regression bound.
DEFAULT_PROFILE = MachineProfile(notes=(("counting_constant", "0"), ("counting_stage", "22")))


# --------------------------------------------------------------------------
# assembler

Instruction = Union[str, tuple]


def _normalize(ins: Instruction) -> tuple:
    if not isinstance(ins, str):
        return tuple(ins)
    parts = ins.split()
    name = parts[0].upper()
    if name == "DATA":
        return (name, parts[1] if len(parts) > 1 else "")
    if len(parts) == 1:
        return (name,)
    operand = parts[1]
    return (name, int(operand) if operand.isdigit() else operand)


def encode_instruction(ins: Instruction) -> str:
    op = _normalize(ins)
    name = op[0]
    if name == "DATA":
        return op[1]
    if name not in OPCODES:
        raise ValueError(f"unknown mnemonic {name!r}")
    bits = format(OPCODES[name], "04b")
    if name in OPERAND_OPS:
        if len(op) != 2:
            raise ValueError(f"{name} needs one operand")
        if op[1] < 1:
            raise OperandOutOfRange(f"{name} operand must be >= 1, got {op[1]}")
        bits += gamma_encode(op[1])
    elif len(op) != 1:
        raise ValueError(f"{name} takes no operand")
    return bits


def assemble(program: Iterable[Instruction]) -> BitString:
    """Mnemonics to bytecode.  Jump operands are taken verbatim."""
    return "".join(encode_instruction(ins) for ins in program)


def disassemble(code: BitString) -> list[str]:
    """Bytecode to mnemonics; an undecodable tail becomes ``DATA <bits>``."""
    out: list[str] = []
    pc = 0
    while pc < len(code):
        if pc + 4 > len(code):
            out.append(f"DATA {code[pc:]}")
            break
        op = int(code[pc:pc + 4], 2)
        name = MNEMONICS[op]
        if name in OPERAND_OPS:
            try:
                value, used = gamma_decode(code, pc + 4)
            except MalformedCode:
                out.append(f"DATA {code[pc:]}")
                break
            out.append(f"{name} {value}")
            pc += 4 + used
        else:
            out.append(name)
            pc += 4
    return out


def link(items: Sequence[Instruction]) -> BitString:
    """Assemble with symbolic jump targets.

    ``items`` may contain labels (strings ending in ``:``) and jumps whose
    operand is a label name.  Distances are solved by fixpoint iteration,
    since each distance changes the width of its own gamma code.
    """
    labels: dict[str, int] = {}
    body: list[tuple] = []
    for item in items:
        if isinstance(item, str) and item.endswith(":"):
            labels[item[:-1]] = len(body)
        else:
            body.append(_normalize(item))
    widths = [4 + (1 if op[0] in OPERAND_OPS else 0) for op in body]
    widths = [len(op[1]) if op[0] == "DATA" else w for op, w in zip(body, widths)]
    for _ in range(64):
        starts = [0]
        for w in widths:
            starts.append(starts[-1] + w)
        resolved = []
        for i, op in enumerate(body):
            if len(op) == 2 and isinstance(op[1], str) and op[0] != "DATA":
                target = starts[labels[op[1]]]
                after = starts[i + 1]
                if op[0] in ("JZF",):
                    dist = target - after
                elif op[0] in ("JZB", "JMPB", "DECJNZB"):
                    dist = after - target
                else:
                    raise ValueError(f"{op[0]} cannot take a label")
                if dist < 1:
                    raise OperandOutOfRange(f"{op[0]} to {op[1]} has distance {dist}")
                resolved.append((op[0], dist))
            else:
                resolved.append(op)
        new_widths = [len(encode_instruction(op)) for op in resolved]
        if new_widths == widths:
            return assemble(resolved)
        widths = new_widths
    raise RuntimeError("jump distances did not converge")


# --------------------------------------------------------------------------
# interpreter

class _ReadPastEnd(Exception):
    pass


class _Undef(Exception):
    pass


class _Budget(Exception):
    pass


class _Reader:
    __slots__ = ("bits", "pos", "end")

    def __init__(self, bits: str, pos: int = 0):
        self.bits = bits
        self.pos = pos
        self.end = len(bits)

    def bit(self) -> int:
        pos = self.pos
        if pos >= self.end:
            raise _ReadPastEnd
        self.pos = pos + 1
        return 1 if self.bits[pos] == "1" else 0

    def take(self, n: int) -> str:
        pos = self.pos
        if pos + n > self.end:
            raise _ReadPastEnd
        self.pos = pos + n
        return self.bits[pos:pos + n]

    def gamma(self) -> int:
        zeros = 0
        while not self.bit():
            zeros += 1
        return int("1" + self.take(zeros), 2) if zeros else 1


class Program:
    """Bytecode with a lazily filled decode table (pc -> instruction)."""

    __slots__ = ("code", "length", "_table")

    def __init__(self, code: str):
        self.code = code
        self.length = len(code)
        self._table: dict[int, tuple] = {}

    def fetch(self, pc: int) -> tuple:
        try:
            return self._table[pc]
        except KeyError:
            pass
        code, length = self.code, self.length
        if pc < 0 or pc >= length:
            entry = (-1, "pc escaped", 0)
        elif pc + 4 > length:
            entry = (-1, "opcode overruns bytecode", 0)
        else:
            op = int(code[pc:pc + 4], 2)
            if op >= SETCTR:
                try:
                    arg, used = gamma_decode(code, pc + 4)
                except MalformedCode:
                    entry = (-1, "operand overruns bytecode", 0)
                else:
                    entry = (op, arg, pc + 4 + used)
            else:
                entry = (op, 0, pc + 4)
        self._table[pc] = entry
        return entry


@lru_cache(maxsize=8192)
def load_program(code: str) -> Program:
    return Program(code)


class _State:
    __slots__ = ("out", "steps", "insn_start")

    def __init__(self):
        self.out: list[str] = []
        self.steps = 0
        self.insn_start = 0


def _execute(profile: MachineProfile, prog: Program, reader: _Reader,
             budget: int, state: _State, depth: int) -> None:
    fetch = prog.fetch
    out = state.out
    tape = [0]
    head = 0
    ctr = 0
    pc = 0
    steps = state.steps
    while True:
        if steps >= budget:
            raise _Budget
        op, arg, nxt = fetch(pc)
        if op < 0:
            raise _Undef(arg)
        state.insn_start = steps
        steps += 1
        if op == HALT:
            state.steps = steps
            return
        if op == OUT0:
            out.append("0")
        elif op == OUT1:
            out.append("1")
        elif op == READOUT:
            out.append("1" if reader.bit() else "0")
        elif op == READWORK:
            tape[head] = reader.bit()
        elif op == W0:
            tape[head] = 0
        elif op == W1:
            tape[head] = 1
        elif op == LEFT:
            if head:
                head -= 1
        elif op == RIGHT:
            head += 1
            if head == len(tape):
                tape.append(0)
        elif op == OUTW:
            out.append("1" if tape[head] else "0")
        elif op == SETCTR:
            ctr = arg
        elif op == DECJNZB:
            if ctr > 0:
                ctr -= 1
                if ctr > 0:
                    pc = nxt - arg
                    continue
        elif op == JZF:
            if not tape[head]:
                pc = nxt + arg
                continue
        elif op == JZB:
            if not tape[head]:
                pc = nxt - arg
                continue
        elif op == JMPB:
            pc = nxt - arg
            continue
        else:  # ESCAPE: the builtin finishes the run
            state.steps = steps
            _builtin(profile, arg, reader, budget, state, depth)
            return
        pc = nxt


def _builtin(profile: MachineProfile, j: int, reader: _Reader, budget: int,
             state: _State, depth: int) -> None:
    if j not in profile.builtins or j not in BUILTIN_NAMES:
        raise _Undef(f"unregistered builtin {j}")
    if depth >= profile.max_nesting:
        raise _Undef("builtin nesting limit")
    if j == PRINT_INDEX:
        state.out.append(lex_string(reader.gamma()))
    elif j == TREE_DECODE:
        r = reader.gamma()
        if r > len(profile.trees):
            raise _Undef(f"no registered tree {r}")
        node = profile.trees[r - 1].root
        while node is not None and not isinstance(node, Leaf):
            node = node.right if reader.bit() else node.left
        if node is None:
            raise _Undef("code tree has no such codeword")
        state.out.append(lex_string(node.payload))
    elif j == TRIPLE_WRAP:
        # the inner header is read before any budget check, so a run that
        # spends its last step on ESCAPE still halts on a short input
        start = reader.pos
        inner = _State()
        _run_nested(profile, reader, budget - state.steps, inner, depth + 1)
        p = reader.bits[start:reader.pos]
        state.steps += inner.steps
        state.out.append(lex_string(triple_code("".join(inner.out), p, inner.steps)))
    else:
        length = reader.gamma()
        f_code = reader.take(length)
        n = reader.gamma()
        x, examined = _search_ge(profile, f_code, n, budget - state.steps, depth + 1)
        state.steps += examined
        state.out.append(x)


def _run_nested(profile: MachineProfile, reader: _Reader, budget: int,
                state: _State, depth: int) -> None:
    length = reader.gamma()
    prog = load_program(reader.take(length))
    _execute(profile, prog, reader, budget, state, depth)


def _search_ge(profile: MachineProfile, f_code: str, n: int, allowance: int,
               depth: int) -> tuple[str, int]:
    """Length-lex search behind SEARCH_GE; returns ``(x, candidates examined)``.

    A plain run's result depends only on the input bits it consumed, so after
    each evaluation every later candidate sharing that consumed prefix is
    counted as examined without being rerun.  The count is exactly what a
    one-by-one scan would report.
    """
    header = gamma_encode(len(f_code)) + f_code
    inner_budget = profile.search_inner_budget
    examined = 0
    length = 0
    index = 0
    while True:
        examined += 1
        if examined > allowance:
            raise _Budget
        x = format(index, f"0{length}b") if length else ""
        data = "0" * length + "1" + x
        res = _run(profile, header + data, inner_budget, True, depth)
        if not isinstance(res, Halted):
            raise _Undef("search evaluator did not halt")
        if lex_index(res.output) >= n:
            return x, examined
        used = res.consumed - len(header)
        if used <= length:
            # every later candidate shares the consumed prefix 0^used
            raise _Budget
        known = used - length - 1
        free = length - known
        last = ((index >> free) + 1 << free) - 1
        examined += last - index
        index = last + 1
        if index >> length:
            length += 1
            index = 0


def _run(profile: MachineProfile, bits: str, budget: int, plain: bool,
         depth: int = 0) -> RunOutcome:
    reader = _Reader(bits)
    try:
        length = reader.gamma()
        prog = load_program(reader.take(length))
    except _ReadPastEnd:
        if plain:
            return Undefined("header or bytecode cut short")
        return NeedsInput(len(bits), 0, "", True)
    state = _State()
    try:
        _execute(profile, prog, reader, budget, state, depth)
    except _ReadPastEnd:
        output = "".join(state.out)
        if plain:
            return Halted(output, len(bits), state.insn_start + 1)
        return NeedsInput(len(bits), state.insn_start, output)
    except _Undef as exc:
        return Undefined(str(exc))
    except _Budget:
        return OutOfBudget(budget)
    return Halted("".join(state.out), reader.pos, state.steps)


def run_prefix(profile: MachineProfile, program_bits: BitString, step_budget: int) -> RunOutcome:
    """Run in prefix mode: reading past the provided bits yields ``NeedsInput``."""
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    return _run(profile, program_bits, step_budget, False)


def run_plain(profile: MachineProfile, program: BitString, step_budget: int) -> RunOutcome:
    """Run in plain mode: a data read past the end of ``program`` halts the run.

    The header and bytecode must be complete; a cut-short header is ``Undefined``.
    """
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    return _run(profile, program, step_budget, True)


def frame(bytecode: BitString, data: BitString = "") -> BitString:
    """Prepend the length header: ``gamma(L) ++ bytecode ++ data``."""
    return gamma_encode(len(bytecode)) + bytecode + data
