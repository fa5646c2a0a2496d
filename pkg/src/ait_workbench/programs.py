"""Hand-built witness programs for the reference machine."""

from __future__ import annotations

from .encodings import BitString, gamma_encode, lex_index
from .machine import (
    PRINT_INDEX,
    SEARCH_GE,
    TREE_DECODE,
    TRIPLE_WRAP,
    assemble,
    frame,
    link,
)


def print_literal(x: BitString) -> BitString:
    """Prefix program outputting ``x`` with one OUT per bit."""
    return frame(assemble([("OUT1",) if b == "1" else ("OUT0",) for b in x] + [("HALT",)]))


def copy_n_bytecode(n: int) -> BitString:
    """``SETCTR n; READOUT; DECJNZB d; HALT``: copy ``n`` data bits to the output."""
    return link([("SETCTR", n), "LOOP:", "READOUT", ("DECJNZB", "LOOP"), "HALT"])


def copy_all_bytecode() -> BitString:
    """``READOUT; JMPB 15``: in plain mode, copies the whole data section."""
    return link(["TOP:", "READOUT", ("JMPB", "TOP")])


def zeros_bytecode(n: int) -> BitString:
    """``SETCTR n; OUT0; DECJNZB d; HALT``: prints ``0^n`` (n >= 1)."""
    return link([("SETCTR", n), "LOOP:", "OUT0", ("DECJNZB", "LOOP"), "HALT"])


def escape_bytecode(j: int) -> BitString:
    return assemble([("ESCAPE", j)])


def print_index_program(n: int) -> BitString:
    return frame(escape_bytecode(PRINT_INDEX), gamma_encode(n))


def print_string_program(x: BitString) -> BitString:
    """PRINT_INDEX program for ``x`` (needs ``x`` nonempty)."""
    return print_index_program(lex_index(x))


def triple_wrap_program(p: BitString) -> BitString:
    """Run ``p`` nested and output its triple code; overhead is ``triple_wrap_overhead()``."""
    return frame(escape_bytecode(TRIPLE_WRAP), p)


def triple_wrap_overhead() -> int:
    return len(triple_wrap_program(""))


def tree_decode_program(r: int, codeword: BitString) -> BitString:
    return frame(escape_bytecode(TREE_DECODE), gamma_encode(r) + codeword)


def tree_decode_overhead(r: int) -> int:
    """Bits added in front of a codeword of registered tree ``r``."""
    return len(tree_decode_program(r, ""))


def berry_program(f_code: BitString, n: int) -> BitString:
    """SEARCH_GE program printing the first ``x`` whose ``F``-value is at least ``n``."""
    return frame(escape_bytecode(SEARCH_GE), gamma_encode(len(f_code)) + f_code + gamma_encode(n))


def twice_length_plus_two_bytecode() -> BitString:
    """Plain-mode evaluator of ``f(x) = 2|x| + 2``.

    Input is ``gamma(lex_index(x) + 1) = 0^|x| 1 x``; the output is
    ``lex_string(2|x| + 2)``, i.e. the binary digits of ``|x| + 1`` without
    the leading one, followed by ``1``.  The program never reads past the
    ``1`` separating the zero run from ``x``.

    Work tape: cell 0 is a zero sentinel, cell ``2i+1`` holds digit ``i`` of
    a little-endian counter and cell ``2i+2`` is 1 iff digit ``i`` exists.
    """
    return link([
        # counter := 1
        "RIGHT", "W1", "RIGHT", "W1", "LEFT", "LEFT",
        "LOOP:",
        "READWORK",
        ("JZF", "INC"),
        "W0",
        ("JZF", "EMITSTART"),
        "INC:",
        "RIGHT",
        "CARRY:",
        "RIGHT",
        ("JZF", "NEW"),
        "LEFT",
        ("JZF", "SET"),
        "W0",
        "RIGHT",
        "RIGHT",
        ("JMPB", "CARRY"),
        "NEW:",
        "W1",
        "LEFT",
        "SET:",
        "W1",
        "BACK:",
        "LEFT",
        ("JZB", "LOOP"),
        "LEFT",
        ("JMPB", "BACK"),
        "EMITSTART:",
        "RIGHT",
        "SEEK:",
        "RIGHT",
        ("JZF", "END"),
        "RIGHT",
        ("JMPB", "SEEK"),
        "END:",
        "LEFT", "LEFT", "LEFT",
        "EMIT:",
        "LEFT",
        ("JZF", "DONE"),
        "LEFT",
        "OUTW",
        ("JMPB", "EMIT"),
        "DONE:",
        "OUT1",
        "HALT",
    ])
