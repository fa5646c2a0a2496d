"""Desk-scale algorithmic information workbench.

A bit-exact prefix-free reference machine, a dovetailed enumerator for the
stage approximations ``K_s``, ``C_s`` and ``Omega_s``, an online
Kraft-Chaitin allocator, and the constructions built on top of them.
"""

from .encodings import (
    cantor_pair,
    cantor_unpair,
    gamma_decode,
    gamma_encode,
    lex_index,
    lex_string,
    triple_code,
    triple_decode,
)
from .errors import *  # noqa: F401,F403
from .machine import (
    DEFAULT_PROFILE,
    Halted,
    MachineProfile,
    NeedsInput,
    OutOfBudget,
    Undefined,
    assemble,
    disassemble,
    frame,
    run_plain,
    run_prefix,
)
from .enumerator import (
    EnumerationState,
    HaltEvent,
    advance,
    counting_report,
    enumerate_to,
    query_C,
    query_K,
    restore,
    snapshot,
)

__version__ = "0.1.0"
