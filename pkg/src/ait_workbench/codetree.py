"""Binary code trees with integer leaf payloads.

Serialized form (preorder): a leaf is ``(payload)`` with the payload in
decimal, an internal node is ``(LR)`` where ``L`` and ``R`` are subtrees or
``.`` for a missing child.  The empty tree is ``.``.  Example: the code
``{"0": 5, "10": 6}`` serializes as ``((5)((6).))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import CorruptLedger


@dataclass(frozen=True)
class Leaf:
    payload: int


@dataclass(frozen=True)
class Node:
    left: Optional["Tree"]
    right: Optional["Tree"]


Tree = Union[Leaf, Node]


class CodeTree:
    """An immutable prefix code mapping codewords to payloads."""

    __slots__ = ("root",)

    def __init__(self, root: Optional[Tree] = None):
        self.root = root

    @classmethod
    def from_codewords(cls, items) -> "CodeTree":
        """Build a tree from ``(codeword, payload)`` pairs; the code must be prefix-free."""
        root: Optional[Tree] = None
        for word, payload in items:
            root = _insert(root, word, payload)
        return cls(root)

    def codewords(self) -> Iterator[tuple[str, int]]:
        """Yield ``(codeword, payload)`` in preorder (left before right)."""
        stack: list[tuple[Optional[Tree], str]] = [(self.root, "")]
        while stack:
            node, prefix = stack.pop()
            if node is None:
                continue
            if isinstance(node, Leaf):
                yield prefix, node.payload
            else:
                stack.append((node.right, prefix + "1"))
                stack.append((node.left, prefix + "0"))

    def decode(self, word: str) -> Optional[int]:
        """Payload for an exact codeword, or ``None``."""
        node = self.root
        for bit in word:
            if not isinstance(node, Node):
                return None
            node = node.left if bit == "0" else node.right
        return node.payload if isinstance(node, Leaf) else None

    def __len__(self) -> int:
        return sum(1 for _ in self.codewords())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CodeTree) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def __repr__(self) -> str:
        return f"CodeTree({self.serialize()!r})"

    def serialize(self) -> str:
        out: list[str] = []
        _emit(self.root, out)
        return "".join(out)

    @classmethod
    def parse(cls, text: str) -> "CodeTree":
        text = text.strip()
        node, pos = _parse(text, 0)
        if pos != len(text):
            raise CorruptLedger(f"trailing characters in code tree at offset {pos}")
        return cls(node)


def _insert(node: Optional[Tree], word: str, payload: int) -> Tree:
    if not word:
        if node is not None:
            raise ValueError("codeword collides with an existing codeword")
        return Leaf(payload)
    if isinstance(node, Leaf):
        raise ValueError("codeword extends an existing codeword")
    left, right = (node.left, node.right) if node is not None else (None, None)
    if word[0] == "0":
        return Node(_insert(left, word[1:], payload), right)
    return Node(left, _insert(right, word[1:], payload))


def _emit(node: Optional[Tree], out: list[str]) -> None:
    # iterative would be overkill: depth is bounded by codeword length
    if node is None:
        out.append(".")
    elif isinstance(node, Leaf):
        out.append(f"({node.payload})")
    else:
        out.append("(")
        _emit(node.left, out)
        _emit(node.right, out)
        out.append(")")


def _parse(text: str, pos: int) -> tuple[Optional[Tree], int]:
    if pos >= len(text):
        raise CorruptLedger("unexpected end of code tree")
    ch = text[pos]
    if ch == ".":
        return None, pos + 1
    if ch != "(":
        raise CorruptLedger(f"unexpected {ch!r} at offset {pos} in code tree")
    pos += 1
    if pos < len(text) and text[pos].isdigit():
        end = pos
        while end < len(text) and text[end].isdigit():
            end += 1
        if end >= len(text) or text[end] != ")":
            raise CorruptLedger(f"unterminated leaf at offset {pos}")
        return Leaf(int(text[pos:end])), end + 1
    left, pos = _parse(text, pos)
    right, pos = _parse(text, pos)
    if pos >= len(text) or text[pos] != ")":
        raise CorruptLedger(f"expected ')' at offset {pos} in code tree")
    return Node(left, right), pos + 1
