"""Bracketed constituency trees: parsing, navigation, serialization.

Node labels follow the convention ``CATEGORY-TAG1-TAG2...`` where the
category never contains ``-`` and the remaining segments are function
tags (the head marker ``H`` is an ordinary tag).  A terminal node carries
a token; multi-word tokens are written with ``_`` in files and restored
to spaces in memory.

Node identity inside a tree is a path from the root: a tuple of child
indices.  Trees are immutable after construction and safe to share.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from srlkit.errors import SrlkitError

# Categories counted as phrasal by is_phrase(); treebank tagsets vary, so
# this is configuration data rather than a fixed rule.
DEFAULT_PHRASAL_CATEGORIES = frozenset(
    {"NP", "VP", "AP", "PP", "QP", "S", "SBAR", "MDP", "WHNP", "WHPP"}
)


class TreeError(SrlkitError):
    """Base class for tree parsing and navigation errors."""


class UnbalancedParens(TreeError):
    def __init__(self, position: int, message: str = "unbalanced parentheses"):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EmptyLabel(TreeError):
    pass


class NodeWithBothChildrenAndToken(TreeError):
    pass


class EmptyInput(TreeError):
    pass


class NodeIsRoot(TreeError):
    pass


@dataclass(frozen=True)
class NodeLabel:
    """Syntactic category plus ordered function tags."""

    category: str
    function_tags: tuple[str, ...] = ()

    @property
    def raw(self) -> str:
        return "-".join((self.category,) + self.function_tags)

    def first_tag(self) -> Optional[str]:
        return self.function_tags[0] if self.function_tags else None


def parse_label(raw: str) -> NodeLabel:
    """Split a raw node label on '-' into category and function tags."""
    if not raw:
        raise EmptyLabel("empty node label")
    parts = raw.split("-")
    if not parts[0]:
        raise EmptyLabel(f"label {raw!r} has an empty category")
    return NodeLabel(parts[0], tuple(parts[1:]))


@dataclass(frozen=True)
class Tree:
    """A constituency tree node.

    Exactly one of ``children`` / ``token`` is populated: internal nodes
    have children, terminals have a token.  ``span`` is the half-open
    terminal-index interval covered by the node.
    """

    label: NodeLabel
    children: tuple["Tree", ...] = ()
    token: Optional[str] = None
    span: tuple[int, int] = (0, 0)

    def __post_init__(self):
        has_children = len(self.children) > 0
        has_token = self.token is not None
        if has_children and has_token:
            raise NodeWithBothChildrenAndToken(
                f"node {self.label.raw!r} has both children and a token"
            )
        if not has_children and not has_token:
            raise TreeError(f"node {self.label.raw!r} has neither children nor token")

    @property
    def is_terminal(self) -> bool:
        return self.token is not None

    @property
    def category(self) -> str:
        return self.label.category

    def node_at(self, path: tuple[int, ...]) -> "Tree":
        node = self
        for i in path:
            node = node.children[i]
        return node

    def iter_nodes(self) -> Iterator[tuple[tuple[int, ...], "Tree"]]:
        """Yield (path, node) pairs in depth-first preorder."""
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))

    def terminals(self) -> list["Tree"]:
        return [node for _, node in self.iter_nodes() if node.is_terminal]

    def tokens(self) -> list[str]:
        return [t.token for t in self.terminals()]

    def terminal_path(self, index: int) -> tuple[int, ...]:
        """Path to the terminal node covering terminal ``index``."""
        if not (self.span[0] <= index < self.span[1]):
            raise IndexError(f"terminal index {index} outside span {self.span}")
        path: tuple[int, ...] = ()
        node = self
        while not node.is_terminal:
            for i, child in enumerate(node.children):
                if child.span[0] <= index < child.span[1]:
                    path += (i,)
                    node = child
                    break
        return path


@dataclass(frozen=True)
class Constituent:
    """A contiguous token span dominated by one tree node."""

    span: tuple[int, int]
    text: str
    node: tuple[int, ...]  # path from root


@dataclass(frozen=True)
class Sentence:
    id: str
    tree: Tree
    tokens: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.tokens:
            object.__setattr__(self, "tokens", tuple(self.tree.tokens()))


_TOKEN_RE = re.compile(r"\(|\)|[^()\s]+")


def parse_bracketed(text: str) -> Tree:
    """Parse a single S-expression into a Tree.

    Terminals written with ``_`` get their internal spaces restored.
    Spans are assigned by left-to-right terminal enumeration from 0.
    """
    atoms = [(m.group(), m.start()) for m in _TOKEN_RE.finditer(text)]
    if not atoms:
        raise EmptyInput("no tree in input")

    pos = 0  # cursor into atoms
    next_terminal = 0

    def parse_node() -> Tree:
        nonlocal pos, next_terminal
        atom, where = atoms[pos]
        if atom != "(":
            raise UnbalancedParens(where, f"expected '(' but found {atom!r}")
        pos += 1
        if pos >= len(atoms):
            raise UnbalancedParens(len(text), "unexpected end of input")
        atom, where = atoms[pos]
        if atom in "()":
            raise EmptyLabel(f"missing node label at position {where}")
        label = parse_label(atom)
        pos += 1

        children: list[Tree] = []
        token: Optional[str] = None
        while pos < len(atoms):
            atom, where = atoms[pos]
            if atom == ")":
                pos += 1
                if token is not None:
                    span = (next_terminal, next_terminal + 1)
                    next_terminal += 1
                    return Tree(label, (), token, span)
                if not children:
                    raise TreeError(
                        f"node {label.raw!r} at position {where} has no content"
                    )
                span = (children[0].span[0], children[-1].span[1])
                return Tree(label, tuple(children), None, span)
            if atom == "(":
                if token is not None:
                    raise NodeWithBothChildrenAndToken(
                        f"node {label.raw!r} mixes token and children at position {where}"
                    )
                children.append(parse_node())
            else:
                if children:
                    raise NodeWithBothChildrenAndToken(
                        f"node {label.raw!r} mixes children and token at position {where}"
                    )
                if token is not None:
                    raise NodeWithBothChildrenAndToken(
                        f"node {label.raw!r} has more than one token at position {where}"
                    )
                token = atom.replace("_", " ")
                pos += 1
        raise UnbalancedParens(len(text), "unexpected end of input")

    tree = parse_node()
    if pos < len(atoms):
        raise UnbalancedParens(atoms[pos][1], "unexpected content after tree")
    return tree


def serialize(tree: Tree) -> str:
    """Render a tree as a canonical single-line S-expression.

    Inverse of parse_bracketed up to structural equality; spaces inside
    tokens are written as ``_``.
    """
    if tree.is_terminal:
        return f"({tree.label.raw} {tree.token.replace(' ', '_')})"
    inner = " ".join(serialize(c) for c in tree.children)
    return f"({tree.label.raw} {inner})"


def siblings(tree: Tree, node: tuple[int, ...]) -> list[Tree]:
    """All children of the node's parent except the node itself."""
    if node == ():
        raise NodeIsRoot("the root has no siblings")
    parent = tree.node_at(node[:-1])
    return [c for i, c in enumerate(parent.children) if i != node[-1]]


def is_phrase(node: Tree, phrasal_categories: frozenset[str] = DEFAULT_PHRASAL_CATEGORIES) -> bool:
    """True iff the node is internal and its category is phrasal."""
    return not node.is_terminal and node.category in phrasal_categories


def collect_words(tree: Tree, node: tuple[int, ...]) -> Constituent:
    """The constituent covering a node: its span and token text."""
    sub = tree.node_at(node)
    return Constituent(span=sub.span, text=" ".join(sub.tokens()), node=node)


def load_tree_file(path) -> list[Sentence]:
    """Read one sentence per line; blank lines and '#' comments ignored.

    Sentences receive implicit ids s1..sN in file order.
    """
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                tree = parse_bracketed(line)
            except TreeError as exc:
                raise TreeError(f"{path}:{lineno}: {exc}") from exc
            sentences.append(Sentence(id=f"s{len(sentences) + 1}", tree=tree))
    return sentences
