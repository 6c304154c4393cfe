"""Candidate argument extraction for a predicate.

Two extractors are provided: a sibling-walk extractor that climbs from
the predicate's preterminal to the root collecting the siblings seen on
the way (splitting a sibling into its children when those children share
one phrasal category but differ in function tag), and a node-mapping
baseline that simply proposes every tree node not dominating the
predicate.
"""

from __future__ import annotations

from dataclasses import dataclass

from srlkit.errors import SrlkitError
from srlkit.corpus import PropInstance
from srlkit.metrics import PRF
from srlkit.treebank import (
    DEFAULT_PHRASAL_CATEGORIES,
    Constituent,
    Tree,
    collect_words,
    is_phrase,
)

#: Sibling-walk modes.  In "strict" mode a sibling whose children pass the
#: structure test (>1 children, first child phrasal) but fail the
#: same-category/different-tag test contributes nothing; in "repaired"
#: mode it is collected whole instead.
ALG1_MODES = ("strict", "repaired")


class ExtractionError(SrlkitError):
    pass


class IndexOutOfRange(ExtractionError):
    pass


class NodeNotInTree(ExtractionError):
    pass


class LengthMismatch(ExtractionError):
    pass


@dataclass(frozen=True)
class CandidateSet:
    predicate_node: tuple[int, ...]
    candidates: tuple[Constituent, ...]

    def spans(self) -> list[tuple[int, int]]:
        return [c.span for c in self.candidates]


def find_predicate_node(tree: Tree, predicate_index: int) -> tuple[int, ...]:
    """Path of the deepest node whose span is exactly the predicate terminal."""
    if not (0 <= predicate_index < tree.span[1]):
        raise IndexOutOfRange(
            f"predicate index {predicate_index} outside tree span {tree.span}"
        )
    return tree.terminal_path(predicate_index)


def _check_path(tree: Tree, node: tuple[int, ...]) -> Tree:
    try:
        return tree.node_at(node)
    except IndexError:
        raise NodeNotInTree(f"no node at path {node}") from None


def _first_tag(node: Tree):
    return node.label.first_tag()


def extract_constituents(
    tree: Tree,
    predicate_node: tuple[int, ...],
    mode: str = "strict",
    phrasal_categories: frozenset[str] = DEFAULT_PHRASAL_CATEGORIES,
) -> CandidateSet:
    """Sibling-walk extraction from the predicate node up to the root.

    For each sibling S on the way up: when S has more than one child and
    its first child is phrasal, the later children are scanned; the scan
    stops at the first child whose category differs from child 0's
    (sameType fails) or whose first function tag equals child 0's
    (diffTag fails).  If both tests survive, each child of S becomes a
    candidate on its own, otherwise S is handled per ``mode``: collected
    whole ("repaired") or skipped ("strict").  Siblings failing the
    structure test are always collected whole.  Candidates appear in
    discovery order.
    """
    if mode not in ALG1_MODES:
        raise ExtractionError(f"unknown mode {mode!r}")
    _check_path(tree, predicate_node)

    candidates: list[Constituent] = []
    current = predicate_node
    while current != ():
        parent_path = current[:-1]
        parent = tree.node_at(parent_path)
        for i, sib in enumerate(parent.children):
            if i == current[-1]:
                continue
            sib_path = parent_path + (i,)
            first = sib.children[0] if sib.children else None
            if len(sib.children) > 1 and is_phrase(first, phrasal_categories):
                same_type = True
                diff_tag = True
                category = first.category
                tag = _first_tag(first)
                for child in sib.children[1:]:
                    if child.category != category:
                        same_type = False
                        break
                    if _first_tag(child) == tag:
                        diff_tag = False
                        break
                if same_type and diff_tag:
                    for j in range(len(sib.children)):
                        candidates.append(collect_words(tree, sib_path + (j,)))
                elif mode == "repaired":
                    candidates.append(collect_words(tree, sib_path))
            else:
                candidates.append(collect_words(tree, sib_path))
        current = parent_path
    return CandidateSet(predicate_node, tuple(candidates))


def node_mapping_candidates(tree: Tree, predicate_node: tuple[int, ...]) -> CandidateSet:
    """Baseline: every non-root node not covering the predicate terminal.

    Nodes sharing a span are deduplicated keeping the shallowest one
    (preorder keeps the maximal projection).
    """
    node = _check_path(tree, predicate_node)
    predicate_index = node.span[0]

    candidates: list[Constituent] = []
    seen_spans: set[tuple[int, int]] = set()
    for path, sub in tree.iter_nodes():
        if path == ():
            continue
        if sub.span[0] <= predicate_index < sub.span[1]:
            continue
        if sub.span in seen_spans:
            continue
        seen_spans.add(sub.span)
        candidates.append(collect_words(tree, path))
    return CandidateSet(predicate_node, tuple(candidates))


def score_extraction(candidate_sets: list[CandidateSet], gold: list[PropInstance]) -> PRF:
    """Unlabelled exact-span match of candidates against gold arguments."""
    if len(candidate_sets) != len(gold):
        raise LengthMismatch(
            f"{len(candidate_sets)} candidate sets vs {len(gold)} gold instances"
        )
    matched = predicted = total_gold = 0
    for cands, instance in zip(candidate_sets, gold):
        cand_spans = set(cands.spans())
        gold_spans = {arg.span for arg in instance.arguments}
        matched += len(cand_spans & gold_spans)
        predicted += len(cand_spans)
        total_gold += len(gold_spans)
    return PRF.from_counts(matched, predicted, total_gold)
