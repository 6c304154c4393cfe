"""Role-annotated corpora: trees paired with predicate/argument records.

Prop file format, one instance per line::

    <sentence-id> <predicate-terminal-index> (<role>:<start>-<end>)*

fields space-separated, spans half-open over terminal indices.  Blank
lines and lines starting with '#' are ignored.  Sentence ids refer to
the tree file's implicit s1..sN numbering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from srlkit.errors import SrlkitError
from srlkit.treebank import Sentence, load_tree_file

CORE_ROLES = ("Arg0", "Arg1", "Arg2", "Arg3", "Arg4")

ADJUNCT_ROLES = (
    "ArgM-ADV", "ArgM-CAU", "ArgM-DIS", "ArgM-DIR", "ArgM-NEG",
    "ArgM-MNR", "ArgM-PRD", "ArgM-PRP", "ArgM-MOD", "ArgM-TMP",
    "ArgM-REC", "ArgM-GOL", "ArgM-LVB", "ArgM-EXT", "ArgM-COM",
    "ArgM-I", "ArgM-Partice", "ArgM-PNC", "ArgM-ADJ", "ArgM-RES",
)

PREDICATE_ROLE = "V"
NULL_ROLE = "NULL"

#: Closed role inventory: 5 core + 20 adjunct + V + NULL.
ROLE_INVENTORY = frozenset(CORE_ROLES) | frozenset(ADJUNCT_ROLES) | {PREDICATE_ROLE, NULL_ROLE}

#: Roles a corpus argument may carry (V marks the predicate, NULL is the
#: synthetic not-an-argument label; neither may appear in corpus files).
ARGUMENT_ROLES = frozenset(CORE_ROLES) | frozenset(ADJUNCT_ROLES)


class CorpusError(SrlkitError):
    pass


class UnknownSentenceId(CorpusError):
    pass


class UnknownRole(CorpusError):
    def __init__(self, name: str):
        super().__init__(f"unknown role {name!r}")
        self.name = name


class OverlappingSpans(CorpusError):
    pass


class SpanOutOfRange(CorpusError):
    pass


class MalformedPropLine(CorpusError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Argument:
    span: tuple[int, int]
    role: str


@dataclass(frozen=True)
class PropInstance:
    sentence_id: str
    predicate_index: int
    arguments: tuple[Argument, ...]


@dataclass(frozen=True)
class Corpus:
    sentences: dict[str, Sentence]
    instances: tuple[PropInstance, ...]
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def sentence_of(self, instance: PropInstance) -> Sentence:
        return self.sentences[instance.sentence_id]


def _parse_prop_line(lineno: int, line: str) -> PropInstance:
    parts = line.split()
    if len(parts) < 2:
        raise MalformedPropLine(lineno, "expected '<id> <predicate-index> ...'")
    sentence_id = parts[0]
    try:
        predicate_index = int(parts[1])
    except ValueError:
        raise MalformedPropLine(lineno, f"bad predicate index {parts[1]!r}") from None
    arguments = []
    for group in parts[2:]:
        if ":" not in group:
            raise MalformedPropLine(lineno, f"bad argument {group!r}, expected role:start-end")
        role, _, span_text = group.rpartition(":")
        if role not in ROLE_INVENTORY:
            raise UnknownRole(role)
        if role not in ARGUMENT_ROLES:
            raise MalformedPropLine(lineno, f"role {role!r} is not allowed as an argument")
        lo, sep, hi = span_text.partition("-")
        try:
            start, end = int(lo), int(hi)
        except ValueError:
            raise MalformedPropLine(lineno, f"bad span {span_text!r}") from None
        if not sep:
            raise MalformedPropLine(lineno, f"bad span {span_text!r}")
        arguments.append(Argument((start, end), role))
    return PropInstance(sentence_id, predicate_index, tuple(arguments))


def _validate_instance(instance: PropInstance, sentence: Sentence) -> None:
    n = len(sentence.tokens)
    if not (0 <= instance.predicate_index < n):
        raise SpanOutOfRange(
            f"{instance.sentence_id}: predicate index {instance.predicate_index} "
            f"outside sentence of {n} tokens"
        )
    seen: list[tuple[int, int]] = []
    for arg in instance.arguments:
        start, end = arg.span
        if not (0 <= start < end <= n):
            raise SpanOutOfRange(
                f"{instance.sentence_id}: span {start}-{end} outside sentence of {n} tokens"
            )
        if start <= instance.predicate_index < end:
            raise OverlappingSpans(
                f"{instance.sentence_id}: span {start}-{end} covers the predicate terminal"
            )
        for other in seen:
            if start < other[1] and other[0] < end:
                raise OverlappingSpans(
                    f"{instance.sentence_id}: spans {other[0]}-{other[1]} and "
                    f"{start}-{end} overlap"
                )
        seen.append(arg.span)


def load_prop_file(path, sentences: dict[str, Sentence], drop_invalid: bool = False):
    """Parse and validate a prop file against loaded sentences.

    With drop_invalid, offending lines are skipped and reported in the
    returned diagnostics list instead of raised.
    """
    instances: list[PropInstance] = []
    diagnostics: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                instance = _parse_prop_line(lineno, line)
                if instance.sentence_id not in sentences:
                    raise UnknownSentenceId(
                        f"line {lineno}: unknown sentence id {instance.sentence_id!r}"
                    )
                _validate_instance(instance, sentences[instance.sentence_id])
            except CorpusError as exc:
                if not drop_invalid:
                    raise
                diagnostics.append(f"{path}:{lineno}: dropped: {exc}")
                continue
            instances.append(instance)
    return instances, diagnostics


def load_corpus(tree_path, prop_path, drop_invalid: bool = False) -> Corpus:
    """Load a tree file plus prop file into a validated Corpus."""
    sentences = {s.id: s for s in load_tree_file(tree_path)}
    instances, diagnostics = load_prop_file(prop_path, sentences, drop_invalid=drop_invalid)
    return Corpus(sentences, tuple(instances), tuple(diagnostics))


def filter_simple(corpus: Corpus) -> Corpus:
    """Keep only sentences carrying exactly one prop instance.

    Idempotent; the number of dropped sentences is recorded in the
    returned corpus' diagnostics.
    """
    counts: dict[str, int] = {}
    for instance in corpus.instances:
        counts[instance.sentence_id] = counts.get(instance.sentence_id, 0) + 1
    keep = {sid for sid, n in counts.items() if n == 1}
    sentences = {sid: s for sid, s in corpus.sentences.items() if sid in keep}
    instances = tuple(i for i in corpus.instances if i.sentence_id in keep)
    dropped = len(corpus.sentences) - len(sentences)
    note = f"filter_simple: kept {len(sentences)} sentences, dropped {dropped}"
    return Corpus(sentences, instances, corpus.diagnostics + (note,))


def gold_label_of(instance: PropInstance, span: tuple[int, int]) -> str:
    """Role of the argument whose span exactly equals ``span``, else NULL."""
    for arg in instance.arguments:
        if arg.span == span:
            return arg.role
    return NULL_ROLE
