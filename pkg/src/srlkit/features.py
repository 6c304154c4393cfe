"""Feature templates over (candidate, predicate, tree) triples.

Each template renders one categorical value; the rendered form is
``Template=value``.  Feature sets are named presets (phi0..phi16) or
explicit template lists.  A FeatureDictionary maps rendered features to
dense integer indices for the linear classifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from srlkit.clustering import assign_cluster
from srlkit.errors import SrlkitError
from srlkit.treebank import Constituent, Tree

# Words that signal passive voice when they precede the predicate inside
# its clause.  Configuration data: the marker set is corpus-dependent.
DEFAULT_PASSIVE_MARKERS = frozenset({"bị", "được"})

_CLAUSE_CATEGORIES = frozenset({"S", "SBAR"})

ABSENT = "∅"

UP = "↑"
DOWN = "↓"

#: All implemented templates, in the order extract_features emits them.
CANONICAL_TEMPLATE_ORDER = (
    "PhraseType",
    "Path",
    "PartialPath",
    "Distance",
    "Position",
    "Voice",
    "HeadWord",
    "Subcategorization",
    "FunctionTag",
    "PredicateType",
    "Predicate",
    "PredicateCluster",
    "HeadWordCluster",
)

TEMPLATE_INVENTORY = frozenset(CANONICAL_TEMPLATE_ORDER)

CLUSTER_TEMPLATES = frozenset({"PredicateCluster", "HeadWordCluster"})


class FeatureError(SrlkitError):
    pass


class SameNode(FeatureError):
    pass


class PredicateIsRoot(FeatureError):
    pass


class MissingClusterModel(FeatureError):
    pass


class UnknownFeatureSet(FeatureError):
    pass


class UnknownTemplate(FeatureError):
    pass


@dataclass(frozen=True)
class FeatureInstance:
    template: str
    value: str

    @property
    def rendered(self) -> str:
        return f"{self.template}={self.value}"


@dataclass(frozen=True)
class FeatureSetConfig:
    name: str
    templates: frozenset[str]

    def __post_init__(self):
        unknown = self.templates - TEMPLATE_INVENTORY
        if unknown:
            raise UnknownTemplate(f"unknown templates: {sorted(unknown)}")

    @property
    def needs_cluster_model(self) -> bool:
        return bool(self.templates & CLUSTER_TEMPLATES)


def _build_presets() -> dict[str, frozenset[str]]:
    phi: dict[int, frozenset[str]] = {}
    phi[0] = frozenset(
        {"PhraseType", "Path", "Position", "Voice", "HeadWord", "Subcategorization", "Predicate"}
    )
    phi[1] = phi[0] | {"FunctionTag"}
    phi[2] = phi[0] | {"PredicateType"}
    phi[3] = phi[0] | {"Distance"}
    phi[4] = phi[0] | {"FunctionTag", "Distance"}
    phi[5] = phi[4] - {"Predicate"} | {"PredicateCluster"}
    phi[6] = phi[4] - {"HeadWord"} | {"HeadWordCluster"}
    phi[7] = phi[4] - {"Path"} | {"PartialPath"}
    phi[8] = phi[5]
    phi[9] = phi[8] - {"FunctionTag"}
    phi[10] = phi[8] - {"PredicateCluster"}
    phi[11] = phi[8] - {"HeadWord"}
    phi[12] = phi[8] - {"Path"}
    phi[13] = phi[8] - {"Position"}
    phi[14] = phi[8] - {"Voice"}
    phi[15] = phi[8] - {"Subcategorization"}
    phi[16] = phi[10] & phi[15]
    return {f"phi{i}": templates for i, templates in phi.items()}


FEATURE_SET_PRESETS = _build_presets()


def feature_set(name: str) -> FeatureSetConfig:
    """Look up a preset feature set by name (phi0..phi16)."""
    try:
        return FeatureSetConfig(name, FEATURE_SET_PRESETS[name])
    except KeyError:
        raise UnknownFeatureSet(f"unknown feature set {name!r}") from None


def parse_feature_config(path) -> FeatureSetConfig:
    """Read a key=value config file defining a feature set.

    Recognized keys: ``name`` (optional) and ``templates`` (comma-joined
    template names).
    """
    name = "custom"
    templates: Optional[frozenset[str]] = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FeatureError(f"bad config line {line!r}")
            key, value = key.strip(), value.strip()
            if key == "name":
                name = value
            elif key == "templates":
                templates = frozenset(t.strip() for t in value.split(",") if t.strip())
            else:
                raise FeatureError(f"unknown config key {key!r}")
    if templates is None:
        raise FeatureError("config file defines no templates")
    return FeatureSetConfig(name, templates)


# --- path helpers -----------------------------------------------------


def _lca_depth(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    depth = 0
    for x, y in zip(a, b):
        if x != y:
            break
        depth += 1
    return depth


def _path_categories(tree: Tree, candidate: tuple[int, ...], predicate: tuple[int, ...]):
    """(ascending, descending) category lists between the two nodes.

    ascending runs from the candidate up to and including the lowest
    common ancestor; descending continues down to the predicate.
    """
    if candidate == predicate:
        raise SameNode("candidate and predicate are the same node")
    k = _lca_depth(candidate, predicate)
    up = [tree.node_at(candidate[:i]).category for i in range(len(candidate), k - 1, -1)]
    down = [tree.node_at(predicate[:i]).category for i in range(k + 1, len(predicate) + 1)]
    return up, down


# --- template functions -----------------------------------------------


def phrase_type(candidate: Constituent, tree: Tree) -> FeatureInstance:
    """Syntactic category of the candidate's node."""
    return FeatureInstance("PhraseType", tree.node_at(candidate.node).category)


def parse_tree_path(candidate: Constituent, predicate_node: tuple[int, ...], tree: Tree) -> FeatureInstance:
    """Categories along the shortest tree path, with direction arrows."""
    up, down = _path_categories(tree, candidate.node, predicate_node)
    return FeatureInstance("Path", UP.join(up) + "".join(DOWN + c for c in down))


def partial_path(candidate: Constituent, predicate_node: tuple[int, ...], tree: Tree) -> FeatureInstance:
    """The ascending half of the path, ending at the common ancestor."""
    up, _ = _path_categories(tree, candidate.node, predicate_node)
    return FeatureInstance("PartialPath", UP.join(up))


def distance(candidate: Constituent, predicate_node: tuple[int, ...], tree: Tree) -> FeatureInstance:
    """Number of edges on the full tree path."""
    up, down = _path_categories(tree, candidate.node, predicate_node)
    return FeatureInstance("Distance", str(len(up) - 1 + len(down)))


def position(candidate: Constituent, predicate_index: int) -> FeatureInstance:
    """0 when the candidate lies wholly before the predicate, else 1."""
    return FeatureInstance("Position", "0" if candidate.span[1] <= predicate_index else "1")


def voice(
    tree: Tree,
    predicate_node: tuple[int, ...],
    passive_markers: frozenset[str] = DEFAULT_PASSIVE_MARKERS,
) -> FeatureInstance:
    """1 for active voice, 0 for passive.

    Passive is flagged when a marker word occurs before the predicate
    inside the predicate's clause (lowest S/SBAR ancestor, else root).
    """
    clause = tree
    for i in range(len(predicate_node) - 1, -1, -1):
        node = tree.node_at(predicate_node[:i])
        if node.category in _CLAUSE_CATEGORIES:
            clause = node
            break
    predicate_index = tree.node_at(predicate_node).span[0]
    for terminal in clause.terminals():
        if terminal.span[0] >= predicate_index:
            break
        if terminal.token in passive_markers:
            return FeatureInstance("Voice", "0")
    return FeatureInstance("Voice", "1")


def head_word(candidate: Constituent, tree: Tree) -> FeatureInstance:
    """First terminal token of the candidate."""
    return FeatureInstance("HeadWord", tree.node_at(candidate.node).tokens()[0])


def subcategorization(predicate_node: tuple[int, ...], tree: Tree) -> FeatureInstance:
    """Production around the predicate: parent category plus children."""
    if predicate_node == ():
        raise PredicateIsRoot("predicate node has no parent")
    parent = tree.node_at(predicate_node[:-1])
    inner = ",".join(c.category for c in parent.children)
    return FeatureInstance("Subcategorization", f"{parent.category}({inner})")


def function_tag(candidate: Constituent, tree: Tree) -> FeatureInstance:
    """First function tag of the candidate's node; H head markers are
    skipped since they mark headedness, not grammatical function."""
    tags = [t for t in tree.node_at(candidate.node).label.function_tags if t != "H"]
    return FeatureInstance("FunctionTag", tags[0] if tags else ABSENT)


def predicate_type(predicate_node: tuple[int, ...], tree: Tree) -> FeatureInstance:
    """Category of the predicate's preterminal."""
    return FeatureInstance("PredicateType", tree.node_at(predicate_node).category)


def predicate_word(predicate_node: tuple[int, ...], tree: Tree) -> FeatureInstance:
    """The predicate token itself, lowercased."""
    return FeatureInstance("Predicate", tree.node_at(predicate_node).tokens()[0].lower())


def word_cluster(word: str, cluster_model, template: str = "PredicateCluster") -> FeatureInstance:
    """Cluster id of a word; unknown words map to the reserved id."""
    return FeatureInstance(template, str(assign_cluster(cluster_model, word)))


def extract_features(
    candidate: Constituent,
    predicate_node: tuple[int, ...],
    tree: Tree,
    config: FeatureSetConfig,
    cluster_model=None,
    passive_markers: frozenset[str] = DEFAULT_PASSIVE_MARKERS,
) -> list[FeatureInstance]:
    """Instantiate every template of ``config``, in canonical order."""
    if config.needs_cluster_model and cluster_model is None:
        raise MissingClusterModel(
            f"feature set {config.name!r} needs a cluster model"
        )
    predicate_index = tree.node_at(predicate_node).span[0]
    out: list[FeatureInstance] = []
    for template in CANONICAL_TEMPLATE_ORDER:
        if template not in config.templates:
            continue
        if template == "PhraseType":
            out.append(phrase_type(candidate, tree))
        elif template == "Path":
            out.append(parse_tree_path(candidate, predicate_node, tree))
        elif template == "PartialPath":
            out.append(partial_path(candidate, predicate_node, tree))
        elif template == "Distance":
            out.append(distance(candidate, predicate_node, tree))
        elif template == "Position":
            out.append(position(candidate, predicate_index))
        elif template == "Voice":
            out.append(voice(tree, predicate_node, passive_markers))
        elif template == "HeadWord":
            out.append(head_word(candidate, tree))
        elif template == "Subcategorization":
            out.append(subcategorization(predicate_node, tree))
        elif template == "FunctionTag":
            out.append(function_tag(candidate, tree))
        elif template == "PredicateType":
            out.append(predicate_type(predicate_node, tree))
        elif template == "Predicate":
            out.append(predicate_word(predicate_node, tree))
        elif template == "PredicateCluster":
            word = tree.node_at(predicate_node).tokens()[0]
            out.append(word_cluster(word, cluster_model, "PredicateCluster"))
        elif template == "HeadWordCluster":
            word = tree.node_at(candidate.node).tokens()[0]
            out.append(word_cluster(word, cluster_model, "HeadWordCluster"))
    return out


# --- feature dictionary ------------------------------------------------


@dataclass
class FeatureDictionary:
    """Dense mapping from rendered feature strings to integer indices.

    While unfrozen, unseen features get fresh indices; once frozen they
    are silently dropped.
    """

    mapping: dict[str, int] = field(default_factory=dict)
    frozen: bool = False

    def __len__(self) -> int:
        return len(self.mapping)

    def index_of(self, rendered: str) -> Optional[int]:
        idx = self.mapping.get(rendered)
        if idx is None and not self.frozen:
            idx = len(self.mapping)
            self.mapping[rendered] = idx
        return idx

    def freeze(self) -> "FeatureDictionary":
        self.frozen = True
        return self

    def to_list(self) -> list[str]:
        return sorted(self.mapping, key=self.mapping.get)

    @classmethod
    def from_list(cls, features: list[str], frozen: bool = True) -> "FeatureDictionary":
        return cls({f: i for i, f in enumerate(features)}, frozen)


def vectorize(instances: list[FeatureInstance], dictionary: FeatureDictionary) -> tuple[int, ...]:
    """Binary sparse vector: the sorted set of active feature indices."""
    indices = set()
    for instance in instances:
        idx = dictionary.index_of(instance.rendered)
        if idx is not None:
            indices.add(idx)
    return tuple(sorted(indices))
