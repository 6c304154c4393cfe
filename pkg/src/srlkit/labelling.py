"""End-to-end labelling: extraction + features + classification.

Two strategies: one-step multiclass labelling over roles plus NULL, and
two-step labelling (binary ARG/NULL identification followed by role
classification over identified candidates).  Candidates are classified
independently of each other, so overlapping or repeated role predictions
are possible by design.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from srlkit.classifiers import (
    FeatureVector,
    LinearModel,
    TrainConfig,
    model_from_dict,
    model_to_dict,
    predict,
    train,
)
from srlkit.clustering import ClusterModel, cluster_model_from_text, cluster_model_to_text
from srlkit.corpus import NULL_ROLE, PREDICATE_ROLE, ROLE_INVENTORY, Corpus, UnknownRole, gold_label_of
from srlkit.errors import SrlkitError
from srlkit.extraction import (
    CandidateSet,
    extract_constituents,
    find_predicate_node,
    node_mapping_candidates,
)
from srlkit.features import (
    FeatureDictionary,
    FeatureSetConfig,
    extract_features,
    feature_set,
    vectorize,
)
from srlkit.treebank import Sentence, Tree

IDENTIFIER_ARG = "ARG"

STRATEGIES = ("one-step", "two-step")
EXTRACTORS = ("alg1", "node-mapping")

_PIPELINE_FORMAT = "srlkit-pipeline"
_PIPELINE_VERSION = 1


class LabellingError(SrlkitError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to train a pipeline, minus the corpus."""

    feature_set: FeatureSetConfig
    strategy: str = "one-step"
    extractor: str = "alg1"
    alg1_mode: str = "strict"
    train: TrainConfig = field(default_factory=TrainConfig)
    cluster_model: Optional[ClusterModel] = field(default=None, compare=False)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise LabellingError(f"unknown strategy {self.strategy!r}")
        if self.extractor not in EXTRACTORS:
            raise LabellingError(f"unknown extractor {self.extractor!r}")

    def echo(self) -> dict:
        """Flat description of the effective configuration."""
        return {
            "strategy": self.strategy,
            "extractor": self.extractor,
            "alg1_mode": self.alg1_mode,
            "feature_set": self.feature_set.name,
            "templates": [
                t for t in sorted(self.feature_set.templates)
            ],
            "classifier": self.train.kind,
            "l2_strength": self.train.l2_strength,
            "svm_c": self.train.svm_c,
            "max_iter": self.train.max_iter,
            "tol": self.train.tol,
            "seed": self.train.seed,
            "cluster_model": self.cluster_model is not None,
        }


@dataclass(frozen=True)
class LabelledSentence:
    sentence_id: str
    predicate_index: int
    predictions: tuple[tuple[tuple[int, int], str], ...]  # ((start, end), role)


@dataclass
class SrlPipeline:
    config: PipelineConfig
    models: tuple[LinearModel, ...]  # (labeller,) or (identifier, classifier)

    def __post_init__(self):
        expected = 1 if self.config.strategy == "one-step" else 2
        if len(self.models) != expected:
            raise LabellingError(
                f"{self.config.strategy} needs {expected} model(s), got {len(self.models)}"
            )


def extract_candidates(tree: Tree, predicate_node: tuple[int, ...], config: PipelineConfig) -> CandidateSet:
    if config.extractor == "alg1":
        return extract_constituents(tree, predicate_node, mode=config.alg1_mode)
    return node_mapping_candidates(tree, predicate_node)


def build_training_data(
    corpus: Corpus,
    config: PipelineConfig,
    dictionary: FeatureDictionary,
) -> list[tuple[FeatureVector, str]]:
    """Candidate rows with gold roles (exact span match, else NULL).

    The dictionary grows with every unseen feature; freeze it afterwards.
    """
    data: list[tuple[FeatureVector, str]] = []
    for instance in corpus.instances:
        tree = corpus.sentence_of(instance).tree
        predicate_node = find_predicate_node(tree, instance.predicate_index)
        candidate_set = extract_candidates(tree, predicate_node, config)
        for candidate in candidate_set.candidates:
            instances = extract_features(
                candidate, predicate_node, tree, config.feature_set, config.cluster_model
            )
            fv = vectorize(instances, dictionary)
            data.append((fv, gold_label_of(instance, candidate.span)))
    return data


def train_pipeline(corpus: Corpus, config: PipelineConfig) -> SrlPipeline:
    """Train the one or two models the strategy calls for."""
    if not corpus.instances:
        raise LabellingError("cannot train on an empty corpus")
    dictionary = FeatureDictionary()
    data = build_training_data(corpus, config, dictionary)
    dictionary.freeze()
    if config.strategy == "one-step":
        models = (train(data, config.train, dictionary),)
    else:
        identifier_data = [
            (fv, IDENTIFIER_ARG if role != NULL_ROLE else NULL_ROLE) for fv, role in data
        ]
        classifier_data = [(fv, role) for fv, role in data if role != NULL_ROLE]
        models = (
            train(identifier_data, config.train, dictionary),
            train(classifier_data, config.train, dictionary),
        )
    return SrlPipeline(config, models)


def label_sentence(pipeline: SrlPipeline, sentence: Sentence, predicate_index: int) -> LabelledSentence:
    """Classify every candidate independently and keep the argument ones."""
    tree = sentence.tree
    predicate_node = find_predicate_node(tree, predicate_index)
    candidate_set = extract_candidates(tree, predicate_node, pipeline.config)
    predictions: list[tuple[tuple[int, int], str]] = []
    for candidate in candidate_set.candidates:
        instances = extract_features(
            candidate,
            predicate_node,
            tree,
            pipeline.config.feature_set,
            pipeline.config.cluster_model,
        )
        fv = vectorize(instances, pipeline.models[0].dictionary)
        if pipeline.config.strategy == "one-step":
            role, _ = predict(pipeline.models[0], fv)
        else:
            decision, _ = predict(pipeline.models[0], fv)
            if decision != IDENTIFIER_ARG:
                continue
            role, _ = predict(pipeline.models[1], fv)
        if role in (NULL_ROLE, PREDICATE_ROLE):
            continue
        predictions.append((candidate.span, role))
    return LabelledSentence(sentence.id, predicate_index, tuple(predictions))


def label_corpus(pipeline: SrlPipeline, corpus: Corpus) -> list[LabelledSentence]:
    return [
        label_sentence(pipeline, corpus.sentence_of(instance), instance.predicate_index)
        for instance in corpus.instances
    ]


# --- persistence ---------------------------------------------------------


def save_pipeline(pipeline: SrlPipeline, path) -> None:
    config = pipeline.config
    payload = {
        "format": _PIPELINE_FORMAT,
        "version": _PIPELINE_VERSION,
        "strategy": config.strategy,
        "extractor": config.extractor,
        "alg1_mode": config.alg1_mode,
        "feature_set": {
            "name": config.feature_set.name,
            "templates": sorted(config.feature_set.templates),
        },
        "train": {
            "kind": config.train.kind,
            "l2_strength": config.train.l2_strength,
            "svm_c": config.train.svm_c,
            "max_iter": config.train.max_iter,
            "tol": config.train.tol,
            "seed": config.train.seed,
        },
        "cluster_model": (
            cluster_model_to_text(config.cluster_model) if config.cluster_model else None
        ),
        "models": [model_to_dict(m) for m in pipeline.models],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_pipeline(path) -> SrlPipeline:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format") != _PIPELINE_FORMAT:
            raise LabellingError(f"not a pipeline file: {path}")
        if payload.get("version") != _PIPELINE_VERSION:
            raise LabellingError(f"unsupported pipeline version {payload.get('version')!r}")
        fs = FeatureSetConfig(
            payload["feature_set"]["name"], frozenset(payload["feature_set"]["templates"])
        )
        train_cfg = TrainConfig(**payload["train"])
        cluster = (
            cluster_model_from_text(payload["cluster_model"])
            if payload["cluster_model"]
            else None
        )
        config = PipelineConfig(
            feature_set=fs,
            strategy=payload["strategy"],
            extractor=payload["extractor"],
            alg1_mode=payload["alg1_mode"],
            train=train_cfg,
            cluster_model=cluster,
        )
        models = tuple(model_from_dict(m) for m in payload["models"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise LabellingError(f"malformed pipeline file {path}: {exc}") from exc
    return SrlPipeline(config, models)


# --- labelled output files ------------------------------------------------


def write_labelled(labelled: list[LabelledSentence], path, header: Optional[list[str]] = None) -> None:
    """One line per prediction, in the prop file grammar.

    Instances without predictions still get a bare ``<id> <index>`` line
    so files stay alignable with gold.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for comment in header or []:
            fh.write(f"# {comment}\n")
        for item in labelled:
            if not item.predictions:
                fh.write(f"{item.sentence_id} {item.predicate_index}\n")
                continue
            for (start, end), role in item.predictions:
                fh.write(f"{item.sentence_id} {item.predicate_index} {role}:{start}-{end}\n")


def read_labelled(path) -> list[LabelledSentence]:
    """Read prop-grammar lines, merging lines that share (id, index).

    Lenient counterpart of the corpus loader: spans are not validated
    against trees, so prediction files with overlaps load fine.
    """
    merged: dict[tuple[str, int], list[tuple[tuple[int, int], str]]] = {}
    order: list[tuple[str, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise LabellingError(f"{path}:{lineno}: expected '<id> <index> ...'")
            try:
                key = (parts[0], int(parts[1]))
            except ValueError:
                raise LabellingError(f"{path}:{lineno}: bad predicate index {parts[1]!r}") from None
            if key not in merged:
                merged[key] = []
                order.append(key)
            for group in parts[2:]:
                role, _, span_text = group.rpartition(":")
                if role not in ROLE_INVENTORY:
                    raise UnknownRole(role)
                lo, sep, hi = span_text.partition("-")
                if not sep:
                    raise LabellingError(f"{path}:{lineno}: bad span {span_text!r}")
                try:
                    span = (int(lo), int(hi))
                except ValueError:
                    raise LabellingError(f"{path}:{lineno}: bad span {span_text!r}") from None
                merged[key].append((span, role))
    return [
        LabelledSentence(sid, idx, tuple(merged[(sid, idx)])) for sid, idx in order
    ]
