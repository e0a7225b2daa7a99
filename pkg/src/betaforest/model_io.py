"""Versioned structured-text (JSON) model persistence.

Round-trip safety: a deserialized model predicts identically to the
original, because floats are emitted with repr (shortest round-trip
representation).
"""

import json

import numpy as np

from .dataset import ColumnKind, ColumnSchema
from .forest import ForestModel
from .glm import BetaGlmFit, DesignSpec
from .special import Transform
from .tree import SUBSET, THRESHOLD, GrowthConfig, SplitRule, TreeNode

__all__ = ["FORMAT_VERSION", "ModelFileError", "save_model", "load_model"]

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


def _schema_to_json(schema):
    return [
        {"name": c.name, "kind": c.kind.value, "categories": list(c.categories)}
        for c in schema
    ]


def _schema_from_json(items):
    return [
        ColumnSchema(d["name"], ColumnKind(d["kind"]), tuple(d["categories"]))
        for d in items
    ]


def _flatten_tree(root: TreeNode):
    """Preorder node records:
    [feature, kind, threshold, left_cats, left_idx, right_idx, mu, phi, n_obs]."""
    nodes = []

    def rec(node):
        pos = len(nodes)
        nodes.append(None)
        if node.is_leaf:
            nodes[pos] = [-1, "", None, [], -1, -1, node.mu, node.phi, node.n_obs]
        else:
            s = node.split
            thr = None if s.kind == SUBSET else s.threshold
            cats = sorted(s.left_categories) if s.kind == SUBSET else []
            li = rec(node.left)
            ri = rec(node.right)
            nodes[pos] = [s.feature_index, s.kind, thr, cats, li, ri, None, None, node.n_obs]
        return pos

    rec(root)
    return nodes


def _unflatten_tree(nodes):
    def build(i, next_id):
        rec = nodes[i]
        feature, kind, thr, cats, li, ri, mu, phi, n_obs = rec
        node = TreeNode(node_id=next_id[0])
        next_id[0] += 1
        node.n_obs = int(n_obs)
        if feature < 0:
            node.mu = float(mu)
            node.phi = None if phi is None else float(phi)
        else:
            if kind == THRESHOLD:
                node.split = SplitRule(int(feature), THRESHOLD, threshold=float(thr))
            else:
                node.split = SplitRule(int(feature), SUBSET, left_categories=frozenset(int(c) for c in cats))
            node.left = build(li, next_id)
            node.right = build(ri, next_id)
        return node

    return build(0, [0])


def save_model(path, model):
    if isinstance(model, ForestModel):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "forest",
            "criterion": model.config.criterion,
            "transform": model.transform.value,
            "ntree": model.ntree,
            "config": {
                "mtry": model.config.mtry,
                "min_node_size": model.config.min_node_size,
                "min_child_size": model.config.min_child_size,
                "max_categories_exhaustive": model.config.max_categories_exhaustive,
                "phi_bounds": list(model.config.phi_bounds),
            },
            "scale": model.scale,
            "master_seed": model.master_seed,
            "n_train": model.n_train,
            "schema": _schema_to_json(model.schema),
            "inbag": model.inbag.tolist(),
            "trees": [_flatten_tree(t) for t in model.trees],
        }
    elif isinstance(model, BetaGlmFit):
        doc = {
            "format_version": FORMAT_VERSION,
            "kind": "glm",
            "design": {
                "intercept": model.design.intercept,
                "main_effects": list(model.design.main_effects),
                "interactions": [list(p) for p in model.design.interactions],
            },
            "beta": model.beta.tolist(),
            "phi": model.phi,
            "converged": model.converged,
            "loglik": model.loglik,
            "iterations": model.iterations,
            "columns": list(model.columns),
            "schema": _schema_to_json(model.schema),
        }
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: not a valid model file ({exc})") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported format version {version!r}")
    kind = doc.get("kind")
    if kind == "forest":
        cfg = doc["config"]
        config = GrowthConfig(
            criterion=doc["criterion"],
            mtry=cfg["mtry"],
            min_node_size=cfg["min_node_size"],
            min_child_size=cfg["min_child_size"],
            max_categories_exhaustive=cfg["max_categories_exhaustive"],
            phi_bounds=tuple(cfg["phi_bounds"]),
        )
        return ForestModel(
            trees=[_unflatten_tree(t) for t in doc["trees"]],
            config=config,
            ntree=int(doc["ntree"]),
            transform=Transform(doc["transform"]),
            inbag=np.asarray(doc["inbag"], dtype=np.int64),
            scale=float(doc["scale"]),
            schema=_schema_from_json(doc["schema"]),
            master_seed=int(doc["master_seed"]),
            n_train=int(doc["n_train"]),
        )
    if kind == "glm":
        d = doc["design"]
        design = DesignSpec(
            intercept=bool(d["intercept"]),
            main_effects=tuple(d["main_effects"]),
            interactions=tuple(tuple(p) for p in d["interactions"]),
        )
        return BetaGlmFit(
            beta=np.asarray(doc["beta"], dtype=np.float64),
            phi=float(doc["phi"]),
            converged=bool(doc["converged"]),
            loglik=float(doc["loglik"]),
            iterations=int(doc["iterations"]),
            design=design,
            columns=list(doc["columns"]),
            schema=_schema_from_json(doc["schema"]),
        )
    raise ModelFileError(f"{path}: unknown model kind {kind!r}")
