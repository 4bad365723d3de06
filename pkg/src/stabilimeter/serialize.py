"""Concept serialization.

Trees and constants serialize to JSON documents (tree nodes are
`{"attribute": name, "children": [...]}` or `{"leaf": class}`); instance
concepts serialize as their stored dataset plus k; formulas as prefix
s-expressions, either embedded in JSON or as bare `.sexpr` text files.
"""
from __future__ import annotations

import json

import numpy as np

from .agreement import FormulaConcept, formula_to_sexpr, parse_formula
from .core import Attribute, AttributeSchema, Concept, ConstantConcept
from .errors import ParseError
from .learners import InstanceConcept, TreeConcept, _Leaf, _Split

__all__ = [
    "schema_to_list",
    "schema_from_list",
    "concept_to_dict",
    "concept_from_dict",
    "save_concept",
    "load_concept",
]


def schema_to_list(schema: AttributeSchema) -> list[dict]:
    return [{"name": a.name, "levels": list(a.levels)} for a in schema.attributes]


def schema_from_list(items) -> AttributeSchema:
    try:
        return AttributeSchema(
            tuple(Attribute(item["name"], tuple(item["levels"])) for item in items)
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed schema document: {exc}") from exc


def _tree_node_to_dict(node, schema: AttributeSchema, classes) -> dict:
    if isinstance(node, _Leaf):
        return {"leaf": classes[node.label]}
    return {
        "attribute": schema.attributes[node.attribute].name,
        "children": [_tree_node_to_dict(c, schema, classes) for c in node.children],
    }


def _tree_node_from_dict(doc, schema: AttributeSchema, classes):
    if "leaf" in doc:
        label = doc["leaf"]
        if label not in classes:
            raise ParseError(f"unknown leaf class {label!r}")
        return _Leaf(classes.index(label))
    try:
        attr = schema.index_of(doc["attribute"])
        children = doc["children"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed tree node: {exc}") from exc
    if len(children) != schema.attributes[attr].cardinality:
        raise ParseError(
            f"node on {doc['attribute']!r} needs one child per level"
        )
    return _Split(attr, tuple(_tree_node_from_dict(c, schema, classes)
                              for c in children))


def concept_to_dict(concept: Concept) -> dict:
    base = {
        "kind": concept.kind,
        "schema": schema_to_list(concept.schema),
        "classes": list(concept.classes),
    }
    if isinstance(concept, ConstantConcept):
        base["class"] = concept.classes[concept.class_index]
    elif isinstance(concept, TreeConcept):
        base["root"] = _tree_node_to_dict(concept.root, concept.schema,
                                          concept.classes)
    elif isinstance(concept, InstanceConcept):
        base["k"] = concept.k
        base["vectors"] = concept.vectors.tolist()
        base["labels"] = concept.labels.tolist()
    elif isinstance(concept, FormulaConcept):
        base["expr"] = formula_to_sexpr(concept.formula)
    else:
        raise ParseError(f"cannot serialize concept kind {concept.kind!r}")
    return base


def concept_from_dict(doc: dict) -> Concept:
    try:
        kind = doc["kind"]
        schema = schema_from_list(doc["schema"])
        classes = tuple(doc["classes"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed concept document: {exc}") from exc
    if kind == "constant":
        if doc["class"] not in classes:
            raise ParseError(f"unknown class {doc['class']!r}")
        return ConstantConcept(schema, classes, classes.index(doc["class"]))
    if kind == "tree":
        return TreeConcept(schema, classes,
                           _tree_node_from_dict(doc["root"], schema, classes))
    if kind == "instances":
        return InstanceConcept(schema, classes,
                               np.array(doc["vectors"], dtype=np.int64),
                               np.array(doc["labels"], dtype=np.int64),
                               int(doc["k"]))
    if kind == "formula":
        return FormulaConcept(parse_formula(doc["expr"]), schema=schema)
    raise ParseError(f"unknown concept kind {kind!r}")


def save_concept(concept: Concept, path) -> None:
    with open(path, "w") as fh:
        json.dump(concept_to_dict(concept), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_concept(path, num_vars: int | None = None) -> Concept:
    """Load a concept file.

    Files whose content starts with `(` (or `true`/`false`) are parsed as
    bare formula s-expressions; the variable count is inferred from the
    highest variable index unless `num_vars` widens it. Anything else must
    be a concept JSON document.
    """
    with open(path) as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped.startswith("(") or stripped in ("true", "false"):
        return FormulaConcept(parse_formula(stripped), num_vars=num_vars)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: neither a formula s-expression nor valid "
                         f"JSON ({exc})") from exc
    return concept_from_dict(doc)
