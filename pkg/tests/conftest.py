import json

import numpy as np
import pytest

from rsman.corpus import Document, Entity, Fact, Mention, RelationSchema


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def schema():
    return RelationSchema(names=("founded", "based_in", "works_at"))


def make_doc(doc_id, sentences, entities, facts=()):
    """Entities: list of [(surface, sent_idx, start, end), ...] per entity."""
    ents = tuple(
        Entity(
            index=i,
            entity_type="X",
            mentions=tuple(Mention(s, si, a, b) for s, si, a, b in mentions),
        )
        for i, mentions in enumerate(entities)
    )
    return Document(
        id=doc_id,
        sentences=tuple(tuple(s) for s in sentences),
        entities=ents,
        facts=tuple(Fact(h, t, r) for h, t, r in facts),
    )


@pytest.fixture
def tiny_doc():
    return make_doc(
        "tiny",
        [["Ada", "Lovelace", "lived", "in", "London", "."], ["She", "wrote", "."]],
        [
            [("Ada Lovelace", 0, 0, 2), ("She", 1, 0, 1)],
            [("London", 0, 4, 5)],
        ],
        facts=[(0, 1, 1)],
    )


@pytest.fixture
def docred_json():
    docs = [
        {
            "title": "Ada",
            "sents": [["Ada", "Lovelace", "lived", "in", "London", "."], ["She", "wrote", "."]],
            "vertexSet": [
                [
                    {"name": "Ada Lovelace", "sent_id": 0, "pos": [0, 2], "type": "PER"},
                    {"name": "She", "sent_id": 1, "pos": [0, 1], "type": "PER"},
                ],
                [{"name": "London", "sent_id": 0, "pos": [4, 5], "type": "LOC"}],
            ],
            "labels": [{"h": 0, "t": 1, "r": "based_in", "evidence": [0]}],
        }
    ]
    return json.dumps(docs).encode("utf-8")
