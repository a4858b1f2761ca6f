"""Python bindings for the limid solver.

Documents are accepted either as JSON text or as the equivalent dict, and
results come back as dicts.
"""

import json

from ._limid import (
    InvalidArgument,
    ParseError,
    ResourceLimit,
    run_cli,
)
from . import _limid

__all__ = [
    "InvalidArgument",
    "ParseError",
    "ResourceLimit",
    "canonical",
    "expected_utility",
    "generate",
    "oracle",
    "reduce",
    "run_cli",
    "solve",
    "validate",
]


def _text(document):
    return document if isinstance(document, str) else json.dumps(document)


def canonical(document):
    return json.loads(_limid.canonical(_text(document)))


def validate(document):
    return _limid.validate(_text(document))


def solve(document, epsilon=0.1, exact=False, stats=False):
    return json.loads(_limid.solve(_text(document), epsilon, exact, stats))


def oracle(document, cap=10_000_000):
    return json.loads(_limid.oracle(_text(document), cap))


def reduce(document):
    return json.loads(_limid.reduce(_text(document)))


def expected_utility(document, strategy):
    return _limid.expected_utility(_text(document), _text(strategy))


def generate(chance=4, decisions=2, card=2, max_parents=2, values=1, seed=0):
    return json.loads(_limid.generate(chance, decisions, card, max_parents, values, seed))
