"""Python access to the kmsgraph library."""

import json as _json

from . import _kmsgraph as _core
from ._kmsgraph import Graph, KmsGraphError, run_cli, selftest, verbs

__all__ = [
    "Graph",
    "KmsGraphError",
    "classify",
    "entropy",
    "family",
    "first_return",
    "green_function",
    "martin_kernel",
    "parse",
    "run_cli",
    "selftest",
    "verbs",
    "verify_harmonic",
]


def parse(doc, depth=16):
    """Graph from a JSON document (str or dict), materialized to `depth`."""
    text = doc if isinstance(doc, str) else _json.dumps(doc)
    return Graph.parse(text, depth)


def family(name, params=None, depth=16):
    return Graph.family(name, _json.dumps(params or {}), depth)


def green_function(graph, beta, source=None, target=None, max_power=512):
    return _json.loads(_core.green_function(graph, beta, source, target, max_power))


def first_return(graph, beta, vertex=None, max_power=512):
    return _json.loads(_core.first_return(graph, beta, vertex, max_power))


def entropy(graph, vertex=None):
    return _json.loads(_core.entropy(graph, vertex))


def classify(graph, beta, vertex=None):
    return _json.loads(_core.classify(graph, beta, vertex))


def martin_kernel(graph, beta, v, w, base=None):
    return _json.loads(_core.martin_kernel(graph, beta, v, w, base))


def verify_harmonic(graph, beta, psi, mode="harmonic"):
    return _json.loads(_core.verify_harmonic(graph, beta, psi, mode))
