"""Shared helpers for the test suite.

Corpus entries are cheap to construct, so fixtures hand out fresh
handles rather than caching anything mutable.
"""
import numpy as np
import pytest

from varan.corpus import corpus_get, corpus_names
from varan.funcspace import SubgradientPair


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_anchor():
    """Build the SubgradientPair for a corpus entry's declared anchor."""

    def _make(entry, index: int = 0) -> SubgradientPair:
        a = entry.anchors[index]
        return SubgradientPair(a.x, a.v, float(entry.handle(a.x)))

    return _make


def positive_entries():
    out = []
    for name in corpus_names():
        e = corpus_get(name)
        if not e.negative:
            out.append(e)
    return out


def one_dim_prox_entries():
    return [e for e in positive_entries() if e.handle.dim == 1 and e.handle.prox is not None]
