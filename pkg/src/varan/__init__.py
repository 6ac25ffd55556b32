"""varan: certification toolkit for second-order variational analysis.

Computes Moreau envelopes, second-order subderivatives, Hessian and
quadratic bundles of low-dimensional prox-regular functions, and
certifies variational convexity and tilt stability with the modulus
relationships between them.
"""

from .corpus import CorpusEntry, corpus_catalog, corpus_get, corpus_names
from .extreal import ExtendedReal
from .funcspace import (
    AnchorSpec,
    FunctionHandle,
    Localization,
    SubgradientPair,
    add_quadratic,
    attentive_member,
    lsc_probe,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorSpec",
    "CorpusEntry",
    "ExtendedReal",
    "FunctionHandle",
    "Localization",
    "SubgradientPair",
    "add_quadratic",
    "attentive_member",
    "corpus_catalog",
    "corpus_get",
    "corpus_names",
    "lsc_probe",
    "__version__",
]
