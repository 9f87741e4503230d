"""Autoparametric cat-qubit toolkit.

Flux-ring circuit quantization, driven-dissipative cat dynamics, Wigner
tomography, and the measurement protocols built on them. The cli module
exposes the same machinery as a deterministic command-line tool.
"""

__version__ = "0.1.0"

from . import (
    circuit,
    config,
    dynamics,
    errors,
    fock,
    io,
    protocols,
    transmon,
    wigner,
)

__all__ = [
    "__version__",
    "circuit",
    "config",
    "dynamics",
    "errors",
    "fock",
    "io",
    "protocols",
    "transmon",
    "wigner",
]
