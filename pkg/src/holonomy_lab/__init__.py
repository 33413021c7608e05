"""Parallel transport, curvature and modified Levy Laplacians of holonomy on R^4 charts."""

__version__ = "0.1.0"

from .algebra import RotationPath, So4Element, left_basis, right_basis, index_hodge, so4_pairing
from .geometry import FlatChart, S4StereographicChart, builtin_chart, builtin_curve
from .gauge import BPSTField, PerturbedField, builtin_field, bpst, curvature
from .transport import TransportOptions, parallel_transport
from .levy import PathSample, laplacian

__all__ = [
    "BPSTField",
    "FlatChart",
    "PathSample",
    "PerturbedField",
    "RotationPath",
    "S4StereographicChart",
    "So4Element",
    "TransportOptions",
    "bpst",
    "builtin_chart",
    "builtin_curve",
    "builtin_field",
    "curvature",
    "index_hodge",
    "laplacian",
    "left_basis",
    "parallel_transport",
    "right_basis",
    "so4_pairing",
]
