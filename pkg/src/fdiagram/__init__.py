"""Information diagrams for functions satisfying the chain rule."""

from .core import (
    ConditionalPartition,
    Diagram,
    atom_value,
    build_diagram,
    conditioned_interaction,
    dual_total_correlation,
    fcmi_image,
    is_independent,
    is_mutually_independent,
    measure,
    o_information,
    s_information,
    subset_reconstruct,
    test_fcmi,
    total_correlation,
)
from .subsets import enumerate_atoms, region

__all__ = [
    "ConditionalPartition",
    "Diagram",
    "atom_value",
    "build_diagram",
    "conditioned_interaction",
    "dual_total_correlation",
    "enumerate_atoms",
    "fcmi_image",
    "is_independent",
    "is_mutually_independent",
    "measure",
    "o_information",
    "region",
    "s_information",
    "subset_reconstruct",
    "test_fcmi",
    "total_correlation",
]
