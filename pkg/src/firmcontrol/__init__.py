"""Structural controllability of directed firm networks."""
from .controllability import (ClassificationReport, NodeClass, classify_nodes, extract_driver_set,
                              oracle_classify)
from .graph import (ControlDirection, DirectedGraph, EdgeListFormat, FirmTable, IndustryScheme,
                    load_attributes, load_edges, oriented_view)
from .matching import Matching, maximum_matching, minimum_driver_count, split_bipartite
from .verifier import Certificate, build_system, controllability_rank, verify_driver_set

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport", "NodeClass", "classify_nodes", "extract_driver_set", "oracle_classify",
    "ControlDirection", "DirectedGraph", "EdgeListFormat", "FirmTable", "IndustryScheme",
    "load_attributes", "load_edges", "oriented_view",
    "Matching", "maximum_matching", "minimum_driver_count", "split_bipartite",
    "Certificate", "build_system", "controllability_rank", "verify_driver_set",
]
