"""Exact finite-level computations on the Bruhat-Tits tree of PGL2 over a local field."""

from btlab.localfield import Field, FieldConfig, PLUS_INFINITY, QuotientElement
from btlab.bttree import Arrow, End, SubtreeWindow, Tree, VertexLabel

__all__ = [
    "Arrow",
    "End",
    "Field",
    "FieldConfig",
    "PLUS_INFINITY",
    "QuotientElement",
    "SubtreeWindow",
    "Tree",
    "VertexLabel",
]

__version__ = "0.1.0"
