"""Weisfeiler-Leman refinement for graphs and finite groups, CFI graphs and graph-derived p-groups."""

__version__ = "0.1.0"
