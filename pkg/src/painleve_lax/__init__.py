"""Exact manipulation and numerical checks of Lax pairs for Painleve equations."""

from .symcore import DerivationTable, RatFunc, parse

__all__ = ["DerivationTable", "RatFunc", "parse"]
__version__ = "0.1.0"
