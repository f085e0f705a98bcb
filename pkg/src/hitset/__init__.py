"""Explicit hitting sets for read-once oblivious ABPs and related models."""

from .field import Field, Felt, make_field, smallest_prime_at_least
from .poly import PolyMap, SparsePoly, UniPoly

__all__ = ["Field", "Felt", "make_field", "smallest_prime_at_least", "PolyMap", "SparsePoly",
           "UniPoly"]
