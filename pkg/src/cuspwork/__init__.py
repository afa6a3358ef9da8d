"""Combinatorial workbench for cusped spaces, bicombings and weighted patterns."""
__version__ = "0.1.0"
