"""Axiomatic pipeline specifications, their automata and an operational model."""

__version__ = "0.1.0"
