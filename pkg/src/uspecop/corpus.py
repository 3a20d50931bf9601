"""Bundled example axiom sets, programs and traces."""

from __future__ import annotations

from importlib import resources

from .core import Program
from .lang import AxiomSet, parse_axioms, parse_program


def path(name: str):
    return resources.files(__package__).joinpath("corpus", name)


def text(name: str) -> str:
    return path(name).read_text(encoding="utf-8")


def axioms(name: str) -> AxiomSet:
    return parse_axioms(text(name if name.endswith(".uspec") else name + ".uspec"), name)


def program(name: str) -> Program:
    return parse_program(text(name if name.endswith(".uprog") else name + ".uprog"), name)


def names(suffix: str) -> list[str]:
    return sorted(p.name for p in resources.files(__package__).joinpath("corpus").iterdir()
                  if p.name.endswith(suffix))
