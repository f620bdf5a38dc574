"""Realizability checking and strategy synthesis for bounded safety specifications."""

from .config import EngineConfig
from .formula import (
    Formula,
    Valuation,
    VarDecl,
    Vocabulary,
    closure,
    depth,
    holds_fin,
    subformulas,
    to_nnf,
    variants,
)
from .game import OracleResult, StrategyTable, is_pre_witness, is_witness, solve
from .parser import ParseError, SpecFile, parse, parse_formula, render
from .synthesis import MealyMachine, extract, verify
from .tableau import Tableau, Verdict, decide, inconsistent, label_leq, saturate, subsumes
from .tnf import SeparatedMove, TnfFormula, dnf_expand, elementary, step_down, tnf

__all__ = [
    "EngineConfig",
    "Formula",
    "MealyMachine",
    "OracleResult",
    "ParseError",
    "SeparatedMove",
    "SpecFile",
    "StrategyTable",
    "Tableau",
    "TnfFormula",
    "Valuation",
    "VarDecl",
    "Verdict",
    "Vocabulary",
    "closure",
    "decide",
    "depth",
    "dnf_expand",
    "elementary",
    "extract",
    "holds_fin",
    "inconsistent",
    "is_pre_witness",
    "is_witness",
    "label_leq",
    "parse",
    "parse_formula",
    "render",
    "saturate",
    "solve",
    "step_down",
    "subformulas",
    "subsumes",
    "tnf",
    "to_nnf",
    "variants",
    "verify",
]

__version__ = "0.1.0"
