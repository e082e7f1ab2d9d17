"""Assembly Calculus parser and fallback-automata toolkit."""

from .brain import AreaParams, Assembly, Brain, BrainError, build_brain, overlap
from .fba import FBA, NFA, FBAError, Rule, anbn_fba, load_fba
from .lexicon import Lexicon, OutOfVocabulary, ReadoutError, load_lexicon
from .parser import ParserConfig, ParseRecord, StructureError, parse
from .trees import ConstituencyTree, DependencyTree

__version__ = "0.1.0"

__all__ = [
    "AreaParams", "Assembly", "Brain", "BrainError", "build_brain", "overlap",
    "FBA", "NFA", "FBAError", "Rule", "anbn_fba", "load_fba",
    "Lexicon", "OutOfVocabulary", "ReadoutError", "load_lexicon",
    "ParserConfig", "ParseRecord", "StructureError", "parse",
    "ConstituencyTree", "DependencyTree",
]
