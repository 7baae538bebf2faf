"""Model checking and parameter synthesis for probability- and
clock-parametric probabilistic timed automata."""

from .constraints import Atom, ClockConstraint, CombinedValuation, Rel
from .dsl import DslError, parse, parse_file, serialize
from .model import (ParametricDistribution, Pppta, classify_lu, instantiate,
                    is_closed, max_constants, validate)
from .ratfun import Polynomial, RatFunError, RationalFunction, parse_ratfun
from .zones import Dbm

__version__ = "0.1.0"

__all__ = [
    "Atom", "ClockConstraint", "CombinedValuation", "Rel",
    "DslError", "parse", "parse_file", "serialize",
    "ParametricDistribution", "Pppta", "classify_lu", "instantiate",
    "is_closed", "max_constants", "validate",
    "Polynomial", "RatFunError", "RationalFunction", "parse_ratfun",
    "Dbm", "__version__",
]
