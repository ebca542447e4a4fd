"""Feedback-capacity bounds for unifilar finite-state channels via Q-graph
context quantization: a Theorem-style single-letter upper bound, an
invariance-certified lower bound, and a belief-space value-iteration
simulator from which candidate Q-graphs can be extracted."""

__version__ = "0.1.0"

from .channel import (UnifilarChannel, builtin_bec_no11, builtin_dec,
                      builtin_trapdoor, is_strongly_connected, validate)
from .qgraph import (QGraph, builtin_bec2, builtin_bec3, builtin_dec3,
                     is_irreducible, isomorphic, run)
from .coupled import (CoupledGraph, InputPolicy, build_coupled, closed_classes,
                      in_P_pi, lemma1_check, period, prune, stationary,
                      uniform_policy)
from .bound import (BoundResult, objective, optimize_upper, oracle_bec,
                    oracle_dec, oracle_trapdoor_lower, oracle_trapdoor_upper,
                    sweep, LOG2_PHI)
from .bcjr import (bcjr_update, is_aperiodic_input, is_bcjr_invariant,
                   lower_bound, trapdoor_lower_policy)

__all__ = [
    "UnifilarChannel", "QGraph", "CoupledGraph", "InputPolicy", "BoundResult",
    "builtin_trapdoor", "builtin_dec", "builtin_bec_no11",
    "builtin_bec2", "builtin_bec3", "builtin_dec3",
    "validate", "is_strongly_connected", "is_irreducible", "isomorphic", "run",
    "build_coupled", "closed_classes", "lemma1_check", "prune", "in_P_pi",
    "period", "stationary", "uniform_policy",
    "objective", "optimize_upper", "oracle_bec", "oracle_dec",
    "oracle_trapdoor_upper", "oracle_trapdoor_lower", "sweep", "LOG2_PHI",
    "bcjr_update", "is_aperiodic_input", "is_bcjr_invariant", "lower_bound",
    "trapdoor_lower_policy",
]
