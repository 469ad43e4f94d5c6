"""Behavioral pseudometrics and real-valued modal logics for probabilistic
labelled transition systems."""

from .errors import BudgetExceededError, FormulaError, ModelError, PmetricError
from .model import (
    EPSILON,
    Plts,
    SubDistribution,
    Transition,
    dirac,
    load_model,
    mix,
    parse_model,
    serialize,
    successors,
)
from .transport import StateMetric, TransportPlan, kantorovich, kantorovich_dual
from .lifting import DistributionSet, hausdorff, hausdorff_convex
from .state_metric import (
    FixpointResult,
    bisimilarity_oracle,
    fixpoint,
    functor_step,
    kernel,
    kleene_iterates,
)
from .formulas import modal_depth, simplify, to_text
from .parser import parse_formula
from .mhml import (
    eval_dist,
    eval_state,
    logical_metric_lower_bound,
    synthesize_distinguishing,
)
from .dist_metric import (
    LiftedGraph,
    dist_fixpoint,
    dstar_lower_bound,
    eval_dstar,
    lifted_successors,
)
from .convex_metric import convex_fixpoint, saturate
from .trace_metric import trace_distance, trace_formula, trace_prob

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "DistributionSet",
    "EPSILON",
    "FixpointResult",
    "FormulaError",
    "LiftedGraph",
    "ModelError",
    "Plts",
    "PmetricError",
    "StateMetric",
    "SubDistribution",
    "Transition",
    "TransportPlan",
    "bisimilarity_oracle",
    "convex_fixpoint",
    "dirac",
    "dist_fixpoint",
    "dstar_lower_bound",
    "eval_dist",
    "eval_dstar",
    "eval_state",
    "fixpoint",
    "functor_step",
    "hausdorff",
    "hausdorff_convex",
    "kantorovich",
    "kantorovich_dual",
    "kernel",
    "kleene_iterates",
    "lifted_successors",
    "load_model",
    "logical_metric_lower_bound",
    "mix",
    "modal_depth",
    "parse_formula",
    "parse_model",
    "saturate",
    "serialize",
    "simplify",
    "successors",
    "synthesize_distinguishing",
    "to_text",
    "trace_distance",
    "trace_formula",
    "trace_prob",
]
