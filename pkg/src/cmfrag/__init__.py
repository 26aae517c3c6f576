"""Configuration-model cycles, fragments and their limit laws."""

from .branching import OffspringModel, p_tree, sample_forest, sample_limit_fragment
from .cm import enumerate_matchings, sample_cm, sample_simple
from .degseq import DegreeModel, DegreeSequence, is_feasible, moments, realize
from .fragcat import FragmentCatalogue, class_sum, enumerate_fragments, gamma, p_simple, pstar
from .kakeya import analyze, kakeya_check, safe_tail_index, threshold_report
from .limits import (
    Q,
    expected_copies,
    expected_total_cycles,
    joint_cycle_prob,
    p_acyc,
    prob_simple_limit,
    solve_nu0,
    xi_bound,
)
from .multigraph import (
    Fragment,
    Multigraph,
    canonicalize,
    classify_components,
    count_cycles,
    extract_fragment,
    from_matching,
)

__version__ = "0.1.0"

__all__ = [
    "analyze",
    "canonicalize",
    "class_sum",
    "classify_components",
    "count_cycles",
    "DegreeModel",
    "DegreeSequence",
    "enumerate_fragments",
    "enumerate_matchings",
    "expected_copies",
    "expected_total_cycles",
    "extract_fragment",
    "Fragment",
    "FragmentCatalogue",
    "from_matching",
    "gamma",
    "is_feasible",
    "joint_cycle_prob",
    "kakeya_check",
    "moments",
    "Multigraph",
    "OffspringModel",
    "p_acyc",
    "p_simple",
    "p_tree",
    "prob_simple_limit",
    "pstar",
    "Q",
    "realize",
    "safe_tail_index",
    "sample_cm",
    "sample_forest",
    "sample_limit_fragment",
    "sample_simple",
    "solve_nu0",
    "threshold_report",
    "xi_bound",
]
