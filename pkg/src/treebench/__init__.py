"""Optimal and greedy decision trees with pluggable leaf objectives and tuning."""

from .data import BinaryDataset, RawDataset, binarize_apply, binarize_fit, load_csv
from .greedy import GrowConfig, ccp_midpoints, ccp_path, fit_tuned, grow
from .objectives import ObjectiveKind, ObjectiveParams, leaf_value
from .optimal import Penalties, SolveLimits, Solver, objective_of_tree, solve
from .tree import Branch, Leaf, deserialize, serialize
from .tuning import TuneMethod, fold_count, make_grid, tune

__version__ = "0.1.0"

__all__ = [
    "BinaryDataset",
    "Branch",
    "GrowConfig",
    "Leaf",
    "ObjectiveKind",
    "ObjectiveParams",
    "Penalties",
    "RawDataset",
    "SolveLimits",
    "Solver",
    "TuneMethod",
    "binarize_apply",
    "binarize_fit",
    "ccp_midpoints",
    "ccp_path",
    "deserialize",
    "fit_tuned",
    "fold_count",
    "grow",
    "leaf_value",
    "load_csv",
    "make_grid",
    "objective_of_tree",
    "serialize",
    "solve",
    "tune",
]
