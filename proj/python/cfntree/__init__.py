"""Broadcast-model magnetization, likelihood, and branch fitting on binary trees.

The heavy lifting lives in the compiled ``_core`` extension. This wrapper
re-exports it and converts the experiment entry points between plain dicts
and the JSON strings the extension speaks.
"""

import json as _json

from ._core import (
    Tree,
    broadcast_sample,
    classify,
    convert_edge_value,
    default_constants,
    experiment_tree,
    gradient,
    log_likelihood,
    parse_newick,
    q_combine,
    random_tree,
    root_magnetization,
    sample_box_parameters,
    trichotomy_constants,
    write_newick,
)
from . import _core

__all__ = [
    "Tree",
    "broadcast_sample",
    "classify",
    "convert_edge_value",
    "default_constants",
    "experiment_tree",
    "fit",
    "gradient",
    "gradient_population_experiment",
    "independence_experiment",
    "init_sweep_experiment",
    "log_likelihood",
    "parse_newick",
    "q_combine",
    "random_tree",
    "root_magnetization",
    "sample_box_parameters",
    "scaling_experiment",
    "tail_experiment",
    "trichotomy_constants",
    "write_newick",
]

__version__ = "0.1.0"


def fit(tree, samples, init, **config):
    """Fits per-edge association values by cyclic coordinate ascent.

    ``samples`` is a list of leaf-spin lists (+1/-1, leaf-id order), ``init``
    the starting parameter vector. Keyword options mirror the solver config:
    theta_min, theta_max, root_tolerance, max_sweeps, convergence_threshold,
    incremental. Returns a dict with theta, reason, sweeps, and the per-sweep
    trajectories.
    """
    return _json.loads(_core.fit(tree, samples, init, **config))


def tail_experiment(config):
    """Runs the tier-frequency experiment for a config dict; returns a dict."""
    return _json.loads(_core.tail_experiment_json(_json.dumps(config)))


def scaling_experiment(config):
    """Fits tier-frequency decay slopes across the config's delta grid."""
    return _json.loads(_core.scaling_experiment_json(_json.dumps(config)))


def independence_experiment(config):
    """Estimates cross-subtree correlations of tier indicators."""
    return _json.loads(_core.independence_experiment_json(_json.dumps(config)))


def init_sweep_experiment(tree, config):
    """Measures fit error across initializations; config is a dict."""
    return _json.loads(_core.init_sweep_experiment_json(tree, _json.dumps(config)))


def gradient_population_experiment(tree, theta_true, theta_hat, edge, **kwargs):
    """Compares the expected per-edge gradient against its closed form.

    Keyword options: samples (0 means exact enumeration), delta, seed.
    """
    return _json.loads(
        _core.gradient_population_experiment(tree, theta_true, theta_hat, edge, **kwargs)
    )
