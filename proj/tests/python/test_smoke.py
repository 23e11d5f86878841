"""End-to-end smoke tests for the Python bindings."""

import math

import pytest

import cfntree as cf


def test_parse_and_write_newick_round_trip():
    tree, theta = cf.parse_newick("((A:0.1,B:0.2):0.05,(C:0.1,D:0.3):0.05);")
    assert tree.leaf_count == 4
    assert sorted(tree.leaf_labels) == ["A", "B", "C", "D"]
    assert tree.node_count == 6
    assert tree.edge_count == 5
    text = cf.write_newick(tree, theta)
    tree2, theta2 = cf.parse_newick(text)
    assert tree2.leaf_count == 4
    # Edge ids follow encounter order and the writer may reorder siblings, so
    # compare the label-keyed pendant values and the multiset of all values.
    def pendants(t, values):
        return {
            t.label(v): values[t.neighbors(v)[0][1]] for v in t.leaf_ids
        }

    assert pendants(tree2, theta2) == pytest.approx(pendants(tree, theta), rel=1e-12)
    assert sorted(theta2) == pytest.approx(sorted(theta), rel=1e-12)


def test_two_leaf_log_likelihood_and_gradient():
    tree, _ = cf.parse_newick("(A:1.0,B:1.0);")
    # One edge; agreement probability at theta=0.9 is (1+0.9)/4 per ordered pair.
    ll = cf.log_likelihood(tree, [0.9], [1, 1])
    assert ll == pytest.approx(math.log(0.475), abs=1e-13)
    grad = cf.gradient(tree, [0.9], [1, 1])
    assert grad == pytest.approx([1.0 / 1.9], abs=1e-13)


def test_magnetization_matches_combine_rule():
    tree, _ = cf.parse_newick("(A:1.0,B:1.0,C:1.0);")
    root = next(v for v in range(tree.node_count) if not tree.is_leaf(v))
    theta = [0.8, 0.7, 0.6]
    spins = [1, 1, -1]
    z = cf.root_magnetization(tree, theta, spins, root)
    by_hand = 0.0
    for (leaf, edge), s in zip(tree.neighbors(root), spins):
        assert tree.is_leaf(leaf)
        by_hand = cf.q_combine(by_hand, theta[edge] * s)
    assert z == pytest.approx(by_hand, abs=1e-15)
    # Observed root: the view rooted at a leaf reports that leaf's spin.
    leaf0 = tree.leaf_ids[0]
    assert cf.root_magnetization(tree, theta, spins, leaf0) == spins[0]


def test_broadcast_is_deterministic_per_seed():
    tree = cf.random_tree(6, seed=11)
    theta = [0.9] * tree.edge_count
    a = cf.broadcast_sample(tree, theta, seed=7)
    b = cf.broadcast_sample(tree, theta, seed=7)
    c = cf.broadcast_sample(tree, theta, seed=8)
    assert a == b
    assert len(a) == tree.node_count
    assert all(s in (-1, 1) for s in a)
    assert a != c or True  # different seeds may collide; only determinism is asserted


def test_fit_recovers_agreement_rate():
    tree, _ = cf.parse_newick("(A:1.0,B:1.0);")
    samples = [[1, 1]] * 9 + [[1, -1]]
    result = cf.fit(tree, samples, [0.5])
    assert result["reason"] == "converged"
    assert result["theta"][0] == pytest.approx(0.8, abs=1e-8)
    result2 = cf.fit(tree, samples, [0.5], incremental=True)
    assert result2["theta"] == result["theta"]


def test_constants_and_classification():
    k = cf.default_constants()
    assert k["good_gap"] == 80.0
    assert k["severe_threshold"] == pytest.approx(2.0 / 3.0)
    assert k == cf.trichotomy_constants(0.5, 0.25, 0.5)
    delta = 0.01
    assert cf.classify(1, 1.0, delta) == "good"
    assert cf.classify(1, -0.7, delta) == "severe"
    assert cf.classify(1, 0.0, delta) == "moderate"


def test_tail_experiment_report_shape():
    config = {
        "tree": {"kind": "complete", "size": 3},
        "delta_grid": [0.05],
        "samples_per_point": 400,
        "seed": 5,
    }
    report = cf.tail_experiment(config)
    (point,) = report["points"]
    counts = point["counts"]
    assert counts["good"] + counts["moderate"] + counts["severe"] == 400
    assert point["n"] == 400
    assert 0.0 <= point["freq"]["good"] <= 1.0
    # Same config, same report, regardless of workers.
    again = cf.tail_experiment(dict(config, threads=2))
    assert again["points"] == report["points"]


def test_gradient_population_exact_two_leaf():
    tree, _ = cf.parse_newick("(A:1.0,B:1.0);")
    report = cf.gradient_population_experiment(tree, [0.9], [0.8], 0, samples=0)
    assert report["mode"] == "exact"
    # Single-edge closed form (theta_true - theta_hat) / (1 - theta_hat^2).
    assert report["closed_form"] == pytest.approx(0.1 / 0.36, abs=1e-12)
    assert report["abs_difference"] <= 1e-12
