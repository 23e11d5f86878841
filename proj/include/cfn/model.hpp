#pragma once

#include <cstdint>
#include <vector>

#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/** Scales on which a symmetric binary channel can be described. */
enum class EdgeScale { kTheta, kFlipProbability, kLength };

/**
 * Converts between theta (channel second eigenvalue), flip probability
 * p = (1-theta)/2, and length -ln(theta). Throws std::domain_error when the
 * source value lies outside its scale or the target is undefined (length
 * requires theta > 0; p must lie in [0, 1/2) to map back).
 */
double convert_edge_value(double value, EdgeScale from, EdgeScale to);

/**
 * One theta value per edge of an associated TreeTopology. Sampling requires
 * theta in (0,1]; magnetization evaluation accepts any theta in [-1,1].
 */
struct EdgeParameters {
  std::vector<double> theta;

  static EdgeParameters constant(const TreeTopology& tree, double value) {
    return {std::vector<double>(static_cast<size_t>(tree.edge_count()), value)};
  }

  double flip_probability(EdgeId e) const { return 0.5 * (1.0 - theta[e]); }
  double length(EdgeId e) const {
    return convert_edge_value(theta[e], EdgeScale::kTheta, EdgeScale::kLength);
  }
};

/**
 * Per-edge interval [1 - 2*c_hi*delta, 1 - 2*c_lo*delta]. Valid boxes need
 * 0 < c_lo < c_hi and c_hi*delta < 1/2, so the interval sits inside (0,1).
 */
struct ParameterBox {
  double delta;
  double c_lo;
  double c_hi;

  double theta_min() const { return 1.0 - 2.0 * c_hi * delta; }
  double theta_max() const { return 1.0 - 2.0 * c_lo * delta; }
  /** Throws std::invalid_argument when the box constraints fail. */
  void validate() const;
  /** True when c_hi >= 2*c_lo, required of the evaluation-side box. */
  bool wide_enough_for_evaluation() const { return c_hi >= 2.0 * c_lo; }

  static ParameterBox with_defaults(double delta) { return {delta, 0.25, 0.5}; }
};

/** Whether a spin assignment covers every node or only the leaves. */
enum class SpinScope { kFullTree, kLeavesOnly };

/**
 * Spins are exactly +1 or -1. Full-tree configs index by node id; leaves-only
 * configs index by position within TreeTopology::leaf_ids().
 */
struct SpinConfig {
  SpinScope scope = SpinScope::kFullTree;
  std::vector<int8_t> spins;

  /** Restricts a full-tree config to the leaf rows of `tree`. */
  SpinConfig restricted_to_leaves(const TreeTopology& tree) const;
};

/** Spin of a given leaf node under either scope. */
int8_t leaf_spin(const TreeTopology& tree, const SpinConfig& config, NodeId leaf);

/** Draws each theta_e independently and uniformly from the box interval. */
EdgeParameters sample_parameters(const TreeTopology& tree, const ParameterBox& box,
                                 Rng& rng);

/** True iff every theta_e lies in the closed box interval. */
bool in_box(const EdgeParameters& params, const ParameterBox& box);

/**
 * Samples a full spin configuration: the anchor spin is uniform on +-1 and
 * each edge flips the spin across it with probability (1-theta_e)/2,
 * independently, walking outward from the anchor. Traversal order is fixed
 * (depth-first, adjacency order), so a given rng state determines the result.
 * Requires theta_e in (0,1] on every edge.
 */
SpinConfig broadcast_sample(const TreeTopology& tree, const EdgeParameters& params,
                            NodeId anchor, Rng& rng);

/**
 * Exact law of the leaf spins of a rooted view. Outcome k assigns leaf
 * leaves[i] spin +1 when bit i of k is set; probabilities sum to 1.
 */
struct LeafDistribution {
  std::vector<NodeId> leaves;
  std::vector<double> probability;  // size 2^leaves.size(), indexed as above

  size_t index_of(const std::vector<int8_t>& spins) const;
};

/**
 * Brute-force oracle: sums the joint law (1/2) * prod_e (1 + s_u s_v theta_e)/2
 * over every full spin assignment of the view, accumulating leaf-pattern mass.
 * Cost is exponential in the view's node count; rejects views with more than
 * 16 leaves.
 */
LeafDistribution enumerate_leaf_distribution(const TreeTopology& tree,
                                             const RootedView& view,
                                             const EdgeParameters& params);

}  // namespace cfn
