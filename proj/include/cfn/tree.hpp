#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cfn/rng.hpp"

namespace cfn {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr EdgeId kNoEdge = -1;

struct Halfedge {
  NodeId neighbor = kNoNode;
  EdgeId edge = kNoEdge;
};

/**
 * Immutable tree with dense node/edge ids and per-leaf labels.
 *
 * The common case is an unrooted binary tree (internal degree 3), but the
 * container also holds rooted experiment trees whose root has degree 2;
 * callers that need the unrooted-binary shape check it explicitly.
 */
class TreeTopology {
 public:
  class Builder {
   public:
    NodeId add_node(std::string label = "");
    EdgeId connect(NodeId a, NodeId b);
    /** Validates connectivity and acyclicity. */
    TreeTopology finish();

   private:
    friend class TreeTopology;
    std::vector<std::vector<Halfedge>> adj_;
    std::vector<std::array<NodeId, 2>> ends_;
    std::vector<std::string> labels_;
  };

  int node_count() const { return static_cast<int>(adj_.size()); }
  int edge_count() const { return static_cast<int>(ends_.size()); }

  const std::vector<Halfedge>& neighbors(NodeId v) const { return adj_[check_node(v)]; }
  std::array<NodeId, 2> endpoints(EdgeId e) const { return ends_[check_edge(e)]; }
  NodeId other_end(EdgeId e, NodeId v) const;

  int degree(NodeId v) const { return static_cast<int>(adj_[check_node(v)].size()); }
  bool is_leaf(NodeId v) const { return degree(v) <= 1; }
  const std::vector<NodeId>& leaf_ids() const { return leaves_; }
  /** Position of v within leaf_ids(), or -1 for internal nodes. */
  int32_t leaf_index(NodeId v) const { return leaf_pos_[check_node(v)]; }

  const std::string& label(NodeId v) const { return labels_[check_node(v)]; }
  /** Node with the given label, or kNoNode. */
  NodeId find_label(const std::string& name) const;
  /** Edge joining two adjacent nodes, or kNoEdge. */
  EdgeId edge_between(NodeId a, NodeId b) const;

  bool unrooted_binary() const;
  void require_unrooted_binary() const;

 private:
  TreeTopology() = default;
  NodeId check_node(NodeId v) const;
  EdgeId check_edge(EdgeId e) const;

  std::vector<std::vector<Halfedge>> adj_;
  std::vector<std::array<NodeId, 2>> ends_;
  std::vector<std::string> labels_;
  std::vector<NodeId> leaves_;
  std::vector<int32_t> leaf_pos_;
};

/**
 * Rooted orientation of (part of) a tree: the node set whose path to
 * `away_from` passes through `root`, or the whole tree when `away_from`
 * is kNoNode. `order` lists view nodes with parents before children.
 * `leaves` are the observed nodes: tree leaves that lie inside the view.
 */
struct RootedView {
  NodeId root = kNoNode;
  NodeId away_from = kNoNode;
  std::vector<NodeId> order;
  std::vector<Halfedge> parent;              // by node id; edge toward the root
  std::vector<std::vector<Halfedge>> child;  // by node id, adjacency order
  std::vector<char> in_view;                 // by node id
  std::vector<NodeId> leaves;
  std::vector<EdgeId> edges;                 // child edge of order[1], order[2], ...

  bool contains(NodeId v) const {
    return v >= 0 && v < static_cast<NodeId>(in_view.size()) && in_view[v];
  }
  int leaf_count() const { return static_cast<int>(leaves.size()); }
};

/** Subtree at `root` pointing away from the adjacent node `away_from`. */
RootedView descendant_subtree(const TreeTopology& tree, NodeId root, NodeId away_from);

/** Whole tree oriented from an arbitrary anchor (children = all neighbors). */
RootedView whole_tree_view(const TreeTopology& tree, NodeId anchor);

/**
 * Edge ids in depth-first discovery order from `anchor`; consecutive edges
 * share a node wherever the traversal allows. Default sweep order for the
 * coordinate optimizer.
 */
std::vector<EdgeId> dfs_edge_order(const TreeTopology& tree, NodeId anchor);

/**
 * Random unrooted binary tree grown by repeatedly attaching a leaf to a
 * uniformly chosen existing edge. Leaves are labeled L1..Ln.
 */
TreeTopology random_binary_tree(int n_leaves, Rng& rng);

enum class ExperimentTreeKind {
  kComplete,     // size = depth, 2^depth leaves
  kCaterpillar,  // size = leaf count, path-like
  kBalanced,     // size = leaf count, halved splits (complete when a power of 2)
};

struct ExperimentTree {
  TreeTopology tree;
  RootedView view;  // whole-tree rooting at the degree-2 root
};

/** Rooted tree used directly by the Monte Carlo harnesses. */
ExperimentTree experiment_tree(ExperimentTreeKind kind, int size);

ExperimentTreeKind experiment_tree_kind_from_name(const std::string& name);
std::string to_string(ExperimentTreeKind kind);

}  // namespace cfn
