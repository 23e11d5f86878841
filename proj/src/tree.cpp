#include "cfn/tree.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace cfn {

NodeId TreeTopology::Builder::add_node(std::string label) {
  adj_.emplace_back();
  labels_.push_back(std::move(label));
  return static_cast<NodeId>(adj_.size() - 1);
}

EdgeId TreeTopology::Builder::connect(NodeId a, NodeId b) {
  const auto n = static_cast<NodeId>(adj_.size());
  if (a < 0 || b < 0 || a >= n || b >= n)
    throw std::invalid_argument("connect: node id out of range");
  if (a == b) throw std::invalid_argument("connect: self-loop");
  const auto e = static_cast<EdgeId>(ends_.size());
  ends_.push_back({a, b});
  adj_[a].push_back({b, e});
  adj_[b].push_back({a, e});
  return e;
}

TreeTopology TreeTopology::Builder::finish() {
  const auto n = static_cast<int>(adj_.size());
  if (n == 0) throw std::invalid_argument("tree must have at least one node");
  if (static_cast<int>(ends_.size()) != n - 1)
    throw std::invalid_argument("tree must have exactly node_count-1 edges");
  // Connectivity; acyclicity follows from the edge count.
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (const Halfedge& h : adj_[v]) {
      if (!seen[h.neighbor]) {
        seen[h.neighbor] = 1;
        ++reached;
        stack.push_back(h.neighbor);
      }
    }
  }
  if (reached != n) throw std::invalid_argument("tree is not connected");

  TreeTopology t;
  t.adj_ = std::move(adj_);
  t.ends_ = std::move(ends_);
  t.labels_ = std::move(labels_);
  t.leaf_pos_.assign(n, -1);
  for (NodeId v = 0; v < n; ++v)
    if (t.adj_[v].size() <= 1) {
      t.leaf_pos_[v] = static_cast<int32_t>(t.leaves_.size());
      t.leaves_.push_back(v);
    }
  return t;
}

NodeId TreeTopology::check_node(NodeId v) const {
  if (v < 0 || v >= node_count()) throw std::out_of_range("bad node id");
  return v;
}

EdgeId TreeTopology::check_edge(EdgeId e) const {
  if (e < 0 || e >= edge_count()) throw std::out_of_range("bad edge id");
  return e;
}

NodeId TreeTopology::other_end(EdgeId e, NodeId v) const {
  const auto [a, b] = endpoints(e);
  if (v == a) return b;
  if (v == b) return a;
  throw std::invalid_argument("node is not an endpoint of the edge");
}

NodeId TreeTopology::find_label(const std::string& name) const {
  for (NodeId v = 0; v < node_count(); ++v)
    if (labels_[v] == name) return v;
  return kNoNode;
}

EdgeId TreeTopology::edge_between(NodeId a, NodeId b) const {
  for (const Halfedge& h : neighbors(a))
    if (h.neighbor == b) return h.edge;
  return kNoEdge;
}

bool TreeTopology::unrooted_binary() const {
  for (NodeId v = 0; v < node_count(); ++v) {
    const int d = degree(v);
    if (d != 1 && d != 3 && !(node_count() == 1 && d == 0)) return false;
  }
  return true;
}

void TreeTopology::require_unrooted_binary() const {
  if (!unrooted_binary())
    throw std::invalid_argument(
        "tree is not unrooted binary (internal nodes must have degree 3)");
}

namespace {

RootedView orient(const TreeTopology& tree, NodeId root, NodeId away_from) {
  RootedView view;
  view.root = root;
  view.away_from = away_from;
  const int n = tree.node_count();
  view.parent.assign(n, Halfedge{});
  view.child.assign(n, {});
  view.in_view.assign(n, 0);

  std::vector<NodeId> stack{root};
  view.in_view[root] = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    view.order.push_back(v);
    if (tree.is_leaf(v)) view.leaves.push_back(v);
    for (const Halfedge& h : tree.neighbors(v)) {
      if (h.neighbor == view.parent[v].neighbor) continue;
      if (v == root && h.neighbor == away_from) continue;
      view.child[v].push_back(h);
      view.parent[h.neighbor] = {v, h.edge};
      view.in_view[h.neighbor] = 1;
      stack.push_back(h.neighbor);
    }
  }
  // Recover parent-before-child ordering: the stack-based traversal above
  // already pushes parents first but pops children in reverse; re-sorting is
  // unnecessary because each node is appended when popped, after its parent.
  view.edges.reserve(view.order.size() - 1);
  for (std::size_t i = 1; i < view.order.size(); ++i)
    view.edges.push_back(view.parent[view.order[i]].edge);
  return view;
}

}  // namespace

RootedView descendant_subtree(const TreeTopology& tree, NodeId root, NodeId away_from) {
  if (tree.edge_between(root, away_from) == kNoEdge)
    throw std::invalid_argument("descendant_subtree: nodes are not adjacent");
  return orient(tree, root, away_from);
}

RootedView whole_tree_view(const TreeTopology& tree, NodeId anchor) {
  if (anchor < 0 || anchor >= tree.node_count())
    throw std::invalid_argument("whole_tree_view: bad anchor");
  return orient(tree, anchor, kNoNode);
}

std::vector<EdgeId> dfs_edge_order(const TreeTopology& tree, NodeId anchor) {
  // True depth-first discovery order (recursion, not the LIFO order above),
  // so consecutive edges share a node along each descent.
  std::vector<EdgeId> out;
  out.reserve(tree.edge_count());
  std::vector<char> seen(tree.node_count(), 0);
  std::vector<std::pair<NodeId, std::size_t>> frames{{anchor, 0}};
  seen[anchor] = 1;
  while (!frames.empty()) {
    auto& [v, next] = frames.back();
    const auto& adj = tree.neighbors(v);
    bool descended = false;
    while (next < adj.size()) {
      const Halfedge h = adj[next++];
      if (seen[h.neighbor]) continue;
      seen[h.neighbor] = 1;
      out.push_back(h.edge);
      frames.emplace_back(h.neighbor, 0);
      descended = true;
      break;
    }
    if (!descended) frames.pop_back();
  }
  return out;
}

TreeTopology random_binary_tree(int n_leaves, Rng& rng) {
  if (n_leaves < 2) throw std::invalid_argument("random_binary_tree: need >= 2 leaves");
  TreeTopology::Builder b;
  const NodeId first = b.add_node("L1");
  const NodeId second = b.add_node("L2");
  // Edge list mirrors builder state so we can subdivide uniformly.
  struct Pending { NodeId a, b; };
  std::vector<Pending> edges{{first, second}};
  int next_label = 3;
  for (int k = 2; k < n_leaves; ++k) {
    const auto i = static_cast<std::size_t>(rng.below(edges.size()));
    const Pending picked = edges[i];
    const NodeId mid = b.add_node();
    const NodeId leaf = b.add_node("L" + std::to_string(next_label++));
    edges[i] = {picked.a, mid};
    edges.push_back({mid, picked.b});
    edges.push_back({mid, leaf});
  }
  for (const Pending& e : edges) b.connect(e.a, e.b);
  return b.finish();
}

namespace {

// Builds a rooted shape recursively; returns the subtree root id.
NodeId build_balanced(TreeTopology::Builder& b, int leaves, int& next_label) {
  if (leaves == 1) return b.add_node("L" + std::to_string(next_label++));
  const NodeId v = b.add_node();
  const NodeId left = build_balanced(b, (leaves + 1) / 2, next_label);
  b.connect(v, left);
  const NodeId right = build_balanced(b, leaves / 2, next_label);
  b.connect(v, right);
  return v;
}

NodeId build_caterpillar(TreeTopology::Builder& b, int leaves, int& next_label) {
  const NodeId v = b.add_node();
  if (leaves == 2) {
    b.connect(v, b.add_node("L" + std::to_string(next_label++)));
    b.connect(v, b.add_node("L" + std::to_string(next_label++)));
    return v;
  }
  b.connect(v, b.add_node("L" + std::to_string(next_label++)));
  const NodeId tail = build_caterpillar(b, leaves - 1, next_label);
  b.connect(v, tail);
  return v;
}

}  // namespace

ExperimentTree experiment_tree(ExperimentTreeKind kind, int size) {
  if (size < 1) throw std::invalid_argument("experiment_tree: size must be >= 1");
  TreeTopology::Builder b;
  int next_label = 1;
  switch (kind) {
    case ExperimentTreeKind::kComplete: {
      if (size > 24) throw std::invalid_argument("experiment_tree: depth too large");
      build_balanced(b, 1 << size, next_label);
      break;
    }
    case ExperimentTreeKind::kCaterpillar: {
      if (size < 2) throw std::invalid_argument("caterpillar needs >= 2 leaves");
      build_caterpillar(b, size, next_label);
      break;
    }
    case ExperimentTreeKind::kBalanced: {
      if (size < 2) throw std::invalid_argument("balanced tree needs >= 2 leaves");
      build_balanced(b, size, next_label);
      break;
    }
  }
  ExperimentTree out{b.finish(), {}};
  out.view = whole_tree_view(out.tree, 0);
  return out;
}

ExperimentTreeKind experiment_tree_kind_from_name(const std::string& name) {
  if (name == "complete") return ExperimentTreeKind::kComplete;
  if (name == "caterpillar") return ExperimentTreeKind::kCaterpillar;
  if (name == "balanced") return ExperimentTreeKind::kBalanced;
  throw std::invalid_argument("unknown experiment tree kind: " + name);
}

std::string to_string(ExperimentTreeKind kind) {
  switch (kind) {
    case ExperimentTreeKind::kComplete: return "complete";
    case ExperimentTreeKind::kCaterpillar: return "caterpillar";
    case ExperimentTreeKind::kBalanced: return "balanced";
  }
  return "?";
}

}  // namespace cfn
