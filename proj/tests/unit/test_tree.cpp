#include <algorithm>
#include <set>

#include <doctest.h>

#include "cfn/tree.hpp"
#include "helpers.hpp"

using namespace cfn;

TEST_CASE("builder produces the requested shape") {
  const TreeTopology t = testutil::two_leaf_tree();
  CHECK(t.node_count() == 2);
  CHECK(t.edge_count() == 1);
  CHECK(t.is_leaf(0));
  CHECK(t.is_leaf(1));
  CHECK(t.find_label("A") != kNoNode);
  CHECK(t.find_label("missing") == kNoNode);
  CHECK(t.edge_between(0, 1) == 0);
  CHECK(t.other_end(0, 0) == 1);
}

TEST_CASE("builder rejects disconnected and cyclic graphs") {
  {
    TreeTopology::Builder b;
    b.add_node("A");
    b.add_node("B");
    CHECK_THROWS_AS(b.finish(), std::invalid_argument);
  }
  {
    TreeTopology::Builder b;
    const NodeId x = b.add_node(), y = b.add_node(), z = b.add_node();
    b.connect(x, y);
    b.connect(y, z);
    b.connect(z, x);
    CHECK_THROWS_AS(b.finish(), std::invalid_argument);
  }
}

TEST_CASE("random binary trees have the forced counts") {
  Rng rng(7);
  SUBCASE("n=2 is the single edge") {
    const TreeTopology t = random_binary_tree(2, rng);
    CHECK(t.node_count() == 2);
    CHECK(t.edge_count() == 1);
  }
  SUBCASE("n=3 is the star") {
    const TreeTopology t = random_binary_tree(3, rng);
    CHECK(t.node_count() == 4);
    CHECK(t.edge_count() == 3);
    int centers = 0;
    for (NodeId v = 0; v < t.node_count(); ++v)
      if (t.degree(v) == 3) ++centers;
    CHECK(centers == 1);
  }
  SUBCASE("general counts: nodes 2n-2, edges 2n-3, internal degree 3") {
    for (int n = 2; n <= 10; ++n) {
      const TreeTopology t = random_binary_tree(n, rng);
      CHECK(t.node_count() == 2 * n - 2);
      CHECK(t.edge_count() == 2 * n - 3);
      CHECK(static_cast<int>(t.leaf_ids().size()) == n);
      for (NodeId v = 0; v < t.node_count(); ++v)
        CHECK((t.degree(v) == 1 || t.degree(v) == 3));
      CHECK(t.unrooted_binary());
    }
  }
  SUBCASE("leaves are labeled L1..Ln") {
    const TreeTopology t = random_binary_tree(5, rng);
    for (const char* name : {"L1", "L2", "L3", "L4", "L5"})
      CHECK(t.find_label(name) != kNoNode);
  }
  CHECK_THROWS_AS(random_binary_tree(1, rng), std::invalid_argument);
}

TEST_CASE("leaf_index inverts leaf_ids") {
  Rng rng(3);
  const TreeTopology t = random_binary_tree(6, rng);
  const auto& leaves = t.leaf_ids();
  for (size_t i = 0; i < leaves.size(); ++i)
    CHECK(t.leaf_index(leaves[i]) == static_cast<int32_t>(i));
  for (NodeId v = 0; v < t.node_count(); ++v)
    if (!t.is_leaf(v)) CHECK(t.leaf_index(v) == -1);
}

TEST_CASE("descendant subtree views") {
  SUBCASE("two-leaf tree: each side is a single leaf") {
    const TreeTopology t = testutil::two_leaf_tree();
    const RootedView view = descendant_subtree(t, 0, 1);
    CHECK(view.order.size() == 1);
    CHECK(view.root == 0);
    CHECK(view.leaves == std::vector<NodeId>{0});
  }
  SUBCASE("quartet: internal root sees its two leaf children") {
    const auto [t, params] = testutil::quartet();
    const NodeId a = t.find_label("A");
    NodeId x = kNoNode;
    for (const Halfedge& h : t.neighbors(a)) x = h.neighbor;
    NodeId y = kNoNode;
    for (const Halfedge& h : t.neighbors(x))
      if (!t.is_leaf(h.neighbor)) y = h.neighbor;
    REQUIRE(y != kNoNode);
    const RootedView view = descendant_subtree(t, x, y);
    CHECK(view.order.size() == 3);
    CHECK(view.child[x].size() == 2);
    CHECK(view.leaf_count() == 2);
    const RootedView leaf_view = descendant_subtree(t, a, x);
    CHECK(leaf_view.order.size() == 1);
  }
  SUBCASE("the two sides of an edge partition the node set") {
    Rng rng(11);
    const TreeTopology t = random_binary_tree(7, rng);
    for (EdgeId e = 0; e < t.edge_count(); ++e) {
      const auto [x, y] = t.endpoints(e);
      const RootedView side_x = descendant_subtree(t, x, y);
      const RootedView side_y = descendant_subtree(t, y, x);
      int covered = 0;
      for (NodeId v = 0; v < t.node_count(); ++v) {
        CHECK(side_x.contains(v) != side_y.contains(v));
        if (side_x.contains(v) || side_y.contains(v)) ++covered;
      }
      CHECK(covered == t.node_count());
    }
  }
  SUBCASE("non-adjacent pair is rejected") {
    const auto [t, params] = testutil::quartet();
    const NodeId a = t.find_label("A"), b = t.find_label("C");
    CHECK_THROWS_AS(descendant_subtree(t, a, b), std::invalid_argument);
  }
}

TEST_CASE("whole tree view orders parents before children") {
  Rng rng(13);
  const TreeTopology t = random_binary_tree(8, rng);
  const RootedView view = whole_tree_view(t, 0);
  CHECK(view.order.size() == static_cast<size_t>(t.node_count()));
  std::vector<int> position(t.node_count(), -1);
  for (size_t i = 0; i < view.order.size(); ++i) position[view.order[i]] = static_cast<int>(i);
  for (NodeId v : view.order) {
    if (v == view.root) continue;
    CHECK(position[view.parent[v].neighbor] < position[v]);
  }
  CHECK(view.leaves.size() == t.leaf_ids().size());
}

TEST_CASE("dfs edge order is a permutation of the edges") {
  Rng rng(17);
  const TreeTopology t = random_binary_tree(9, rng);
  const std::vector<EdgeId> order = dfs_edge_order(t, 0);
  CHECK(order.size() == static_cast<size_t>(t.edge_count()));
  std::set<EdgeId> seen(order.begin(), order.end());
  CHECK(seen.size() == order.size());
  // The first edge leaves the anchor.
  const auto [p, q] = t.endpoints(order.front());
  CHECK((p == 0 || q == 0));
}

TEST_CASE("experiment trees") {
  SUBCASE("complete depth 1 is the cherry") {
    const ExperimentTree et = experiment_tree(ExperimentTreeKind::kComplete, 1);
    CHECK(et.tree.node_count() == 3);
    CHECK(et.tree.degree(et.view.root) == 2);
    CHECK(et.view.leaf_count() == 2);
  }
  SUBCASE("complete depth 3 has 8 leaves") {
    const ExperimentTree et = experiment_tree(ExperimentTreeKind::kComplete, 3);
    CHECK(et.tree.node_count() == 15);
    CHECK(et.view.leaf_count() == 8);
    for (NodeId v = 0; v < et.tree.node_count(); ++v)
      if (!et.tree.is_leaf(v) && v != et.view.root) CHECK(et.tree.degree(v) == 3);
  }
  SUBCASE("caterpillar-4 is path-like with 4 leaves") {
    const ExperimentTree et = experiment_tree(ExperimentTreeKind::kCaterpillar, 4);
    CHECK(et.view.leaf_count() == 4);
    CHECK(et.tree.node_count() == 7);
  }
  SUBCASE("balanced sizes") {
    CHECK(experiment_tree(ExperimentTreeKind::kBalanced, 8).tree.node_count() == 15);
    CHECK(experiment_tree(ExperimentTreeKind::kBalanced, 6).view.leaf_count() == 6);
    CHECK(experiment_tree(ExperimentTreeKind::kBalanced, 1000).view.leaf_count() ==
          1000);
  }
  SUBCASE("name round trip") {
    for (auto kind : {ExperimentTreeKind::kComplete, ExperimentTreeKind::kCaterpillar,
                      ExperimentTreeKind::kBalanced})
      CHECK(experiment_tree_kind_from_name(to_string(kind)) == kind);
    CHECK_THROWS_AS(experiment_tree_kind_from_name("nope"), std::invalid_argument);
  }
  CHECK_THROWS_AS(experiment_tree(ExperimentTreeKind::kComplete, 0),
                  std::invalid_argument);
}
