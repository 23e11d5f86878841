#pragma once

// Shared fixtures for the unit tests: tiny trees, random inputs, and a
// path-product fingerprint used to compare trees up to node relabeling.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfn/likelihood.hpp"
#include "cfn/model.hpp"
#include "cfn/newick.hpp"
#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace testutil {

inline cfn::TreeTopology two_leaf_tree() {
  cfn::TreeTopology::Builder b;
  const cfn::NodeId a = b.add_node("A");
  const cfn::NodeId bb = b.add_node("B");
  b.connect(a, bb);
  return b.finish();
}

inline cfn::TreeTopology star_tree() {
  cfn::TreeTopology::Builder b;
  const cfn::NodeId c = b.add_node();
  for (const char* name : {"A", "B", "C"}) b.connect(c, b.add_node(name));
  return b.finish();
}

inline cfn::ParsedTree quartet() {
  return cfn::parse_newick("((A:0.1,B:0.1):0.1,(C:0.1,D:0.1):0.1);");
}

inline cfn::EdgeParameters random_theta(const cfn::TreeTopology& tree, cfn::Rng& rng,
                                        double lo, double hi) {
  cfn::EdgeParameters params;
  params.theta.resize(tree.edge_count());
  for (double& t : params.theta) t = rng.uniform(lo, hi);
  return params;
}

inline cfn::SpinConfig random_leaf_spins(const cfn::TreeTopology& tree,
                                         cfn::Rng& rng) {
  cfn::SpinConfig config;
  config.scope = cfn::SpinScope::kLeavesOnly;
  config.spins.resize(tree.leaf_ids().size());
  for (auto& s : config.spins) s = rng.pm1();
  return config;
}

/** Dataset of two-leaf rows: `agree` equal pairs and `total - agree` unequal. */
inline cfn::Dataset two_leaf_dataset(int agree, int total) {
  cfn::Dataset data;
  for (int i = 0; i < total; ++i) {
    const int8_t second = i < agree ? int8_t{1} : int8_t{-1};
    data.samples.push_back({cfn::SpinScope::kLeavesOnly, {int8_t{1}, second}});
  }
  return data;
}

/**
 * Product of theta along the unique leaf-to-leaf path, keyed by label pair.
 * Equal maps imply equal labeled topology and parameters for generic theta.
 */
inline std::map<std::pair<std::string, std::string>, double> path_products(
    const cfn::TreeTopology& tree, const cfn::EdgeParameters& params) {
  std::map<std::pair<std::string, std::string>, double> out;
  const auto& leaves = tree.leaf_ids();
  for (cfn::NodeId source : leaves) {
    std::vector<double> prod(tree.node_count(), 0.0);
    std::vector<cfn::NodeId> stack{source};
    prod[source] = 1.0;
    std::vector<char> seen(tree.node_count(), 0);
    seen[source] = 1;
    while (!stack.empty()) {
      const cfn::NodeId v = stack.back();
      stack.pop_back();
      for (const cfn::Halfedge& h : tree.neighbors(v)) {
        if (seen[h.neighbor]) continue;
        seen[h.neighbor] = 1;
        prod[h.neighbor] = prod[v] * params.theta[h.edge];
        stack.push_back(h.neighbor);
      }
    }
    for (cfn::NodeId target : leaves) {
      if (tree.label(source) < tree.label(target))
        out[{tree.label(source), tree.label(target)}] = prod[target];
    }
  }
  return out;
}

}  // namespace testutil
