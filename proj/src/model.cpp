#include "cfn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace cfn {

namespace {

double to_theta(double value, EdgeScale from) {
  switch (from) {
    case EdgeScale::kTheta:
      if (value < -1.0 || value > 1.0) throw std::domain_error("theta outside [-1,1]");
      return value;
    case EdgeScale::kFlipProbability:
      if (!(value >= 0.0 && value < 0.5))
        throw std::domain_error("flip probability outside [0,1/2)");
      return 1.0 - 2.0 * value;
    case EdgeScale::kLength:
      if (!(value >= 0.0)) throw std::domain_error("length must be >= 0");
      return std::exp(-value);
  }
  throw std::logic_error("bad scale");
}

}  // namespace

double convert_edge_value(double value, EdgeScale from, EdgeScale to) {
  const double theta = to_theta(value, from);
  switch (to) {
    case EdgeScale::kTheta:
      return theta;
    case EdgeScale::kFlipProbability: {
      const double p = 0.5 * (1.0 - theta);
      if (!(p >= 0.0 && p < 0.5))
        throw std::domain_error("flip probability outside [0,1/2)");
      return p;
    }
    case EdgeScale::kLength:
      if (theta <= 0.0) throw std::domain_error("length undefined for theta <= 0");
      return -std::log(theta);
  }
  throw std::logic_error("bad scale");
}

void ParameterBox::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("box: delta must be > 0");
  if (!(c_lo > 0.0)) throw std::invalid_argument("box: c_lo must be > 0");
  if (!(c_lo < c_hi)) throw std::invalid_argument("box: need c_lo < c_hi");
  if (!(c_hi * delta < 0.5))
    throw std::invalid_argument("box: need c_hi*delta < 1/2");
}

SpinConfig SpinConfig::restricted_to_leaves(const TreeTopology& tree) const {
  if (scope == SpinScope::kLeavesOnly) return *this;
  SpinConfig out{SpinScope::kLeavesOnly, {}};
  out.spins.reserve(tree.leaf_ids().size());
  for (NodeId v : tree.leaf_ids()) out.spins.push_back(spins[v]);
  return out;
}

int8_t leaf_spin(const TreeTopology& tree, const SpinConfig& config, NodeId leaf) {
  if (config.scope == SpinScope::kFullTree) return config.spins.at(leaf);
  const int32_t pos = tree.leaf_index(leaf);
  if (pos < 0) throw std::invalid_argument("leaf_spin: node is not a leaf");
  return config.spins.at(pos);
}

EdgeParameters sample_parameters(const TreeTopology& tree, const ParameterBox& box,
                                 Rng& rng) {
  box.validate();
  EdgeParameters out;
  out.theta.reserve(static_cast<size_t>(tree.edge_count()));
  for (EdgeId e = 0; e < tree.edge_count(); ++e)
    out.theta.push_back(rng.uniform(box.theta_min(), box.theta_max()));
  return out;
}

bool in_box(const EdgeParameters& params, const ParameterBox& box) {
  box.validate();
  for (double t : params.theta)
    if (t < box.theta_min() || t > box.theta_max()) return false;
  return true;
}

SpinConfig broadcast_sample(const TreeTopology& tree, const EdgeParameters& params,
                            NodeId anchor, Rng& rng) {
  if (static_cast<int>(params.theta.size()) != tree.edge_count())
    throw std::invalid_argument("broadcast_sample: parameter/edge count mismatch");
  for (double t : params.theta)
    if (!(t > 0.0 && t <= 1.0))
      throw std::domain_error("broadcast_sample: theta must lie in (0,1]");

  SpinConfig out{SpinScope::kFullTree,
                 std::vector<int8_t>(static_cast<size_t>(tree.node_count()), 0)};
  out.spins[anchor] = rng.pm1();
  std::vector<Halfedge> stack;
  std::vector<char> seen(static_cast<size_t>(tree.node_count()), 0);
  seen[anchor] = 1;
  const auto& nbrs = tree.neighbors(anchor);
  for (auto it = nbrs.rbegin(); it != nbrs.rend(); ++it) stack.push_back(*it);
  std::vector<NodeId> from_stack;  // parent of each stacked halfedge
  for (auto it = nbrs.rbegin(); it != nbrs.rend(); ++it) from_stack.push_back(anchor);
  while (!stack.empty()) {
    const Halfedge h = stack.back();
    const NodeId parent = from_stack.back();
    stack.pop_back();
    from_stack.pop_back();
    const NodeId v = h.neighbor;
    seen[v] = 1;
    const double p = 0.5 * (1.0 - params.theta[h.edge]);
    const int8_t s = out.spins[parent];
    out.spins[v] = rng.bernoulli(p) ? static_cast<int8_t>(-s) : s;
    const auto& next = tree.neighbors(v);
    for (auto it = next.rbegin(); it != next.rend(); ++it)
      if (!seen[it->neighbor]) {
        stack.push_back(*it);
        from_stack.push_back(v);
      }
  }
  return out;
}

size_t LeafDistribution::index_of(const std::vector<int8_t>& spins) const {
  if (spins.size() != leaves.size())
    throw std::invalid_argument("index_of: wrong spin count");
  size_t k = 0;
  for (size_t i = 0; i < spins.size(); ++i)
    if (spins[i] > 0) k |= (size_t{1} << i);
  return k;
}

LeafDistribution enumerate_leaf_distribution(const TreeTopology& tree,
                                             const RootedView& view,
                                             const EdgeParameters& params) {
  const size_t n_leaves = view.leaves.size();
  if (n_leaves > 16)
    throw std::invalid_argument("enumerate_leaf_distribution: more than 16 leaves");
  const size_t n_nodes = view.order.size();

  // Position of each view node within view.order, for edge endpoint lookup.
  std::vector<int32_t> pos(static_cast<size_t>(tree.node_count()), -1);
  for (size_t i = 0; i < n_nodes; ++i) pos[view.order[i]] = static_cast<int32_t>(i);

  struct EdgeRef {
    int32_t a, b;
    double theta;
  };
  std::vector<EdgeRef> edges;
  edges.reserve(n_nodes - 1);
  for (size_t i = 1; i < n_nodes; ++i) {
    const NodeId v = view.order[i];
    const Halfedge up = view.parent[v];
    edges.push_back({pos[up.neighbor], static_cast<int32_t>(i), params.theta[up.edge]});
  }
  std::vector<int32_t> leaf_pos;
  leaf_pos.reserve(n_leaves);
  for (NodeId v : view.leaves) leaf_pos.push_back(pos[v]);

  LeafDistribution out;
  out.leaves = view.leaves;
  out.probability.assign(size_t{1} << n_leaves, 0.0);

  // Full sweep over every +-1 assignment of the view's nodes.
  const uint64_t total = uint64_t{1} << n_nodes;
  for (uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.5;
    for (const EdgeRef& e : edges) {
      const double sa = (mask >> e.a) & 1 ? 1.0 : -1.0;
      const double sb = (mask >> e.b) & 1 ? 1.0 : -1.0;
      w *= 0.5 * (1.0 + sa * sb * e.theta);
    }
    size_t k = 0;
    for (size_t i = 0; i < n_leaves; ++i)
      if ((mask >> leaf_pos[i]) & 1) k |= (size_t{1} << i);
    out.probability[k] += w;
  }
  return out;
}

}  // namespace cfn
