#include "cfn/magnetization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfn {

namespace {

constexpr double kClamp = 1.0 - 1e-12;

double effective_theta(double theta, const MagnetizationOptions& options) {
  if (theta < -1.0 || theta > 1.0)
    throw std::domain_error("magnetization: theta outside [-1,1]");
  if (options.exact_endpoints) return theta;
  return clamp_theta(theta);
}

double q_or_throw(double s, double t, EdgeId at_edge) {
  const double denom = 1.0 + s * t;
  if (denom <= 0.0) {
    std::string where = at_edge == kNoEdge
                            ? std::string("q_combine")
                            : "message fold at edge " + std::to_string(at_edge);
    throw std::domain_error(where + ": pole, contradictory +-1 inputs");
  }
  return (s + t) / denom;
}

}  // namespace

double clamp_theta(double theta) { return std::clamp(theta, -kClamp, kClamp); }

double q_combine(double s, double t) { return q_or_throw(s, t, kNoEdge); }

double root_magnetization(const TreeTopology& tree, const RootedView& view,
                          const EdgeParameters& params_hat,
                          const SpinConfig& leaf_spins,
                          const MagnetizationOptions& options) {
  if (static_cast<int>(params_hat.theta.size()) != tree.edge_count())
    throw std::invalid_argument("root_magnetization: parameter/edge count mismatch");
  std::vector<double> z(static_cast<size_t>(tree.node_count()), 0.0);
  for (auto it = view.order.rbegin(); it != view.order.rend(); ++it) {
    const NodeId v = *it;
    if (tree.is_leaf(v)) {
      z[v] = static_cast<double>(leaf_spin(tree, leaf_spins, v));
      continue;
    }
    bool have = false;
    double acc = 0.0;
    for (const Halfedge& h : view.child[v]) {
      const double x = effective_theta(params_hat.theta[h.edge], options) * z[h.neighbor];
      acc = have ? q_or_throw(acc, x, h.edge) : x;
      have = true;
    }
    z[v] = acc;
  }
  return z[view.root];
}

double brute_force_magnetization(const TreeTopology& tree, const RootedView& view,
                                 const EdgeParameters& params_hat,
                                 const SpinConfig& leaf_spins) {
  if (view.leaves.size() > 12)
    throw std::invalid_argument("brute_force_magnetization: more than 12 leaves");
  const size_t n_nodes = view.order.size();

  std::vector<int32_t> pos(static_cast<size_t>(tree.node_count()), -1);
  for (size_t i = 0; i < n_nodes; ++i) pos[view.order[i]] = static_cast<int32_t>(i);

  // Fixed spins at observed leaves, free bit index at unobserved nodes.
  std::vector<double> fixed(n_nodes, 0.0);
  std::vector<int32_t> free_bit(n_nodes, -1);
  int n_free = 0;
  for (size_t i = 0; i < n_nodes; ++i) {
    const NodeId v = view.order[i];
    if (tree.is_leaf(v))
      fixed[i] = static_cast<double>(leaf_spin(tree, leaf_spins, v));
    else
      free_bit[i] = n_free++;
  }

  struct EdgeRef {
    int32_t a, b;
    double theta;
  };
  std::vector<EdgeRef> edges;
  edges.reserve(n_nodes - 1);
  for (size_t i = 1; i < n_nodes; ++i) {
    const NodeId v = view.order[i];
    const Halfedge up = view.parent[v];
    edges.push_back({pos[up.neighbor], static_cast<int32_t>(i), params_hat.theta[up.edge]});
  }

  const auto spin_at = [&](uint64_t mask, int32_t i) {
    return free_bit[i] >= 0 ? ((mask >> free_bit[i]) & 1 ? 1.0 : -1.0) : fixed[i];
  };

  double plus = 0.0, minus = 0.0;
  const uint64_t total = uint64_t{1} << n_free;
  for (uint64_t mask = 0; mask < total; ++mask) {
    double w = 0.5;
    for (const EdgeRef& e : edges)
      w *= 0.5 * (1.0 + spin_at(mask, e.a) * spin_at(mask, e.b) * e.theta);
    (spin_at(mask, 0) > 0 ? plus : minus) += w;
  }
  const double denom = plus + minus;
  if (denom <= 0.0)
    throw std::domain_error("brute_force_magnetization: observation has probability 0");
  return (plus - minus) / denom;
}

size_t MessageTable::slot(EdgeId e, NodeId v) const {
  const auto [a, b] = tree_->endpoints(e);
  if (v == b) return 2 * static_cast<size_t>(e) + 1;
  if (v == a) return 2 * static_cast<size_t>(e);
  throw std::invalid_argument("MessageTable: node is not an endpoint of edge");
}

MessageTable all_messages(const TreeTopology& tree, const EdgeParameters& params_hat,
                          const SpinConfig& leaf_spins,
                          const MagnetizationOptions& options) {
  if (static_cast<int>(params_hat.theta.size()) != tree.edge_count())
    throw std::invalid_argument("all_messages: parameter/edge count mismatch");
  MessageTable table(&tree, std::vector<double>(2 * static_cast<size_t>(tree.edge_count()), 0.0));
  const RootedView view = whole_tree_view(tree, 0);

  // Folds the messages arriving at v from all neighbors except `skip`,
  // in adjacency order; identical order to the per-view recursion.
  const auto fold_into = [&](NodeId v, NodeId skip) {
    if (tree.is_leaf(v)) return static_cast<double>(leaf_spin(tree, leaf_spins, v));
    bool have = false;
    double acc = 0.0;
    for (const Halfedge& h : tree.neighbors(v)) {
      if (h.neighbor == skip) continue;
      const double x =
          effective_theta(params_hat.theta[h.edge], options) * table.toward(h.edge, v);
      acc = have ? q_or_throw(acc, x, h.edge) : x;
      have = true;
    }
    return acc;
  };

  // Inward: child-to-parent messages, children first.
  for (auto it = view.order.rbegin(); it != view.order.rend(); ++it) {
    const NodeId v = *it;
    const Halfedge up = view.parent[v];
    if (up.neighbor == kNoNode) continue;
    table.set_toward(up.edge, up.neighbor, fold_into(v, up.neighbor));
  }
  // Outward: parent-to-child messages, parents first.
  for (const NodeId v : view.order) {
    const Halfedge up = view.parent[v];
    if (up.neighbor == kNoNode) continue;
    table.set_toward(up.edge, v, fold_into(up.neighbor, v));
  }
  return table;
}

const char* to_string(ReconstructionTier tier) {
  switch (tier) {
    case ReconstructionTier::kGood: return "good";
    case ReconstructionTier::kModerate: return "moderate";
    case ReconstructionTier::kSevere: return "severe";
  }
  return "?";
}

ReconstructionTier reconstruction_tier_from_name(const std::string& name) {
  if (name == "good") return ReconstructionTier::kGood;
  if (name == "moderate") return ReconstructionTier::kModerate;
  if (name == "severe") return ReconstructionTier::kSevere;
  throw std::invalid_argument("unknown tier name: " + name);
}

TrichotomyConstants trichotomy_constants(double true_c_hi, double hat_c_lo,
                                         double hat_c_hi) {
  if (!(true_c_hi > 0.0 && hat_c_lo > 0.0 && hat_c_hi > 0.0))
    throw std::invalid_argument("trichotomy_constants: coefficients must be > 0");
  if (!(hat_c_hi >= 2.0 * hat_c_lo))
    throw std::invalid_argument("trichotomy_constants: need hat_c_hi >= 2*hat_c_lo");
  TrichotomyConstants k{};
  const double ratio = 9.0 * (hat_c_hi * hat_c_hi) / hat_c_lo + 2.0 * hat_c_hi;
  k.good_gap = 4.0 * (ratio * ratio) / 5.0;
  k.miss_rate = 7.0 * true_c_hi;
  k.severe_threshold = (3.0 * hat_c_hi - 2.0 * hat_c_lo) / (3.0 * hat_c_hi);
  k.severe_rate = 78.0 * (true_c_hi * true_c_hi);
  k.max_delta = std::min({1.0 / (2380.0 * true_c_hi), hat_c_hi / (2.0 * k.good_gap),
                          5.0 / (72.0 * hat_c_hi), hat_c_lo});
  return k;
}

TrichotomyConstants default_constants() { return trichotomy_constants(0.5, 0.25, 0.5); }

ReconstructionTier classify_trichotomy(int sigma_u, double z_u, double delta,
                                       const TrichotomyConstants& consts) {
  const double aligned = static_cast<double>(sigma_u) * z_u;
  if (aligned <= -consts.severe_threshold) return ReconstructionTier::kSevere;
  if (aligned >= 1.0 - consts.good_gap * delta * delta) return ReconstructionTier::kGood;
  return ReconstructionTier::kModerate;
}

}  // namespace cfn
