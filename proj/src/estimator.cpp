#include "cfn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfn/numeric.hpp"

namespace cfn {

void FitConfig::validate() const {
  if (!(-1.0 < theta_min && theta_min < theta_max && theta_max < 1.0))
    throw std::invalid_argument("fit: need -1 < theta_min < theta_max < 1");
  if (!(root_tolerance > 0.0)) throw std::invalid_argument("fit: root tolerance <= 0");
  if (max_sweeps < 0) throw std::invalid_argument("fit: negative sweep budget");
  if (!(convergence_threshold > 0.0))
    throw std::invalid_argument("fit: convergence threshold <= 0");
}

const char* to_string(FitTermination reason) {
  switch (reason) {
    case FitTermination::kConverged: return "converged";
    case FitTermination::kMaxSweeps: return "max-sweeps";
    case FitTermination::kBoundary: return "boundary";
  }
  return "?";
}

std::vector<double> edge_profile_products(const TreeTopology& tree,
                                          const EdgeParameters& params_hat,
                                          const Dataset& data, EdgeId edge) {
  data.validate();
  const auto [x, y] = tree.endpoints(edge);
  const RootedView side_x = descendant_subtree(tree, x, y);
  const RootedView side_y = descendant_subtree(tree, y, x);
  std::vector<double> out;
  out.reserve(data.size());
  for (const SpinConfig& s : data.samples)
    out.push_back(root_magnetization(tree, side_x, params_hat, s) *
                  root_magnetization(tree, side_y, params_hat, s));
  return out;
}

namespace {

std::vector<double> derivative_terms(std::span<const double> products, double theta) {
  std::vector<double> terms(products.size());
  for (size_t i = 0; i < products.size(); ++i) {
    const double denom = 1.0 + theta * products[i];
    if (denom <= 0.0)
      throw std::domain_error("edge_derivative: pole at sample " + std::to_string(i));
    terms[i] = products[i] / denom;
  }
  return terms;
}

}  // namespace

double edge_derivative(std::span<const double> products, double theta) {
  if (products.empty()) throw std::invalid_argument("edge_derivative: no samples");
  auto terms = derivative_terms(products, theta);
  return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double edge_derivative(std::span<const double> products,
                       std::span<const double> weights, double theta) {
  if (weights.empty()) return edge_derivative(products, theta);
  if (weights.size() != products.size())
    throw std::invalid_argument("edge_derivative: weights/products mismatch");
  auto terms = derivative_terms(products, theta);
  for (size_t i = 0; i < terms.size(); ++i) terms[i] *= weights[i];
  const double mass = pairwise_sum(weights);
  if (!(mass > 0.0)) throw std::invalid_argument("edge_derivative: total weight 0");
  return pairwise_sum(terms) / mass;
}

namespace {

double optimize_core(std::span<const double> products,
                     std::span<const double> weights, const FitConfig& config) {
  config.validate();
  const auto deriv = [&](double th) { return edge_derivative(products, weights, th); };
  // The derivative is strictly decreasing unless all products vanish, so the
  // endpoint signs decide everything; ties (constant objective) take theta_min.
  if (deriv(config.theta_min) <= 0.0) return config.theta_min;
  if (deriv(config.theta_max) >= 0.0) return config.theta_max;
  double lo = config.theta_min, hi = config.theta_max;
  while (hi - lo > config.root_tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (deriv(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double optimize_edge(std::span<const double> products, const FitConfig& config) {
  return optimize_core(products, {}, config);
}

double optimize_edge(std::span<const double> products,
                     std::span<const double> weights, const FitConfig& config) {
  return optimize_core(products, weights, config);
}

namespace {

std::vector<EdgeId> resolve_order(const TreeTopology& tree, const FitConfig& config) {
  if (config.sweep_order.empty()) return dfs_edge_order(tree, 0);
  if (static_cast<int>(config.sweep_order.size()) != tree.edge_count())
    throw std::invalid_argument("sweep order must list every edge exactly once");
  std::vector<char> seen(config.sweep_order.size(), 0);
  for (EdgeId e : config.sweep_order) {
    if (e < 0 || e >= tree.edge_count() || seen[e])
      throw std::invalid_argument("sweep order must list every edge exactly once");
    seen[e] = 1;
  }
  return config.sweep_order;
}

double optimize_with(const Dataset& data, std::span<const double> products,
                     const FitConfig& config) {
  return data.weights.empty() ? optimize_edge(products, config)
                              : optimize_edge(products, data.weights, config);
}

// Cached-message sweep. One message per edge and sample, always directed
// toward the walking anchor; moving the anchor across an edge rewrites just
// that edge's messages. Fold orders match root_magnetization, so the results
// are bit-identical to the recompute-everything path.
class IncrementalSweep {
 public:
  IncrementalSweep(const TreeTopology& tree, EdgeParameters& params,
                   const Dataset& data, const FitConfig& config)
      : tree_(tree), params_(params), data_(data), config_(config) {
    const size_t m = data.size();
    up_.assign(static_cast<size_t>(tree.edge_count()), std::vector<double>(m, 0.0));
    const RootedView view = whole_tree_view(tree, 0);
    for (auto it = view.order.rbegin(); it != view.order.rend(); ++it) {
      const NodeId v = *it;
      const Halfedge parent = view.parent[v];
      if (parent.neighbor == kNoNode) continue;
      fill_message(v, parent.neighbor, up_[parent.edge]);
    }
  }

  void run() { walk(0, kNoNode); }

 private:
  // Message leaving `v` away from `skip`, for sample i.
  double fold_at(NodeId v, NodeId skip, size_t i) const {
    if (tree_.is_leaf(v))
      return static_cast<double>(leaf_spin(tree_, data_.samples[i], v));
    bool have = false;
    double acc = 0.0;
    for (const Halfedge& h : tree_.neighbors(v)) {
      if (h.neighbor == skip) continue;
      const double x = clamp_theta(params_.theta[h.edge]) * up_[h.edge][i];
      acc = have ? q_combine(acc, x) : x;
      have = true;
    }
    return acc;
  }

  void fill_message(NodeId v, NodeId skip, std::vector<double>& slot) const {
    for (size_t i = 0; i < slot.size(); ++i) slot[i] = fold_at(v, skip, i);
  }

  void walk(NodeId u, NodeId from) {
    for (const Halfedge& h : tree_.neighbors(u)) {
      const NodeId v = h.neighbor;
      if (v == from) continue;
      const EdgeId e = h.edge;
      const size_t m = data_.size();
      {
        std::vector<double> near_side(m);
        fill_message(u, v, near_side);  // u's side; also the new toward-v message
        {
          std::vector<double> products(m);
          for (size_t i = 0; i < m; ++i) products[i] = near_side[i] * up_[e][i];
          params_.theta[e] = optimize_with(data_, products, config_);
        }
        up_[e] = std::move(near_side);  // anchor moves u -> v
      }  // scratch is freed before descending: keeps memory flat on deep trees
      walk(v, u);
      fill_message(v, u, up_[e]);  // anchor returns v -> u, with updated thetas
    }
  }

  const TreeTopology& tree_;
  EdgeParameters& params_;
  const Dataset& data_;
  const FitConfig& config_;
  std::vector<std::vector<double>> up_;  // [edge][sample], toward the anchor
};

}  // namespace

EdgeParameters coordinate_sweep(const TreeTopology& tree,
                                const EdgeParameters& params_hat,
                                const Dataset& data, const FitConfig& config) {
  config.validate();
  data.validate();
  if (static_cast<int>(params_hat.theta.size()) != tree.edge_count())
    throw std::invalid_argument("coordinate_sweep: parameter/edge count mismatch");
  EdgeParameters current = params_hat;
  if (config.incremental_messages) {
    if (!config.sweep_order.empty())
      throw std::invalid_argument(
          "incremental_messages requires the default depth-first sweep order");
    IncrementalSweep(tree, current, data, config).run();
    return current;
  }
  for (EdgeId e : resolve_order(tree, config)) {
    const auto products = edge_profile_products(tree, current, data, e);
    current.theta[e] = optimize_with(data, products, config);
  }
  return current;
}

FitResult fit(const TreeTopology& tree, const Dataset& data,
              const EdgeParameters& init, const FitConfig& config) {
  config.validate();
  data.validate();
  FitResult result;
  result.params = init;
  result.reason = FitTermination::kMaxSweeps;
  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    const EdgeParameters next = coordinate_sweep(tree, result.params, data, config);
    double change = 0.0;
    for (size_t e = 0; e < next.theta.size(); ++e)
      change = std::max(change, std::abs(next.theta[e] - result.params.theta[e]));
    result.params = next;
    result.sweep_max_change.push_back(change);
    result.sweep_log_likelihood.push_back(
        log_likelihood_dataset(tree, result.params, data));
    if (change < config.convergence_threshold) {
      bool pinned = false;
      for (double t : result.params.theta)
        pinned = pinned || std::abs(t - config.theta_min) <= config.root_tolerance ||
                 std::abs(t - config.theta_max) <= config.root_tolerance;
      result.reason = pinned ? FitTermination::kBoundary : FitTermination::kConverged;
      break;
    }
  }
  return result;
}

}  // namespace cfn
