#include "cfn/likelihood.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "cfn/numeric.hpp"

namespace cfn {

void Dataset::validate() const {
  if (samples.empty()) throw std::invalid_argument("dataset is empty");
  if (!weights.empty() && weights.size() != samples.size())
    throw std::invalid_argument("dataset: weights/samples length mismatch");
  for (double w : weights)
    if (!(w >= 0.0)) throw std::invalid_argument("dataset: negative weight");
}

double log_likelihood(const TreeTopology& tree, const EdgeParameters& params_hat,
                      const SpinConfig& leaf_spins) {
  if (static_cast<int>(params_hat.theta.size()) != tree.edge_count())
    throw std::invalid_argument("log_likelihood: parameter/edge count mismatch");
  for (double t : params_hat.theta)
    if (!(t >= -1.0 && t <= 1.0))
      throw std::invalid_argument("log_likelihood: theta outside [-1,1]");

  NodeId anchor = 0;
  for (NodeId v = 0; v < tree.node_count(); ++v)
    if (!tree.is_leaf(v)) {
      anchor = v;
      break;
    }
  const RootedView view = whole_tree_view(tree, anchor);

  // cond[v] = P[leaf data under v | spin of v], renormalized per node.
  std::vector<std::array<double, 2>> cond(static_cast<size_t>(tree.node_count()));
  double log_scale = 0.0;
  for (auto it = view.order.rbegin(); it != view.order.rend(); ++it) {
    const NodeId v = *it;
    auto& c = cond[v];
    if (tree.is_leaf(v)) {
      const int8_t s = leaf_spin(tree, leaf_spins, v);
      c = {s < 0 ? 1.0 : 0.0, s > 0 ? 1.0 : 0.0};
    } else {
      c = {1.0, 1.0};
    }
    for (const Halfedge& h : view.child[v]) {
      const double th = params_hat.theta[h.edge];
      const auto& k = cond[h.neighbor];
      // spin indices: 0 = -1, 1 = +1
      const double down = 0.5 * ((1.0 + th) * k[0] + (1.0 - th) * k[1]);
      const double up = 0.5 * ((1.0 - th) * k[0] + (1.0 + th) * k[1]);
      c[0] *= down;
      c[1] *= up;
    }
    const double m = c[0] > c[1] ? c[0] : c[1];
    if (m <= 0.0)
      throw std::domain_error("log_likelihood: observation has probability 0");
    c[0] /= m;
    c[1] /= m;
    log_scale += std::log(m);
  }
  const double total = 0.5 * (cond[anchor][0] + cond[anchor][1]);
  if (total <= 0.0)
    throw std::domain_error("log_likelihood: observation has probability 0");
  return std::log(total) + log_scale;
}

namespace {

// Weight-normalized pairwise mean of `terms`; uniform when weights is empty.
double weighted_mean(std::vector<double>& terms, const std::vector<double>& weights) {
  if (weights.empty()) return pairwise_sum(terms) / static_cast<double>(terms.size());
  for (size_t i = 0; i < terms.size(); ++i) terms[i] *= weights[i];
  const double mass = pairwise_sum(weights);
  if (!(mass > 0.0)) throw std::invalid_argument("dataset: total weight is 0");
  return pairwise_sum(terms) / mass;
}

}  // namespace

double log_likelihood_dataset(const TreeTopology& tree,
                              const EdgeParameters& params_hat, const Dataset& data) {
  data.validate();
  std::vector<double> terms;
  terms.reserve(data.size());
  for (const SpinConfig& s : data.samples)
    terms.push_back(log_likelihood(tree, params_hat, s));
  return weighted_mean(terms, data.weights);
}

namespace {

double grad_from_messages(const MessageTable& table, const TreeTopology& tree,
                          const EdgeParameters& params_hat, EdgeId e) {
  const auto [x, y] = tree.endpoints(e);
  const double w = table.toward(e, y) * table.toward(e, x);
  const double denom = 1.0 + params_hat.theta[e] * w;
  if (denom <= 0.0)
    throw std::domain_error("gradient: vanishing denominator at edge " +
                            std::to_string(e));
  return w / denom;
}

}  // namespace

double grad_edge(const TreeTopology& tree, const EdgeParameters& params_hat,
                 const SpinConfig& leaf_spins, EdgeId edge) {
  const MessageTable table = all_messages(tree, params_hat, leaf_spins);
  return grad_from_messages(table, tree, params_hat, edge);
}

GradientVector grad_all(const TreeTopology& tree, const EdgeParameters& params_hat,
                        const SpinConfig& leaf_spins) {
  const MessageTable table = all_messages(tree, params_hat, leaf_spins);
  GradientVector out(static_cast<size_t>(tree.edge_count()));
  for (EdgeId e = 0; e < tree.edge_count(); ++e)
    out[e] = grad_from_messages(table, tree, params_hat, e);
  return out;
}

GradientVector grad_all_dataset(const TreeTopology& tree,
                                const EdgeParameters& params_hat, const Dataset& data) {
  data.validate();
  const size_t m = data.size();
  const auto n_edges = static_cast<size_t>(tree.edge_count());
  std::vector<std::vector<double>> per_edge(n_edges, std::vector<double>(m));
  for (size_t i = 0; i < m; ++i) {
    const GradientVector g = grad_all(tree, params_hat, data.samples[i]);
    for (size_t e = 0; e < n_edges; ++e) per_edge[e][i] = g[e];
  }
  GradientVector out(n_edges);
  for (size_t e = 0; e < n_edges; ++e)
    out[e] = weighted_mean(per_edge[e], data.weights);
  return out;
}

GradientVector finite_difference_grad(const TreeTopology& tree,
                                      const EdgeParameters& params_hat,
                                      const SpinConfig& leaf_spins, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite differences need step > 0");
  GradientVector out(params_hat.theta.size());
  EdgeParameters work = params_hat;
  for (EdgeId e = 0; e < tree.edge_count(); ++e) {
    const double center = params_hat.theta[e];
    if (!(center - step > -1.0 && center + step < 1.0))
      throw std::domain_error("finite differences: step leaves (-1,1) at edge " +
                              std::to_string(e));
    work.theta[e] = center + step;
    const double hi = log_likelihood(tree, work, leaf_spins);
    work.theta[e] = center - step;
    const double lo = log_likelihood(tree, work, leaf_spins);
    work.theta[e] = center;
    out[e] = (hi - lo) / (2.0 * step);
  }
  return out;
}

double population_gradient_closed_form(double theta_true, double theta_hat) {
  if (!(theta_hat > -1.0 && theta_hat < 1.0))
    throw std::domain_error("population gradient needs |theta_hat| < 1");
  return (theta_true - theta_hat) / (1.0 - theta_hat * theta_hat);
}

}  // namespace cfn
