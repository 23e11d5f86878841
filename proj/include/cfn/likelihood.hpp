#pragma once

#include <vector>

#include "cfn/magnetization.hpp"
#include "cfn/model.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/** Per-edge derivative of a leaf log-likelihood with respect to theta_e. */
using GradientVector = std::vector<double>;

/**
 * A batch of leaf observations over one tree. Rows are leaves-only configs
 * aligned with TreeTopology::leaf_ids(). `weights` is either empty (every
 * sample counts 1/m) or one non-negative weight per sample, in which case
 * averages are weight-normalized; this carries exact enumerated laws through
 * the same code paths as sampled data.
 */
struct Dataset {
  std::vector<SpinConfig> samples;
  std::vector<double> weights;

  size_t size() const { return samples.size(); }
  void validate() const;
};

/**
 * log P[leaf spins] under the evaluation parameters, by pruning from the
 * leaves to an internal anchor with per-node renormalization (stable for
 * large trees). Accepts theta in [-1,1]; throws std::domain_error when the
 * observation has probability zero, which requires some |theta_e| = 1.
 */
double log_likelihood(const TreeTopology& tree, const EdgeParameters& params_hat,
                      const SpinConfig& leaf_spins);

/** Weight-normalized mean of per-sample log-likelihoods (pairwise-summed). */
double log_likelihood_dataset(const TreeTopology& tree,
                              const EdgeParameters& params_hat, const Dataset& data);

/**
 * Single-sample derivative with respect to theta_e: with Z_x, Z_y the
 * magnetizations of the two sides of e (neither depends on theta_e),
 * d log P / d theta_e = Z_x Z_y / (1 + theta_e Z_x Z_y). Throws
 * std::domain_error when the denominator is not positive.
 */
double grad_edge(const TreeTopology& tree, const EdgeParameters& params_hat,
                 const SpinConfig& leaf_spins, EdgeId edge);

/** All edges at once from a single message pass; entries match grad_edge. */
GradientVector grad_all(const TreeTopology& tree, const EdgeParameters& params_hat,
                        const SpinConfig& leaf_spins);

/** Weight-normalized dataset mean of grad_all (pairwise-summed per edge). */
GradientVector grad_all_dataset(const TreeTopology& tree,
                                const EdgeParameters& params_hat, const Dataset& data);

/**
 * Central differences (l(theta_e + h) - l(theta_e - h)) / 2h per edge; test
 * oracle. Throws std::domain_error when a step leaves (-1, 1).
 */
GradientVector finite_difference_grad(const TreeTopology& tree,
                                      const EdgeParameters& params_hat,
                                      const SpinConfig& leaf_spins, double step);

/**
 * Expected single-edge gradient when data is generated at theta_true and
 * evaluated at theta_hat on that edge: (theta_true - theta_hat) /
 * (1 - theta_hat^2). Requires |theta_hat| < 1.
 */
double population_gradient_closed_form(double theta_true, double theta_hat);

}  // namespace cfn
