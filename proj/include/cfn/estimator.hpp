#pragma once

#include <span>
#include <vector>

#include "cfn/likelihood.hpp"
#include "cfn/model.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/**
 * Settings for cyclic coordinate maximization. Each coordinate step maximizes
 * the dataset log-likelihood in one theta_e over [theta_min, theta_max] by
 * bisecting its monotone derivative.
 */
struct FitConfig {
  double theta_min = 0.01;        // paper regime: theta near 1 and positive
  double theta_max = 1.0 - 1e-9;
  double root_tolerance = 1e-10;  // bisection stops at this interval width
  int max_sweeps = 100;
  double convergence_threshold = 1e-8;  // max-abs parameter change per sweep
  /** Edge visit order; empty means depth-first order anchored at node 0. */
  std::vector<EdgeId> sweep_order;
  /**
   * Reuse cached per-sample messages along the depth-first walk instead of
   * recomputing both subtree magnetizations per edge. Requires the default
   * sweep order; results are identical bit for bit.
   */
  bool incremental_messages = false;

  void validate() const;
};

enum class FitTermination { kConverged, kMaxSweeps, kBoundary };

const char* to_string(FitTermination reason);

struct FitResult {
  EdgeParameters params;
  std::vector<double> sweep_max_change;      // one entry per executed sweep
  std::vector<double> sweep_log_likelihood;  // dataset value after each sweep
  FitTermination reason = FitTermination::kMaxSweeps;
};

/**
 * Per-sample products w_i = Z_x Z_y of the side magnetizations of `edge`.
 * Neither side contains the edge, so the products do not depend on theta_e;
 * this is what lets one coordinate step work from a fixed list of reals.
 */
std::vector<double> edge_profile_products(const TreeTopology& tree,
                                          const EdgeParameters& params_hat,
                                          const Dataset& data, EdgeId edge);

/**
 * Derivative of the one-coordinate objective: weighted mean of
 * w_i / (1 + theta * w_i). Strictly decreasing in theta unless every w_i is
 * zero. Throws std::domain_error at a pole (some 1 + theta * w_i <= 0).
 */
double edge_derivative(std::span<const double> products, double theta);
double edge_derivative(std::span<const double> products,
                       std::span<const double> weights, double theta);

/**
 * One-dimensional maximizer over [theta_min, theta_max]: the bisection root
 * of edge_derivative when it changes sign; otherwise the endpoint where the
 * objective is larger (theta_max when the derivative stays positive,
 * theta_min when it stays negative or the objective is constant).
 */
double optimize_edge(std::span<const double> products, const FitConfig& config);
double optimize_edge(std::span<const double> products,
                     std::span<const double> weights, const FitConfig& config);

/**
 * One full pass: visits edges in sweep order, maximizing each coordinate and
 * installing the new value before moving on, so later edges see earlier
 * updates within the same pass.
 */
EdgeParameters coordinate_sweep(const TreeTopology& tree,
                                const EdgeParameters& params_hat,
                                const Dataset& data, const FitConfig& config);

/**
 * Repeats coordinate sweeps from `init` until the max-abs parameter change
 * drops below the threshold or the sweep budget runs out, recording the
 * trajectory. Reason kBoundary flags convergence onto an interval endpoint.
 */
FitResult fit(const TreeTopology& tree, const Dataset& data,
              const EdgeParameters& init, const FitConfig& config);

}  // namespace cfn
