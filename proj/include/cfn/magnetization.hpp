#pragma once

#include <string>
#include <vector>

#include "cfn/model.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/**
 * Combines two magnetizations: q(s, t) = (s + t) / (1 + s*t), the posterior
 * bias of a root receiving two independent signals of bias s and t. Increasing
 * in each argument on (-1,1), antisymmetric, associative. Throws
 * std::domain_error at the pole s*t = -1.
 */
double q_combine(double s, double t);

/** The default pole guard: theta restricted to [-1+1e-12, 1-1e-12]. */
double clamp_theta(double theta);

struct MagnetizationOptions {
  /**
   * By default edge values are clamped to [-1+1e-12, 1-1e-12] before the
   * recursion so poles cannot occur. Exact-endpoint mode uses theta as given;
   * contradictory conditioning at |theta|=1 then raises std::domain_error.
   */
  bool exact_endpoints = false;
};

/**
 * Posterior root bias E[sigma_root | leaf spins] under the evaluation
 * parameters, computed leaf-to-root: Z = sigma at leaves, q-fold of
 * theta_e * Z_child over children at internal nodes. A view root that is
 * itself an observed leaf returns its own spin. Works for any theta in
 * [-1,1] per edge.
 */
double root_magnetization(const TreeTopology& tree, const RootedView& view,
                          const EdgeParameters& params_hat,
                          const SpinConfig& leaf_spins,
                          const MagnetizationOptions& options = {});

/**
 * Same quantity by exact summation of the joint law over unobserved spins:
 * (P[root=+1, data] - P[root=-1, data]) / P[data]. Oracle for
 * root_magnetization; cost exponential in internal node count, rejects views
 * with more than 12 leaves. Throws std::domain_error when the observation has
 * probability zero (possible only with |theta|=1 edges).
 */
double brute_force_magnetization(const TreeTopology& tree, const RootedView& view,
                                 const EdgeParameters& params_hat,
                                 const SpinConfig& leaf_spins);

/**
 * All 2|E| directed messages of one sample. The message toward v across edge
 * e = {u,v} is the root bias of the subtree hanging off u when e is removed,
 * equal to root_magnetization over descendant_subtree(tree, u, v).
 */
class MessageTable {
 public:
  MessageTable(const TreeTopology* tree, std::vector<double> values)
      : tree_(tree), values_(std::move(values)) {}

  double toward(EdgeId e, NodeId v) const { return values_[slot(e, v)]; }
  void set_toward(EdgeId e, NodeId v, double z) { values_[slot(e, v)] = z; }
  const std::vector<double>& raw() const { return values_; }

 private:
  size_t slot(EdgeId e, NodeId v) const;
  const TreeTopology* tree_;
  std::vector<double> values_;
};

/**
 * Computes every directed message in two linear passes (inward to an anchor,
 * then outward). Values match per-view root_magnetization calls bit for bit
 * because the fold order (adjacency order, skipping the message target) is
 * shared.
 */
MessageTable all_messages(const TreeTopology& tree, const EdgeParameters& params_hat,
                          const SpinConfig& leaf_spins,
                          const MagnetizationOptions& options = {});

/** Outcome tiers for root reconstruction from a posterior bias. */
enum class ReconstructionTier { kGood, kModerate, kSevere };

const char* to_string(ReconstructionTier tier);
ReconstructionTier reconstruction_tier_from_name(const std::string& name);

/**
 * Threshold and tail-rate constants for the reconstruction trichotomy.
 * Reading them: with true root spin s and posterior bias z,
 *   good    iff  s*z >= 1 - good_gap * delta^2,   P(not good) <= miss_rate * delta,
 *   severe  iff  s*z <= -severe_threshold,        P(severe)  <= severe_rate * delta^2,
 * with both tail bounds guaranteed only for delta <= max_delta.
 */
struct TrichotomyConstants {
  double good_gap;
  double miss_rate;
  double severe_threshold;
  double severe_rate;
  double max_delta;
};

/**
 * Derives the constants from box coefficients: true_c_hi scales the true
 * edge box, hat_c_lo/hat_c_hi the evaluation box (which must satisfy
 * hat_c_hi >= 2*hat_c_lo). All positive inputs required.
 */
TrichotomyConstants trichotomy_constants(double true_c_hi, double hat_c_lo,
                                         double hat_c_hi);

/** Constants for the instantiation true_c_hi=1/2, hat box [1/4, 1/2]. */
TrichotomyConstants default_constants();

/**
 * Classifies one (true root spin, posterior bias) pair at scale delta.
 * Severe takes precedence over good where the thresholds overlap (they do
 * once good_gap * delta^2 >= 1 + severe_threshold).
 */
ReconstructionTier classify_trichotomy(int sigma_u, double z_u, double delta,
                                       const TrichotomyConstants& consts);

}  // namespace cfn
