#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cfn/estimator.hpp"
#include "cfn/magnetization.hpp"
#include "cfn/model.hpp"
#include "cfn/numeric.hpp"
#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/** Requested thread count, or CFN_THREADS, or hardware concurrency. */
int resolve_threads(int requested);

/**
 * Runs body(0..n-1) across up to `threads` workers. Callers write results
 * into per-index slots, so output is identical for any worker count.
 */
void parallel_for(long n, int threads, const std::function<void(long)>& body);

/** Box interval shape; instantiated at each grid delta. */
struct BoxShape {
  double c_lo = 0.25;
  double c_hi = 0.5;
  ParameterBox at(double delta) const { return {delta, c_lo, c_hi}; }
};

/**
 * Shared Monte Carlo setup. Replicate i draws from Rng::substream(seed, i, 1)
 * regardless of scheduling; because the stream depends only on i, draws are
 * shared (coupled) across grid deltas, which removes most replicate noise
 * from cross-delta comparisons.
 */
struct ExperimentConfig {
  ExperimentTreeKind tree_kind = ExperimentTreeKind::kComplete;
  int tree_size = 6;  // depth for complete trees, leaf count otherwise
  std::vector<double> delta_grid;
  BoxShape true_box;
  BoxShape hat_box;
  TrichotomyConstants constants = default_constants();
  long samples_per_point = 100000;
  uint64_t seed = 1;
  int threads = 0;  // <= 0: resolve via CFN_THREADS / hardware
  /**
   * Default: every replicate draws fresh (theta*, theta_hat) from the boxes.
   * Fixed-pair mode draws one pair per delta (stream Rng::substream(seed,
   * point_index, 2)) and reuses it for all replicates.
   */
  bool fixed_pair = false;
  bool keep_samples = false;  // retain per-replicate (sigma, Z, tier) rows

  void validate() const;
};

/** One delta point of the trichotomy tally. */
struct TierPoint {
  double delta = 0.0;
  long n = 0;
  long good = 0, moderate = 0, severe = 0;
  double freq_good = 0.0, freq_moderate = 0.0, freq_severe = 0.0;
  ConfidenceInterval ci_good, ci_moderate, ci_severe;
  double good_threshold = 0.0;   // 1 - good_gap * delta^2
  double severe_boundary = 0.0;  // -severe_threshold
  double miss_bound = 0.0;       // miss_rate * delta, cap on P(not good)
  double severe_bound = 0.0;     // severe_rate * delta^2, cap on P(severe)
  bool extrapolated = false;     // delta > max_delta: bounds not guaranteed

  double freq_non_good() const { return freq_moderate + freq_severe; }
};

/** Per-replicate rows for one delta, kept when keep_samples is set. */
struct TailSamples {
  double delta = 0.0;
  std::vector<int8_t> sigma;  // true root spin
  std::vector<double> z;      // posterior root bias under theta_hat
  std::vector<ReconstructionTier> tier;
};

struct TrichotomyReport {
  std::vector<TierPoint> points;
  std::vector<TailSamples> samples;  // empty unless keep_samples
};

/**
 * For each delta: sample (parameters, broadcast, root bias), classify against
 * the trichotomy thresholds, and tally tiers with Wilson 95% intervals.
 */
TrichotomyReport tail_experiment(const ExperimentConfig& config);

/** Log-log regression of one failure tier's frequency against delta. */
struct TierSlope {
  SlopeFit line;
  std::vector<double> used_delta;      // points with >= 10 tier events
  std::vector<double> excluded_delta;  // too few events; noted, not fitted
};

struct ScalingReport {
  TrichotomyReport tally;
  TierSlope moderate;  // expected order: frequency ~ delta
  TierSlope severe;    // expected order: frequency ~ delta^2
};

/**
 * Tail tally over a >= 3 point grid plus per-tier slopes. Throws when a tier
 * retains fewer than two usable points.
 */
ScalingReport scaling_experiment(const ExperimentConfig& config);

/** One delta point of the split-subtree independence check. */
struct IndependencePoint {
  double delta = 0.0;
  long n = 0;
  EdgeId split_edge = kNoEdge;  // both sides hold >= 2 leaves
  NodeId root_u = kNoNode, root_v = kNoNode;
  double corr_pair = 0.0;  // corr(sigma_u Z_u, sigma_v Z_v)
  double corr_sign = 0.0;  // corr(sigma_u Z_u, sigma_u)
  bool extrapolated = false;
};

struct IndependenceReport {
  std::vector<IndependencePoint> points;
};

/**
 * Tests that the aligned bias sigma_u Z_u of one side of a split edge is
 * uncorrelated with the other side's, and with its own root spin. The split
 * edge is the lowest-id edge with at least two leaves on each side; throws
 * when none exists.
 */
IndependenceReport independence_experiment(const ExperimentConfig& config);

struct GradientPopulationReport {
  EdgeId edge = kNoEdge;
  double delta = 0.0;
  long n = 0;           // 0 in exact mode
  bool exact = false;   // enumeration instead of Monte Carlo
  double estimate = 0.0;
  double se = 0.0;
  double closed_form = 0.0;  // (theta*_e - theta_hat_e) / (1 - theta_hat_e^2)
  double abs_difference = 0.0;
  double ratio_to_delta = 0.0;
};

/**
 * Expected per-edge gradient under data generated at theta_true, evaluated
 * at theta_hat, against the single-edge closed form. n_samples = 0 switches
 * to exact enumeration (needs <= 16 leaves).
 */
GradientPopulationReport gradient_population_experiment(
    const TreeTopology& tree, const EdgeParameters& theta_true,
    const EdgeParameters& theta_hat, EdgeId edge, long n_samples, double delta,
    uint64_t seed);

struct InitSweepConfig {
  std::vector<double> delta_grid;
  long m = 100000;  // samples per repeat; 0 = exact law (needs <= 16 leaves)
  int repeats = 1;
  uint64_t seed = 1;
  int threads = 0;
  BoxShape true_box;
  BoxShape hat_box;
  FitConfig fit;  // interval/tolerance for the single sweep

  void validate() const;
};

struct InitSweepPoint {
  double delta = 0.0;
  long m = 0;
  int repeats = 0;
  double mean_error = 0.0;  // ||theta_hat_1 - theta*||_inf, averaged
  double sd_error = 0.0;    // 0 when repeats == 1
  double se_error = 0.0;
  double ratio = 0.0;       // mean_error / delta^2
};

struct InitSweepReport {
  bool population_mode = false;
  std::vector<InitSweepPoint> points;
};

/**
 * Accuracy of one coordinate sweep started from a fresh hat-box draw against
 * the generating parameters, per delta, as mean max-norm error and its ratio
 * to delta^2.
 */
InitSweepReport init_sweep_experiment(const TreeTopology& tree,
                                      const InitSweepConfig& config);

/**
 * CSV histogram of aligned biases sigma*z over [-1,1]:
 * bin_left,bin_right,count,frequency. Needs bins >= 2.
 */
void emit_histogram(std::span<const int8_t> sigma, std::span<const double> z,
                    int bins, const std::string& path);

}  // namespace cfn
