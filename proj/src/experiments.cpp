#include "cfn/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cfn/likelihood.hpp"

namespace cfn {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CFN_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(long n, int threads, const std::function<void(long)>& body) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      while (true) {
        const long i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);  // drain remaining work
    }
  };
  std::vector<std::thread> pool;
  const int k = static_cast<int>(std::min<long>(threads, n));
  pool.reserve(k);
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void ExperimentConfig::validate() const {
  if (delta_grid.empty())
    throw std::invalid_argument("experiment: delta grid is empty");
  for (double d : delta_grid) {
    if (!(d > 0.0 && d < 0.5))
      throw std::invalid_argument("experiment: delta outside (0, 1/2)");
    true_box.at(d).validate();
    hat_box.at(d).validate();
  }
  if (samples_per_point < 1)
    throw std::invalid_argument("experiment: need at least one sample per point");
}

namespace {

struct TailRows {
  std::vector<int8_t> sigma;
  std::vector<double> z;
  std::vector<ReconstructionTier> tier;
};

TailRows run_tail_point(const ExperimentTree& et, const ExperimentConfig& cfg,
                        double delta, size_t point_index) {
  const long n = cfg.samples_per_point;
  TailRows rows;
  rows.sigma.assign(n, 0);
  rows.z.assign(n, 0.0);
  rows.tier.assign(n, ReconstructionTier::kGood);
  const ParameterBox true_box = cfg.true_box.at(delta);
  const ParameterBox hat_box = cfg.hat_box.at(delta);
  EdgeParameters pinned_true, pinned_hat;
  if (cfg.fixed_pair) {
    Rng pair_rng = Rng::substream(cfg.seed, point_index, 2);
    pinned_true = sample_parameters(et.tree, true_box, pair_rng);
    pinned_hat = sample_parameters(et.tree, hat_box, pair_rng);
  }
  parallel_for(n, cfg.threads, [&](long i) {
    Rng rng = Rng::substream(cfg.seed, static_cast<uint64_t>(i), 1);
    const EdgeParameters params_true =
        cfg.fixed_pair ? pinned_true : sample_parameters(et.tree, true_box, rng);
    const EdgeParameters params_hat =
        cfg.fixed_pair ? pinned_hat : sample_parameters(et.tree, hat_box, rng);
    const SpinConfig spins = broadcast_sample(et.tree, params_true, et.view.root, rng);
    rows.sigma[i] = spins.spins[et.view.root];
    rows.z[i] = root_magnetization(et.tree, et.view, params_hat, spins);
    rows.tier[i] = classify_trichotomy(rows.sigma[i], rows.z[i], delta, cfg.constants);
  });
  return rows;
}

TierPoint summarize_point(const TailRows& rows, const ExperimentConfig& cfg,
                          double delta) {
  TierPoint p;
  p.delta = delta;
  p.n = static_cast<long>(rows.tier.size());
  for (ReconstructionTier t : rows.tier) {
    switch (t) {
      case ReconstructionTier::kGood: ++p.good; break;
      case ReconstructionTier::kModerate: ++p.moderate; break;
      case ReconstructionTier::kSevere: ++p.severe; break;
    }
  }
  const double n = static_cast<double>(p.n);
  p.freq_good = p.good / n;
  p.freq_moderate = p.moderate / n;
  p.freq_severe = p.severe / n;
  p.ci_good = wilson_interval(p.good, p.n);
  p.ci_moderate = wilson_interval(p.moderate, p.n);
  p.ci_severe = wilson_interval(p.severe, p.n);
  const TrichotomyConstants& k = cfg.constants;
  p.good_threshold = 1.0 - k.good_gap * delta * delta;
  p.severe_boundary = -k.severe_threshold;
  p.miss_bound = k.miss_rate * delta;
  p.severe_bound = k.severe_rate * delta * delta;
  p.extrapolated = delta > k.max_delta;
  return p;
}

}  // namespace

TrichotomyReport tail_experiment(const ExperimentConfig& config) {
  config.validate();
  const ExperimentTree et = experiment_tree(config.tree_kind, config.tree_size);
  TrichotomyReport report;
  for (size_t k = 0; k < config.delta_grid.size(); ++k) {
    const double delta = config.delta_grid[k];
    TailRows rows = run_tail_point(et, config, delta, k);
    report.points.push_back(summarize_point(rows, config, delta));
    if (config.keep_samples)
      report.samples.push_back(
          {delta, std::move(rows.sigma), std::move(rows.z), std::move(rows.tier)});
  }
  return report;
}

namespace {

TierSlope tier_slope(const std::vector<TierPoint>& points,
                     long TierPoint::* count, double TierPoint::* freq,
                     const char* name) {
  TierSlope out;
  std::vector<double> lx, ly;
  for (const TierPoint& p : points) {
    if (p.*count >= 10) {
      out.used_delta.push_back(p.delta);
      lx.push_back(std::log(p.delta));
      ly.push_back(std::log(p.*freq));
    } else {
      out.excluded_delta.push_back(p.delta);
    }
  }
  if (lx.size() < 2)
    throw std::runtime_error(std::string("scaling: fewer than 2 usable points for ") +
                             name + " tier");
  out.line = fit_slope(lx, ly);
  return out;
}

}  // namespace

ScalingReport scaling_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.delta_grid.size() < 3)
    throw std::invalid_argument("scaling: need at least 3 grid points");
  ExperimentConfig tally_config = config;
  tally_config.keep_samples = false;
  ScalingReport report;
  report.tally = tail_experiment(tally_config);
  report.moderate = tier_slope(report.tally.points, &TierPoint::moderate,
                               &TierPoint::freq_moderate, "moderate");
  report.severe = tier_slope(report.tally.points, &TierPoint::severe,
                             &TierPoint::freq_severe, "severe");
  return report;
}

namespace {

double pearson(std::span<const double> xs, std::span<const double> ys) {
  const double xb = mean(xs), yb = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - xb, dy = ys[i] - yb;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw std::runtime_error("correlation: a series is constant");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

IndependenceReport independence_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.samples_per_point < 2)
    throw std::invalid_argument("independence: need at least 2 replicates");
  const ExperimentTree et = experiment_tree(config.tree_kind, config.tree_size);
  const TreeTopology& tree = et.tree;

  EdgeId split = kNoEdge;
  for (EdgeId e = 0; e < tree.edge_count() && split == kNoEdge; ++e) {
    const auto [x, y] = tree.endpoints(e);
    if (descendant_subtree(tree, x, y).leaf_count() >= 2 &&
        descendant_subtree(tree, y, x).leaf_count() >= 2)
      split = e;
  }
  if (split == kNoEdge)
    throw std::invalid_argument(
        "independence: no edge with >= 2 leaves on both sides");
  const auto [u, v] = tree.endpoints(split);
  const RootedView view_u = descendant_subtree(tree, u, v);
  const RootedView view_v = descendant_subtree(tree, v, u);

  IndependenceReport report;
  const long n = config.samples_per_point;
  for (size_t k = 0; k < config.delta_grid.size(); ++k) {
    const double delta = config.delta_grid[k];
    const ParameterBox true_box = config.true_box.at(delta);
    const ParameterBox hat_box = config.hat_box.at(delta);
    EdgeParameters pinned_true, pinned_hat;
    if (config.fixed_pair) {
      Rng pair_rng = Rng::substream(config.seed, k, 2);
      pinned_true = sample_parameters(tree, true_box, pair_rng);
      pinned_hat = sample_parameters(tree, hat_box, pair_rng);
    }
    std::vector<double> aligned_u(n), aligned_v(n), sign_u(n);
    parallel_for(n, config.threads, [&](long i) {
      Rng rng = Rng::substream(config.seed, static_cast<uint64_t>(i), 1);
      const EdgeParameters params_true =
          config.fixed_pair ? pinned_true : sample_parameters(tree, true_box, rng);
      const EdgeParameters params_hat =
          config.fixed_pair ? pinned_hat : sample_parameters(tree, hat_box, rng);
      const SpinConfig spins = broadcast_sample(tree, params_true, et.view.root, rng);
      const double zu = root_magnetization(tree, view_u, params_hat, spins);
      const double zv = root_magnetization(tree, view_v, params_hat, spins);
      aligned_u[i] = spins.spins[u] * zu;
      aligned_v[i] = spins.spins[v] * zv;
      sign_u[i] = spins.spins[u];
    });
    IndependencePoint p;
    p.delta = delta;
    p.n = n;
    p.split_edge = split;
    p.root_u = u;
    p.root_v = v;
    p.corr_pair = pearson(aligned_u, aligned_v);
    p.corr_sign = pearson(aligned_u, sign_u);
    p.extrapolated = delta > config.constants.max_delta;
    report.points.push_back(p);
  }
  return report;
}

GradientPopulationReport gradient_population_experiment(
    const TreeTopology& tree, const EdgeParameters& theta_true,
    const EdgeParameters& theta_hat, EdgeId edge, long n_samples, double delta,
    uint64_t seed) {
  if (static_cast<int>(theta_true.theta.size()) != tree.edge_count() ||
      static_cast<int>(theta_hat.theta.size()) != tree.edge_count())
    throw std::invalid_argument("gradient experiment: parameter/edge count mismatch");
  if (!(delta > 0.0))
    throw std::invalid_argument("gradient experiment: delta must be > 0");
  const auto [x, y] = tree.endpoints(edge);
  const RootedView side_x = descendant_subtree(tree, x, y);
  const RootedView side_y = descendant_subtree(tree, y, x);
  const double th = theta_hat.theta[edge];

  const auto grad_of = [&](const SpinConfig& spins) {
    const double w = root_magnetization(tree, side_x, theta_hat, spins) *
                     root_magnetization(tree, side_y, theta_hat, spins);
    const double denom = 1.0 + th * w;
    if (denom <= 0.0)
      throw std::domain_error("gradient experiment: vanishing denominator");
    return w / denom;
  };

  GradientPopulationReport report;
  report.edge = edge;
  report.delta = delta;
  report.closed_form =
      population_gradient_closed_form(theta_true.theta[edge], theta_hat.theta[edge]);

  if (n_samples <= 0) {
    report.exact = true;
    const RootedView whole = whole_tree_view(tree, 0);
    const LeafDistribution law = enumerate_leaf_distribution(tree, whole, theta_true);
    double acc = 0.0;
    for (size_t k = 0; k < law.probability.size(); ++k) {
      const double p = law.probability[k];
      if (p <= 0.0) continue;
      SpinConfig pattern{SpinScope::kLeavesOnly,
                         std::vector<int8_t>(law.leaves.size(), 0)};
      for (size_t i = 0; i < law.leaves.size(); ++i)
        pattern.spins[tree.leaf_index(law.leaves[i])] =
            (k >> i) & 1 ? int8_t{1} : int8_t{-1};
      acc += p * grad_of(pattern);
    }
    report.estimate = acc;
    report.se = 0.0;
  } else {
    report.n = n_samples;
    std::vector<double> grads(n_samples);
    parallel_for(n_samples, 0, [&](long i) {
      Rng rng = Rng::substream(seed, static_cast<uint64_t>(i), 1);
      const SpinConfig spins = broadcast_sample(tree, theta_true, 0, rng);
      grads[i] = grad_of(spins);
    });
    report.estimate = mean(grads);
    report.se = sample_sd(grads) / std::sqrt(static_cast<double>(n_samples));
  }
  report.abs_difference = std::abs(report.estimate - report.closed_form);
  report.ratio_to_delta = report.abs_difference / delta;
  return report;
}

void InitSweepConfig::validate() const {
  if (delta_grid.empty()) throw std::invalid_argument("init sweep: empty delta grid");
  for (double d : delta_grid) {
    if (!(d > 0.0 && d < 0.5))
      throw std::invalid_argument("init sweep: delta outside (0, 1/2)");
    true_box.at(d).validate();
    hat_box.at(d).validate();
  }
  if (m < 0) throw std::invalid_argument("init sweep: negative sample count");
  if (repeats < 1) throw std::invalid_argument("init sweep: need repeats >= 1");
  fit.validate();
}

InitSweepReport init_sweep_experiment(const TreeTopology& tree,
                                      const InitSweepConfig& config) {
  config.validate();
  const bool population = config.m == 0;
  if (population && tree.leaf_ids().size() > 16)
    throw std::invalid_argument("init sweep: exact law needs <= 16 leaves");
  const RootedView whole = whole_tree_view(tree, 0);

  InitSweepReport report;
  report.population_mode = population;
  for (double delta : config.delta_grid) {
    const ParameterBox true_box = config.true_box.at(delta);
    const ParameterBox hat_box = config.hat_box.at(delta);
    std::vector<double> errors(config.repeats, 0.0);
    for (int r = 0; r < config.repeats; ++r) {
      Rng rng = Rng::substream(config.seed, static_cast<uint64_t>(r), 1);
      const EdgeParameters params_true = sample_parameters(tree, true_box, rng);
      const EdgeParameters start = sample_parameters(tree, hat_box, rng);

      Dataset data;
      if (population) {
        const LeafDistribution law = enumerate_leaf_distribution(tree, whole, params_true);
        for (size_t k = 0; k < law.probability.size(); ++k) {
          SpinConfig pattern{SpinScope::kLeavesOnly,
                             std::vector<int8_t>(law.leaves.size(), 0)};
          for (size_t i = 0; i < law.leaves.size(); ++i)
            pattern.spins[tree.leaf_index(law.leaves[i])] =
                (k >> i) & 1 ? int8_t{1} : int8_t{-1};
          data.samples.push_back(std::move(pattern));
          data.weights.push_back(law.probability[k]);
        }
      } else {
        data.samples.resize(config.m);
        parallel_for(config.m, config.threads, [&](long i) {
          Rng sample_rng =
              Rng::substream(config.seed, static_cast<uint64_t>(r), 3 + static_cast<uint64_t>(i));
          data.samples[i] =
              broadcast_sample(tree, params_true, 0, sample_rng).restricted_to_leaves(tree);
        });
      }
      const EdgeParameters swept = coordinate_sweep(tree, start, data, config.fit);
      double err = 0.0;
      for (size_t e = 0; e < swept.theta.size(); ++e)
        err = std::max(err, std::abs(swept.theta[e] - params_true.theta[e]));
      errors[r] = err;
    }
    InitSweepPoint point;
    point.delta = delta;
    point.m = config.m;
    point.repeats = config.repeats;
    point.mean_error = mean(errors);
    point.sd_error = config.repeats >= 2 ? sample_sd(errors) : 0.0;
    point.se_error = point.sd_error / std::sqrt(static_cast<double>(config.repeats));
    point.ratio = point.mean_error / (delta * delta);
    report.points.push_back(point);
  }
  return report;
}

void emit_histogram(std::span<const int8_t> sigma, std::span<const double> z,
                    int bins, const std::string& path) {
  if (bins < 2) throw std::invalid_argument("histogram: need at least 2 bins");
  if (sigma.size() != z.size() || sigma.empty())
    throw std::invalid_argument("histogram: need matching non-empty series");
  std::vector<long> counts(bins, 0);
  for (size_t i = 0; i < sigma.size(); ++i) {
    const double x = static_cast<double>(sigma[i]) * z[i];
    int idx = static_cast<int>(std::floor((x + 1.0) / 2.0 * bins));
    if (idx < 0) idx = 0;
    if (idx >= bins) idx = bins - 1;
    ++counts[idx];
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("histogram: cannot open " + path);
  out << "# schema_version=1\n";
  out << "bin_left,bin_right,count,frequency\n";
  const double width = 2.0 / bins;
  const double total = static_cast<double>(sigma.size());
  out.precision(12);
  for (int b = 0; b < bins; ++b) {
    out << (-1.0 + b * width) << ',' << (-1.0 + (b + 1) * width) << ',' << counts[b]
        << ',' << (counts[b] / total) << '\n';
  }
  if (!out) throw std::runtime_error("histogram: write failed for " + path);
}

}  // namespace cfn
