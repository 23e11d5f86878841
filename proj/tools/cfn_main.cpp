// Command-line front end: tree generation, simulation, magnetization,
// likelihood and gradients, branch-length fitting, and the Monte Carlo
// experiment harnesses. Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cfn/estimator.hpp"
#include "cfn/experiments.hpp"
#include "cfn/io.hpp"
#include "cfn/likelihood.hpp"
#include "cfn/magnetization.hpp"
#include "cfn/model.hpp"
#include "cfn/newick.hpp"
#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace {

using namespace cfn;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

ParsedTree load_tree(const std::string& path) { return parse_newick(read_text(path)); }

/** Emits output JSON to a file when a path is set, else to stdout. */
void deliver(const Json& value, const std::string& out_path) {
  if (out_path.empty())
    std::cout << value.dump(2) << '\n';
  else
    write_json_file(out_path, value);
}

void log_resolved(const Json& value) {
  std::cerr << "resolved config: " << value.dump() << '\n';
}

NodeId resolve_node(const TreeTopology& tree, const std::string& name) {
  const NodeId by_label = tree.find_label(name);
  if (by_label != kNoNode) return by_label;
  try {
    const int id = std::stoi(name);
    if (id >= 0 && id < tree.node_count()) return id;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("no node with label or id '" + name + "'");
}

std::vector<double> parse_delta_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

// ---- subcommand runners ----

struct GenTreeArgs {
  std::string kind = "random";
  int leaves = 8;
  int size = 3;
  uint64_t seed = 1;
  double delta = 0.1;
  double c_lo = 0.25, c_hi = 0.5;
  double fixed_theta = 0.0;  // > 0 overrides box sampling
  std::string out;
};

int run_gen_tree(const GenTreeArgs& a) {
  log_resolved({{"command", "gen-tree"},
                {"kind", a.kind},
                {"leaves", a.leaves},
                {"size", a.size},
                {"seed", a.seed},
                {"delta", a.delta},
                {"c_lo", a.c_lo},
                {"c_hi", a.c_hi},
                {"theta", a.fixed_theta}});
  TreeTopology tree = [&] {
    if (a.kind == "random") {
      Rng rng(a.seed);
      return random_binary_tree(a.leaves, rng);
    }
    return experiment_tree(experiment_tree_kind_from_name(a.kind), a.size).tree;
  }();
  EdgeParameters params;
  if (a.fixed_theta > 0.0) {
    params = EdgeParameters::constant(tree, a.fixed_theta);
  } else {
    Rng rng = Rng::substream(a.seed, 0, 0);
    params = sample_parameters(tree, ParameterBox{a.delta, a.c_lo, a.c_hi}, rng);
  }
  const std::string newick = write_newick(tree, params) + "\n";
  if (a.out.empty())
    std::cout << newick;
  else
    write_text(a.out, newick);
  return 0;
}

struct SimulateArgs {
  std::string tree_path;
  long samples = 1000;
  uint64_t seed = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  log_resolved({{"command", "simulate"},
                {"tree", a.tree_path},
                {"samples", a.samples},
                {"seed", a.seed},
                {"out", a.out}});
  const ParsedTree parsed = load_tree(a.tree_path);
  Dataset data;
  data.samples.resize(a.samples);
  parallel_for(a.samples, 0, [&](long i) {
    Rng rng = Rng::substream(a.seed, static_cast<uint64_t>(i), 1);
    data.samples[i] = broadcast_sample(parsed.tree, parsed.params, 0, rng)
                          .restricted_to_leaves(parsed.tree);
  });
  write_leaf_csv(a.out, parsed.tree, data);
  std::cerr << "wrote " << a.samples << " samples to " << a.out << '\n';
  return 0;
}

struct MagnetizeArgs {
  std::string tree_path, data_path, params_path, root, away, out;
};

int run_magnetize(const MagnetizeArgs& a) {
  log_resolved({{"command", "magnetize"},
                {"tree", a.tree_path},
                {"data", a.data_path},
                {"params", a.params_path},
                {"root", a.root},
                {"away", a.away}});
  const ParsedTree parsed = load_tree(a.tree_path);
  const EdgeParameters params =
      a.params_path.empty()
          ? parsed.params
          : params_from_json(read_json_file(a.params_path), parsed.tree);
  const Dataset data = read_leaf_csv(a.data_path, parsed.tree);
  const NodeId root = resolve_node(parsed.tree, a.root);
  const RootedView view =
      a.away.empty()
          ? whole_tree_view(parsed.tree, root)
          : descendant_subtree(parsed.tree, root, resolve_node(parsed.tree, a.away));
  std::ostringstream out;
  out << "# schema_version=1\nsample_index,z_root\n";
  out.precision(17);
  for (size_t i = 0; i < data.samples.size(); ++i)
    out << i << ','
        << root_magnetization(parsed.tree, view, params, data.samples[i]) << '\n';
  if (a.out.empty())
    std::cout << out.str();
  else
    write_text(a.out, out.str());
  return 0;
}

struct LoglikArgs {
  std::string tree_path, data_path, params_path, per_sample_out;
};

int run_loglik(const LoglikArgs& a) {
  log_resolved({{"command", "loglik"},
                {"tree", a.tree_path},
                {"data", a.data_path},
                {"params", a.params_path}});
  const ParsedTree parsed = load_tree(a.tree_path);
  const EdgeParameters params =
      a.params_path.empty()
          ? parsed.params
          : params_from_json(read_json_file(a.params_path), parsed.tree);
  const Dataset data = read_leaf_csv(a.data_path, parsed.tree);
  if (!a.per_sample_out.empty()) {
    std::vector<double> values;
    values.reserve(data.size());
    for (const SpinConfig& s : data.samples)
      values.push_back(log_likelihood(parsed.tree, params, s));
    write_loglik_csv(a.per_sample_out, values);
  }
  std::cout.precision(17);
  std::cout << log_likelihood_dataset(parsed.tree, params, data) << '\n';
  return 0;
}

struct GradArgs {
  std::string tree_path, data_path, params_path, out;
};

int run_grad(const GradArgs& a) {
  log_resolved({{"command", "grad"},
                {"tree", a.tree_path},
                {"data", a.data_path},
                {"params", a.params_path}});
  const ParsedTree parsed = load_tree(a.tree_path);
  const EdgeParameters params =
      a.params_path.empty()
          ? parsed.params
          : params_from_json(read_json_file(a.params_path), parsed.tree);
  const Dataset data = read_leaf_csv(a.data_path, parsed.tree);
  deliver(gradient_to_json(grad_all_dataset(parsed.tree, params, data)), a.out);
  return 0;
}

struct FitArgs {
  std::string tree_path, data_path, init_path, out, out_newick;
  FitConfig config;
};

int run_fit(const FitArgs& a) {
  log_resolved({{"command", "fit"},
                {"tree", a.tree_path},
                {"data", a.data_path},
                {"init", a.init_path},
                {"theta_min", a.config.theta_min},
                {"theta_max", a.config.theta_max},
                {"root_tolerance", a.config.root_tolerance},
                {"max_sweeps", a.config.max_sweeps},
                {"convergence_threshold", a.config.convergence_threshold},
                {"incremental", a.config.incremental_messages}});
  const ParsedTree parsed = load_tree(a.tree_path);
  const EdgeParameters init =
      a.init_path.empty() ? parsed.params
                          : params_from_json(read_json_file(a.init_path), parsed.tree);
  const Dataset data = read_leaf_csv(a.data_path, parsed.tree);
  const FitResult result = fit(parsed.tree, data, init, a.config);
  if (!a.out_newick.empty())
    write_text(a.out_newick, write_newick(parsed.tree, result.params) + "\n");
  deliver(fit_result_to_json(result), a.out);
  return 0;
}

struct ExperimentArgs {
  std::string config_path, out, samples_out, histogram_out;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<long> samples;
  std::optional<std::string> deltas;
  std::optional<std::string> tree_kind;
  std::optional<int> tree_size;
  bool fixed_pair = false;
  bool keep_samples = false;
};

ExperimentConfig resolve_experiment_config(const ExperimentArgs& a) {
  ExperimentConfig config;
  if (!a.config_path.empty())
    config = experiment_config_from_json(read_json_file(a.config_path));
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = *a.threads;
  if (a.samples) config.samples_per_point = *a.samples;
  if (a.deltas) config.delta_grid = parse_delta_list(*a.deltas);
  if (a.tree_kind) config.tree_kind = experiment_tree_kind_from_name(*a.tree_kind);
  if (a.tree_size) config.tree_size = *a.tree_size;
  if (a.fixed_pair) config.fixed_pair = true;
  if (a.keep_samples || !a.samples_out.empty() || !a.histogram_out.empty())
    config.keep_samples = true;
  log_resolved(experiment_config_to_json(config));
  return config;
}

int run_experiment_tail(const ExperimentArgs& a) {
  const ExperimentConfig config = resolve_experiment_config(a);
  const TrichotomyReport report = tail_experiment(config);
  if (!a.samples_out.empty())
    for (size_t k = 0; k < report.samples.size(); ++k)
      write_tail_samples_csv(a.samples_out + (report.samples.size() > 1
                                                  ? "." + std::to_string(k)
                                                  : ""),
                             report.samples[k]);
  if (!a.histogram_out.empty())
    for (size_t k = 0; k < report.samples.size(); ++k)
      emit_histogram(report.samples[k].sigma, report.samples[k].z, 400,
                     a.histogram_out +
                         (report.samples.size() > 1 ? "." + std::to_string(k) : ""));
  deliver(trichotomy_report_to_json(report), a.out);
  return 0;
}

int run_experiment_scaling(const ExperimentArgs& a) {
  const ExperimentConfig config = resolve_experiment_config(a);
  deliver(scaling_report_to_json(scaling_experiment(config)), a.out);
  return 0;
}

int run_experiment_independence(const ExperimentArgs& a) {
  const ExperimentConfig config = resolve_experiment_config(a);
  deliver(independence_report_to_json(independence_experiment(config)), a.out);
  return 0;
}

struct GradientExperimentArgs {
  std::string tree_path, hat_path, out;
  EdgeId edge = 0;
  long samples = 200000;
  double delta = 0.1;
  uint64_t seed = 1;
};

int run_experiment_gradient(const GradientExperimentArgs& a) {
  log_resolved({{"command", "experiment gradient"},
                {"tree", a.tree_path},
                {"hat", a.hat_path},
                {"edge", a.edge},
                {"samples", a.samples},
                {"delta", a.delta},
                {"seed", a.seed}});
  const ParsedTree truth = load_tree(a.tree_path);
  EdgeParameters hat = truth.params;
  if (!a.hat_path.empty()) {
    const ParsedTree hat_tree = load_tree(a.hat_path);
    if (hat_tree.tree.edge_count() != truth.tree.edge_count())
      throw std::runtime_error("hat tree does not match the true tree's edge count");
    hat = hat_tree.params;
  }
  deliver(gradient_population_report_to_json(gradient_population_experiment(
              truth.tree, truth.params, hat, a.edge, a.samples, a.delta, a.seed)),
          a.out);
  return 0;
}

struct InitSweepArgs {
  std::string config_path, tree_path, tree_kind = "complete", out;
  int tree_size = 3;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<long> m;
  std::optional<std::string> deltas;
  std::optional<int> repeats;
};

int run_experiment_init_sweep(const InitSweepArgs& a) {
  InitSweepConfig config;
  if (!a.config_path.empty())
    config = init_sweep_config_from_json(read_json_file(a.config_path));
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = *a.threads;
  if (a.m) config.m = *a.m;
  if (a.deltas) config.delta_grid = parse_delta_list(*a.deltas);
  if (a.repeats) config.repeats = *a.repeats;
  log_resolved({{"command", "experiment init-sweep"},
                {"tree", a.tree_path.empty() ? a.tree_kind + "-" +
                                                   std::to_string(a.tree_size)
                                             : a.tree_path},
                {"m", config.m},
                {"repeats", config.repeats},
                {"seed", config.seed},
                {"delta_grid", config.delta_grid}});
  const TreeTopology tree =
      a.tree_path.empty()
          ? experiment_tree(experiment_tree_kind_from_name(a.tree_kind), a.tree_size)
                .tree
          : load_tree(a.tree_path).tree;
  deliver(init_sweep_report_to_json(init_sweep_experiment(tree, config)), a.out);
  return 0;
}

struct HistogramArgs {
  std::string input, out;
  int bins = 400;
};

int run_histogram(const HistogramArgs& a) {
  log_resolved({{"command", "histogram"},
                {"input", a.input},
                {"bins", a.bins},
                {"out", a.out}});
  std::ifstream in(a.input);
  if (!in) throw std::runtime_error("cannot open: " + a.input);
  std::string line;
  std::vector<int8_t> sigma;
  std::vector<double> z;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != "sample_index,sigma_u,z_u,tier")
        throw std::runtime_error(a.input + ": expected tail samples CSV header");
      seen_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // sample_index, unused
    std::getline(row, cell, ',');
    sigma.push_back(static_cast<int8_t>(std::stoi(cell)));
    std::getline(row, cell, ',');
    z.push_back(std::stod(cell));
  }
  if (sigma.empty()) throw std::runtime_error(a.input + ": no data rows");
  emit_histogram(sigma, z, a.bins, a.out);
  std::cerr << "wrote " << a.bins << "-bin histogram of " << sigma.size()
            << " rows to " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast-model toolkit: magnetization, likelihood, fitting, "
               "and tail experiments on binary trees"};
  app.require_subcommand(1);

  GenTreeArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-tree", "Generate a tree as Newick");
  gen_cmd->add_option("--kind", gen.kind, "random|complete|caterpillar|balanced")
      ->default_val("random");
  gen_cmd->add_option("--leaves", gen.leaves, "Leaf count for random trees");
  gen_cmd->add_option("--size", gen.size, "Depth (complete) or leaf count");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--delta", gen.delta, "Box scale for edge sampling");
  gen_cmd->add_option("--c-lo", gen.c_lo, "Box lower coefficient");
  gen_cmd->add_option("--c-hi", gen.c_hi, "Box upper coefficient");
  gen_cmd->add_option("--theta", gen.fixed_theta, "Constant theta (overrides box)");
  gen_cmd->add_option("-o,--out", gen.out, "Output path (default stdout)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Broadcast leaf samples to CSV");
  sim_cmd->add_option("--tree", sim.tree_path, "Newick input")->required();
  sim_cmd->add_option("--samples", sim.samples, "Number of samples");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("-o,--out", sim.out, "Output CSV")->required();

  MagnetizeArgs mag;
  auto* mag_cmd =
      app.add_subcommand("magnetize", "Per-sample posterior root bias");
  mag_cmd->add_option("--tree", mag.tree_path, "Newick input")->required();
  mag_cmd->add_option("--data", mag.data_path, "Leaf sample CSV")->required();
  mag_cmd->add_option("--params", mag.params_path,
                      "Evaluation parameters JSON (default: tree lengths)");
  mag_cmd->add_option("--root", mag.root, "Root node label or id")->required();
  mag_cmd->add_option("--away", mag.away,
                      "Adjacent node; restricts to the descendant subtree");
  mag_cmd->add_option("-o,--out", mag.out, "Output CSV (default stdout)");

  LoglikArgs ll;
  auto* ll_cmd = app.add_subcommand("loglik", "Dataset mean log-likelihood");
  ll_cmd->add_option("--tree", ll.tree_path, "Newick input")->required();
  ll_cmd->add_option("--data", ll.data_path, "Leaf sample CSV")->required();
  ll_cmd->add_option("--params", ll.params_path, "Parameters JSON override");
  ll_cmd->add_option("--per-sample", ll.per_sample_out, "Per-sample CSV path");

  GradArgs gr;
  auto* gr_cmd = app.add_subcommand("grad", "Dataset mean gradient as JSON");
  gr_cmd->add_option("--tree", gr.tree_path, "Newick input")->required();
  gr_cmd->add_option("--data", gr.data_path, "Leaf sample CSV")->required();
  gr_cmd->add_option("--params", gr.params_path, "Parameters JSON override");
  gr_cmd->add_option("-o,--out", gr.out, "Output path (default stdout)");

  FitArgs ft;
  auto* ft_cmd = app.add_subcommand("fit", "Branch-length fit by coordinate sweeps");
  ft_cmd->add_option("--tree", ft.tree_path, "Newick input")->required();
  ft_cmd->add_option("--data", ft.data_path, "Leaf sample CSV")->required();
  ft_cmd->add_option("--init", ft.init_path,
                     "Initial parameters JSON (default: tree lengths)");
  ft_cmd->add_option("--theta-min", ft.config.theta_min, "Search interval lower end");
  ft_cmd->add_option("--theta-max", ft.config.theta_max, "Search interval upper end");
  ft_cmd->add_option("--root-tolerance", ft.config.root_tolerance,
                     "Bisection tolerance");
  ft_cmd->add_option("--max-sweeps", ft.config.max_sweeps, "Sweep budget");
  ft_cmd->add_option("--convergence-threshold", ft.config.convergence_threshold,
                     "Max-abs change declaring convergence");
  ft_cmd->add_flag("--incremental", ft.config.incremental_messages,
                   "Cached-message sweeps (identical results)");
  ft_cmd->add_option("-o,--out", ft.out, "FitResult JSON path (default stdout)");
  ft_cmd->add_option("--out-newick", ft.out_newick, "Write fitted tree here");

  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo harnesses");
  exp_cmd->require_subcommand(1);

  ExperimentArgs tail_args;
  auto* tail_cmd = exp_cmd->add_subcommand("tail", "Trichotomy tail tally");
  ExperimentArgs scaling_args;
  auto* scaling_cmd =
      exp_cmd->add_subcommand("scaling", "Failure-tier order-of-magnitude fit");
  ExperimentArgs indep_args;
  auto* indep_cmd =
      exp_cmd->add_subcommand("independence", "Split-subtree correlation check");
  for (auto [cmd, args] : {std::pair{tail_cmd, &tail_args},
                           std::pair{scaling_cmd, &scaling_args},
                           std::pair{indep_cmd, &indep_args}}) {
    cmd->add_option("--config", args->config_path, "Config JSON path");
    cmd->add_option("--seed", args->seed, "Master seed override");
    cmd->add_option("--threads", args->threads, "Worker count override");
    cmd->add_option("--samples", args->samples, "Replicates per point override");
    cmd->add_option("--deltas", args->deltas, "Comma-separated delta grid");
    cmd->add_option("--tree-kind", args->tree_kind,
                    "complete|caterpillar|balanced");
    cmd->add_option("--tree-size", args->tree_size, "Depth or leaf count");
    cmd->add_flag("--fixed-pair", args->fixed_pair,
                  "One (true, hat) parameter draw per point");
    cmd->add_option("-o,--out", args->out, "Report JSON path (default stdout)");
  }
  tail_cmd->add_flag("--keep-samples", tail_args.keep_samples,
                     "Retain per-replicate rows in memory");
  tail_cmd->add_option("--samples-out", tail_args.samples_out,
                       "Per-replicate CSV path (per point: suffix .k)");
  tail_cmd->add_option("--histogram-out", tail_args.histogram_out,
                       "400-bin histogram CSV path (per point: suffix .k)");

  GradientExperimentArgs grad_args;
  auto* grad_exp_cmd =
      exp_cmd->add_subcommand("gradient", "Population gradient vs closed form");
  grad_exp_cmd->add_option("--tree", grad_args.tree_path, "Newick with true lengths")
      ->required();
  grad_exp_cmd->add_option("--hat", grad_args.hat_path,
                           "Newick with evaluation lengths (default: --tree)");
  grad_exp_cmd->add_option("--edge", grad_args.edge, "Edge id under test");
  grad_exp_cmd->add_option("--samples", grad_args.samples,
                           "Monte Carlo replicates; 0 = exact enumeration");
  grad_exp_cmd->add_option("--delta", grad_args.delta, "Scale for the ratio column");
  grad_exp_cmd->add_option("--seed", grad_args.seed, "Master seed");
  grad_exp_cmd->add_option("-o,--out", grad_args.out, "Report JSON path");

  InitSweepArgs init_args;
  auto* init_cmd =
      exp_cmd->add_subcommand("init-sweep", "One-sweep estimation accuracy");
  init_cmd->add_option("--config", init_args.config_path, "Config JSON path");
  init_cmd->add_option("--tree", init_args.tree_path, "Newick topology input");
  init_cmd->add_option("--tree-kind", init_args.tree_kind,
                       "complete|caterpillar|balanced");
  init_cmd->add_option("--tree-size", init_args.tree_size, "Depth or leaf count");
  init_cmd->add_option("--seed", init_args.seed, "Master seed override");
  init_cmd->add_option("--threads", init_args.threads, "Worker count override");
  init_cmd->add_option("--m", init_args.m, "Samples per repeat; 0 = exact law");
  init_cmd->add_option("--deltas", init_args.deltas, "Comma-separated delta grid");
  init_cmd->add_option("--repeats", init_args.repeats, "Repeats per point");
  init_cmd->add_option("-o,--out", init_args.out, "Report JSON path");

  HistogramArgs hist;
  auto* hist_cmd =
      app.add_subcommand("histogram", "Bin a tail-samples CSV into a histogram");
  hist_cmd->add_option("--input", hist.input, "Tail samples CSV")->required();
  hist_cmd->add_option("--bins", hist.bins, "Bin count");
  hist_cmd->add_option("-o,--out", hist.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_tree(gen);
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (mag_cmd->parsed()) return run_magnetize(mag);
    if (ll_cmd->parsed()) return run_loglik(ll);
    if (gr_cmd->parsed()) return run_grad(gr);
    if (ft_cmd->parsed()) return run_fit(ft);
    if (exp_cmd->parsed()) {
      if (tail_cmd->parsed()) return run_experiment_tail(tail_args);
      if (scaling_cmd->parsed()) return run_experiment_scaling(scaling_args);
      if (indep_cmd->parsed()) return run_experiment_independence(indep_args);
      if (grad_exp_cmd->parsed()) return run_experiment_gradient(grad_args);
      if (init_cmd->parsed()) return run_experiment_init_sweep(init_args);
    }
    if (hist_cmd->parsed()) return run_histogram(hist);
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
