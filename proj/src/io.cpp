#include "cfn/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cfn {

namespace {

constexpr int kSchemaVersion = 1;

void require_keys(const Json& value, const std::set<std::string>& allowed,
                  const char* what) {
  if (!value.is_object())
    throw std::runtime_error(std::string(what) + ": expected a JSON object");
  for (const auto& [key, _] : value.items())
    if (!allowed.count(key))
      throw std::runtime_error(std::string(what) + ": unknown key '" + key + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Json value;
  try {
    in >> value;
  } catch (const Json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return value;
}

void write_json_file(const std::string& path, const Json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json tree_to_json(const TreeTopology& tree, const EdgeParameters* params) {
  Json nodes = Json::array();
  for (NodeId v = 0; v < tree.node_count(); ++v)
    nodes.push_back({{"id", v},
                     {"label", tree.label(v)},
                     {"degree", tree.degree(v)},
                     {"leaf", tree.is_leaf(v)}});
  Json edges = Json::array();
  for (EdgeId e = 0; e < tree.edge_count(); ++e) {
    const auto [a, b] = tree.endpoints(e);
    Json row = {{"id", e}, {"ends", {a, b}}};
    if (params) row["theta"] = params->theta[e];
    edges.push_back(row);
  }
  return {{"schema_version", kSchemaVersion}, {"nodes", nodes}, {"edges", edges}};
}

Json params_to_json(const EdgeParameters& params) {
  return {{"schema_version", kSchemaVersion}, {"theta", params.theta}};
}

EdgeParameters params_from_json(const Json& value, const TreeTopology& tree) {
  if (!value.is_object() || !value.contains("theta"))
    throw std::runtime_error("parameter JSON: missing 'theta' array");
  EdgeParameters out;
  out.theta = value.at("theta").get<std::vector<double>>();
  if (static_cast<int>(out.theta.size()) != tree.edge_count())
    throw std::runtime_error("parameter JSON: expected " +
                             std::to_string(tree.edge_count()) + " values, got " +
                             std::to_string(out.theta.size()));
  return out;
}

void write_leaf_csv(const std::string& path, const TreeTopology& tree,
                    const Dataset& data) {
  auto out = open_out(path);
  out << "# schema_version=" << kSchemaVersion << '\n';
  const auto& leaves = tree.leaf_ids();
  for (size_t i = 0; i < leaves.size(); ++i)
    out << (i ? "," : "") << tree.label(leaves[i]);
  if (!data.weights.empty()) out << ",weight";
  out << '\n';
  out.precision(17);
  for (size_t r = 0; r < data.samples.size(); ++r) {
    const SpinConfig& row = data.samples[r];
    for (size_t i = 0; i < leaves.size(); ++i)
      out << (i ? "," : "") << static_cast<int>(leaf_spin(tree, row, leaves[i]));
    if (!data.weights.empty()) out << ',' << data.weights[r];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset read_leaf_csv(const std::string& path, const TreeTopology& tree) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  size_t line_no = 0;
  // Header (after optional # comments): leaf labels in leaf_ids order.
  do {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
  } while (!line.empty() && line[0] == '#');
  const auto header = split_csv(line);
  const auto& leaves = tree.leaf_ids();
  const bool has_weights = !header.empty() && header.back() == "weight";
  const size_t n_cols = header.size() - (has_weights ? 1 : 0);
  if (n_cols != leaves.size())
    throw std::runtime_error(path + ": header has " + std::to_string(n_cols) +
                             " leaf columns, tree has " +
                             std::to_string(leaves.size()));
  for (size_t i = 0; i < leaves.size(); ++i)
    if (header[i] != tree.label(leaves[i]))
      throw std::runtime_error(path + ": header column " + std::to_string(i + 1) +
                               " is '" + header[i] + "', expected leaf label '" +
                               tree.label(leaves[i]) + "'");
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": wrong column count");
    SpinConfig row{SpinScope::kLeavesOnly, {}};
    row.spins.reserve(leaves.size());
    for (size_t i = 0; i < leaves.size(); ++i) {
      if (cells[i] == "1" || cells[i] == "+1")
        row.spins.push_back(1);
      else if (cells[i] == "-1")
        row.spins.push_back(-1);
      else
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": entries must be +-1, got '" + cells[i] + "'");
    }
    data.samples.push_back(std::move(row));
    if (has_weights) data.weights.push_back(std::stod(cells.back()));
  }
  if (data.samples.empty()) throw std::runtime_error(path + ": no sample rows");
  return data;
}

void write_tail_samples_csv(const std::string& path, const TailSamples& samples) {
  auto out = open_out(path);
  out << "# schema_version=" << kSchemaVersion << '\n';
  out << "sample_index,sigma_u,z_u,tier\n";
  out.precision(17);
  for (size_t i = 0; i < samples.z.size(); ++i)
    out << i << ',' << static_cast<int>(samples.sigma[i]) << ',' << samples.z[i]
        << ',' << to_string(samples.tier[i]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_loglik_csv(const std::string& path, std::span<const double> values) {
  auto out = open_out(path);
  out << "# schema_version=" << kSchemaVersion << '\n';
  out << "sample_index,log_likelihood\n";
  out.precision(17);
  for (size_t i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Json gradient_to_json(const GradientVector& grad) {
  Json entries = Json::array();
  for (size_t e = 0; e < grad.size(); ++e)
    entries.push_back({{"edge", e}, {"value", grad[e]}});
  return {{"schema_version", kSchemaVersion}, {"gradient", entries}};
}

Json fit_result_to_json(const FitResult& result) {
  return {{"schema_version", kSchemaVersion},
          {"theta", result.params.theta},
          {"sweep_max_change", result.sweep_max_change},
          {"sweep_log_likelihood", result.sweep_log_likelihood},
          {"sweeps", result.sweep_max_change.size()},
          {"reason", to_string(result.reason)}};
}

namespace {

Json interval_to_json(const ConfidenceInterval& ci) {
  return {{"lo", ci.lo}, {"hi", ci.hi}};
}

Json tier_point_to_json(const TierPoint& p) {
  return {{"delta", p.delta},
          {"n", p.n},
          {"counts", {{"good", p.good}, {"moderate", p.moderate}, {"severe", p.severe}}},
          {"freq", {{"good", p.freq_good}, {"moderate", p.freq_moderate}, {"severe", p.freq_severe}}},
          {"wilson95",
           {{"good", interval_to_json(p.ci_good)},
            {"moderate", interval_to_json(p.ci_moderate)},
            {"severe", interval_to_json(p.ci_severe)}}},
          {"good_threshold", p.good_threshold},
          {"severe_boundary", p.severe_boundary},
          {"miss_bound", p.miss_bound},
          {"severe_bound", p.severe_bound},
          {"regime", p.extrapolated ? "extrapolated" : "strict"}};
}

Json slope_to_json(const TierSlope& s) {
  return {{"slope", s.line.slope},
          {"stderr", s.line.se},
          {"points", s.line.points},
          {"used_delta", s.used_delta},
          {"excluded_delta", s.excluded_delta}};
}

}  // namespace

Json trichotomy_report_to_json(const TrichotomyReport& report) {
  Json points = Json::array();
  for (const TierPoint& p : report.points) points.push_back(tier_point_to_json(p));
  return {{"schema_version", kSchemaVersion}, {"points", points}};
}

Json scaling_report_to_json(const ScalingReport& report) {
  Json points = Json::array();
  for (const TierPoint& p : report.tally.points)
    points.push_back(tier_point_to_json(p));
  return {{"schema_version", kSchemaVersion},
          {"points", points},
          {"moderate", slope_to_json(report.moderate)},
          {"severe", slope_to_json(report.severe)}};
}

Json independence_report_to_json(const IndependenceReport& report) {
  Json points = Json::array();
  for (const IndependencePoint& p : report.points)
    points.push_back({{"delta", p.delta},
                      {"n", p.n},
                      {"split_edge", p.split_edge},
                      {"root_u", p.root_u},
                      {"root_v", p.root_v},
                      {"corr_pair", p.corr_pair},
                      {"corr_sign", p.corr_sign},
                      {"regime", p.extrapolated ? "extrapolated" : "strict"}});
  return {{"schema_version", kSchemaVersion}, {"points", points}};
}

Json gradient_population_report_to_json(const GradientPopulationReport& report) {
  return {{"schema_version", kSchemaVersion},
          {"edge", report.edge},
          {"delta", report.delta},
          {"mode", report.exact ? "exact" : "monte-carlo"},
          {"n", report.n},
          {"estimate", report.estimate},
          {"se", report.se},
          {"closed_form", report.closed_form},
          {"abs_difference", report.abs_difference},
          {"ratio_to_delta", report.ratio_to_delta}};
}

Json init_sweep_report_to_json(const InitSweepReport& report) {
  Json points = Json::array();
  for (const InitSweepPoint& p : report.points)
    points.push_back({{"delta", p.delta},
                      {"m", p.m},
                      {"repeats", p.repeats},
                      {"mean_error", p.mean_error},
                      {"sd_error", p.sd_error},
                      {"se_error", p.se_error},
                      {"ratio_to_delta_sq", p.ratio}});
  return {{"schema_version", kSchemaVersion},
          {"mode", report.population_mode ? "population" : "sampled"},
          {"points", points}};
}

namespace {

void read_box(const Json& value, const char* what, BoxShape& into) {
  require_keys(value, {"c_lo", "c_hi"}, what);
  if (value.contains("c_lo")) into.c_lo = value.at("c_lo").get<double>();
  if (value.contains("c_hi")) into.c_hi = value.at("c_hi").get<double>();
}

void read_tree_spec(const Json& value, ExperimentTreeKind& kind, int& size) {
  require_keys(value, {"kind", "size"}, "tree");
  if (value.contains("kind"))
    kind = experiment_tree_kind_from_name(value.at("kind").get<std::string>());
  if (value.contains("size")) size = value.at("size").get<int>();
}

void read_fit_config(const Json& value, FitConfig& into) {
  require_keys(value,
               {"theta_min", "theta_max", "root_tolerance", "max_sweeps",
                "convergence_threshold", "incremental_messages"},
               "fit");
  if (value.contains("theta_min")) into.theta_min = value.at("theta_min").get<double>();
  if (value.contains("theta_max")) into.theta_max = value.at("theta_max").get<double>();
  if (value.contains("root_tolerance"))
    into.root_tolerance = value.at("root_tolerance").get<double>();
  if (value.contains("max_sweeps")) into.max_sweeps = value.at("max_sweeps").get<int>();
  if (value.contains("convergence_threshold"))
    into.convergence_threshold = value.at("convergence_threshold").get<double>();
  if (value.contains("incremental_messages"))
    into.incremental_messages = value.at("incremental_messages").get<bool>();
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& value) {
  require_keys(value,
               {"tree", "delta_grid", "true_box", "hat_box", "samples_per_point",
                "seed", "threads", "fixed_pair", "keep_samples"},
               "experiment config");
  ExperimentConfig config;
  if (value.contains("tree"))
    read_tree_spec(value.at("tree"), config.tree_kind, config.tree_size);
  if (value.contains("delta_grid"))
    config.delta_grid = value.at("delta_grid").get<std::vector<double>>();
  if (value.contains("true_box")) read_box(value.at("true_box"), "true_box", config.true_box);
  if (value.contains("hat_box")) read_box(value.at("hat_box"), "hat_box", config.hat_box);
  if (value.contains("samples_per_point"))
    config.samples_per_point = value.at("samples_per_point").get<long>();
  if (value.contains("seed")) config.seed = value.at("seed").get<uint64_t>();
  if (value.contains("threads")) config.threads = value.at("threads").get<int>();
  if (value.contains("fixed_pair")) config.fixed_pair = value.at("fixed_pair").get<bool>();
  if (value.contains("keep_samples"))
    config.keep_samples = value.at("keep_samples").get<bool>();
  return config;
}

InitSweepConfig init_sweep_config_from_json(const Json& value) {
  require_keys(value,
               {"delta_grid", "m", "repeats", "seed", "threads", "true_box",
                "hat_box", "fit"},
               "init sweep config");
  InitSweepConfig config;
  if (value.contains("delta_grid"))
    config.delta_grid = value.at("delta_grid").get<std::vector<double>>();
  if (value.contains("m")) config.m = value.at("m").get<long>();
  if (value.contains("repeats")) config.repeats = value.at("repeats").get<int>();
  if (value.contains("seed")) config.seed = value.at("seed").get<uint64_t>();
  if (value.contains("threads")) config.threads = value.at("threads").get<int>();
  if (value.contains("true_box")) read_box(value.at("true_box"), "true_box", config.true_box);
  if (value.contains("hat_box")) read_box(value.at("hat_box"), "hat_box", config.hat_box);
  if (value.contains("fit")) read_fit_config(value.at("fit"), config.fit);
  return config;
}

Json experiment_config_to_json(const ExperimentConfig& config) {
  return {{"schema_version", kSchemaVersion},
          {"tree", {{"kind", to_string(config.tree_kind)}, {"size", config.tree_size}}},
          {"delta_grid", config.delta_grid},
          {"true_box", {{"c_lo", config.true_box.c_lo}, {"c_hi", config.true_box.c_hi}}},
          {"hat_box", {{"c_lo", config.hat_box.c_lo}, {"c_hi", config.hat_box.c_hi}}},
          {"samples_per_point", config.samples_per_point},
          {"seed", config.seed},
          {"threads", config.threads},
          {"fixed_pair", config.fixed_pair},
          {"keep_samples", config.keep_samples}};
}

}  // namespace cfn
