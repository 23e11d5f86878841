#pragma once

#include <string>

#include <json.hpp>

#include "cfn/estimator.hpp"
#include "cfn/experiments.hpp"
#include "cfn/likelihood.hpp"
#include "cfn/model.hpp"
#include "cfn/tree.hpp"

namespace cfn {

using Json = nlohmann::json;

/** Reads a whole file as JSON; throws std::runtime_error with the path. */
Json read_json_file(const std::string& path);

/** Writes pretty-printed JSON; throws std::runtime_error on I/O failure. */
void write_json_file(const std::string& path, const Json& value);

/** Debug dump: nodes with labels, edges with endpoints and theta. */
Json tree_to_json(const TreeTopology& tree, const EdgeParameters* params);

Json params_to_json(const EdgeParameters& params);
/** Expects the layout written by params_to_json; length must match `tree`. */
EdgeParameters params_from_json(const Json& value, const TreeTopology& tree);

/**
 * Leaf sample matrix CSV: header row of leaf labels (leaf_ids order), then
 * one +-1 entry per leaf per row. Weights, when present, ride in a trailing
 * `weight` column.
 */
void write_leaf_csv(const std::string& path, const TreeTopology& tree,
                    const Dataset& data);
Dataset read_leaf_csv(const std::string& path, const TreeTopology& tree);

/** Rows of sample_index, sigma_u, Z_u, tier for histogram tooling. */
void write_tail_samples_csv(const std::string& path, const TailSamples& samples);

/** Per-sample rows of sample_index, log_likelihood. */
void write_loglik_csv(const std::string& path, std::span<const double> values);

Json gradient_to_json(const GradientVector& grad);
Json fit_result_to_json(const FitResult& result);
Json trichotomy_report_to_json(const TrichotomyReport& report);
Json scaling_report_to_json(const ScalingReport& report);
Json independence_report_to_json(const IndependenceReport& report);
Json gradient_population_report_to_json(const GradientPopulationReport& report);
Json init_sweep_report_to_json(const InitSweepReport& report);

/**
 * Strict config readers: unknown keys are errors. Both accept the subset of
 * keys their struct defines; missing keys keep defaults.
 */
ExperimentConfig experiment_config_from_json(const Json& value);
InitSweepConfig init_sweep_config_from_json(const Json& value);
Json experiment_config_to_json(const ExperimentConfig& config);

}  // namespace cfn
