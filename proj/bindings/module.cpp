// Python bindings for the broadcast-model toolkit. Scalar/list interfaces
// mirror the C++ API; experiment entry points exchange JSON strings so the
// Python wrapper can expose plain dicts without duplicating the report
// schemas here.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfn/estimator.hpp"
#include "cfn/experiments.hpp"
#include "cfn/io.hpp"
#include "cfn/likelihood.hpp"
#include "cfn/magnetization.hpp"
#include "cfn/model.hpp"
#include "cfn/newick.hpp"
#include "cfn/rng.hpp"
#include "cfn/tree.hpp"

namespace py = pybind11;
using namespace cfn;

namespace {

EdgeParameters to_params(const TreeTopology& tree, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != tree.edge_count())
    throw std::invalid_argument("theta list length must equal the edge count");
  return EdgeParameters{theta};
}

SpinConfig to_leaf_config(const TreeTopology& tree, const std::vector<int>& spins) {
  if (spins.size() != tree.leaf_ids().size())
    throw std::invalid_argument("spin list length must equal the leaf count");
  SpinConfig config;
  config.scope = SpinScope::kLeavesOnly;
  config.spins.reserve(spins.size());
  for (int s : spins) {
    if (s != 1 && s != -1) throw std::invalid_argument("spins must be +1 or -1");
    config.spins.push_back(static_cast<int8_t>(s));
  }
  return config;
}

Dataset to_dataset(const TreeTopology& tree,
                   const std::vector<std::vector<int>>& samples) {
  Dataset data;
  data.samples.reserve(samples.size());
  for (const auto& row : samples) data.samples.push_back(to_leaf_config(tree, row));
  return data;
}

RootedView make_view(const TreeTopology& tree, NodeId root,
                     std::optional<NodeId> away) {
  return away ? descendant_subtree(tree, root, *away) : whole_tree_view(tree, root);
}

py::dict constants_dict(const TrichotomyConstants& k) {
  py::dict out;
  out["good_gap"] = k.good_gap;
  out["miss_rate"] = k.miss_rate;
  out["severe_threshold"] = k.severe_threshold;
  out["severe_rate"] = k.severe_rate;
  out["max_delta"] = k.max_delta;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Broadcast-model magnetization, likelihood, and fitting on binary trees";

  py::class_<TreeTopology>(m, "Tree")
      .def_property_readonly("node_count", &TreeTopology::node_count)
      .def_property_readonly("edge_count", &TreeTopology::edge_count)
      .def_property_readonly("leaf_count",
                             [](const TreeTopology& t) {
                               return static_cast<int>(t.leaf_ids().size());
                             })
      .def_property_readonly("leaf_ids", &TreeTopology::leaf_ids)
      .def_property_readonly("leaf_labels",
                             [](const TreeTopology& t) {
                               std::vector<std::string> out;
                               for (NodeId v : t.leaf_ids()) out.push_back(t.label(v));
                               return out;
                             })
      .def("label", &TreeTopology::label)
      .def("find_label", &TreeTopology::find_label)
      .def("degree", &TreeTopology::degree)
      .def("is_leaf", &TreeTopology::is_leaf)
      .def("endpoints", &TreeTopology::endpoints)
      .def("edge_between", &TreeTopology::edge_between)
      .def("neighbors",
           [](const TreeTopology& t, NodeId v) {
             std::vector<std::pair<NodeId, EdgeId>> out;
             for (const Halfedge& h : t.neighbors(v))
               out.emplace_back(h.neighbor, h.edge);
             return out;
           })
      .def("__repr__", [](const TreeTopology& t) {
        return "<Tree with " + std::to_string(t.node_count()) + " nodes, " +
               std::to_string(t.leaf_ids().size()) + " leaves>";
      });

  m.def("parse_newick", [](const std::string& text) {
    ParsedTree parsed = parse_newick(text);
    return py::make_tuple(parsed.tree, parsed.params.theta);
  });
  m.def("write_newick",
        [](const TreeTopology& tree, const std::vector<double>& theta) {
          return write_newick(tree, to_params(tree, theta));
        });
  m.def("random_tree",
        [](int n_leaves, uint64_t seed) {
          Rng rng(seed);
          return random_binary_tree(n_leaves, rng);
        },
        py::arg("n_leaves"), py::arg("seed") = 1);
  m.def("experiment_tree", [](const std::string& kind, int size) {
    ExperimentTree et = experiment_tree(experiment_tree_kind_from_name(kind), size);
    return py::make_tuple(et.tree, et.view.root);
  });

  m.def("convert_edge_value",
        [](double value, const std::string& from, const std::string& to) {
          auto scale = [](const std::string& name) {
            if (name == "theta") return EdgeScale::kTheta;
            if (name == "flip_probability") return EdgeScale::kFlipProbability;
            if (name == "length") return EdgeScale::kLength;
            throw std::invalid_argument("unknown scale: " + name);
          };
          return convert_edge_value(value, scale(from), scale(to));
        });

  m.def("sample_box_parameters",
        [](const TreeTopology& tree, double delta, double c_lo, double c_hi,
           uint64_t seed) {
          const ParameterBox box{delta, c_lo, c_hi};
          Rng rng(seed);
          return sample_parameters(tree, box, rng).theta;
        },
        py::arg("tree"), py::arg("delta"), py::arg("c_lo") = 0.25,
        py::arg("c_hi") = 0.5, py::arg("seed") = 1);

  m.def("broadcast_sample",
        [](const TreeTopology& tree, const std::vector<double>& theta, NodeId anchor,
           uint64_t seed, bool leaves_only) {
          Rng rng(seed);
          SpinConfig spins = broadcast_sample(tree, to_params(tree, theta), anchor, rng);
          if (leaves_only) spins = spins.restricted_to_leaves(tree);
          return std::vector<int>(spins.spins.begin(), spins.spins.end());
        },
        py::arg("tree"), py::arg("theta"), py::arg("anchor") = 0, py::arg("seed") = 1,
        py::arg("leaves_only") = false);

  m.def("q_combine", &q_combine);

  m.def("root_magnetization",
        [](const TreeTopology& tree, const std::vector<double>& theta,
           const std::vector<int>& leaf_spins, NodeId root,
           std::optional<NodeId> away, bool exact_endpoints) {
          const MagnetizationOptions options{exact_endpoints};
          return root_magnetization(tree, make_view(tree, root, away),
                                    to_params(tree, theta),
                                    to_leaf_config(tree, leaf_spins), options);
        },
        py::arg("tree"), py::arg("theta"), py::arg("leaf_spins"), py::arg("root"),
        py::arg("away") = std::nullopt, py::arg("exact_endpoints") = false);

  m.def("log_likelihood",
        [](const TreeTopology& tree, const std::vector<double>& theta,
           const std::vector<int>& leaf_spins) {
          return log_likelihood(tree, to_params(tree, theta),
                                to_leaf_config(tree, leaf_spins));
        });

  m.def("gradient",
        [](const TreeTopology& tree, const std::vector<double>& theta,
           const std::vector<int>& leaf_spins) {
          return grad_all(tree, to_params(tree, theta), to_leaf_config(tree, leaf_spins));
        });

  m.def("fit",
        [](const TreeTopology& tree, const std::vector<std::vector<int>>& samples,
           const std::vector<double>& init, double theta_min, double theta_max,
           double root_tolerance, int max_sweeps, double convergence_threshold,
           bool incremental) {
          FitConfig config;
          config.theta_min = theta_min;
          config.theta_max = theta_max;
          config.root_tolerance = root_tolerance;
          config.max_sweeps = max_sweeps;
          config.convergence_threshold = convergence_threshold;
          config.incremental_messages = incremental;
          const FitResult result =
              fit(tree, to_dataset(tree, samples), to_params(tree, init), config);
          return fit_result_to_json(result).dump();
        },
        py::arg("tree"), py::arg("samples"), py::arg("init"),
        py::arg("theta_min") = FitConfig{}.theta_min,
        py::arg("theta_max") = FitConfig{}.theta_max,
        py::arg("root_tolerance") = FitConfig{}.root_tolerance,
        py::arg("max_sweeps") = FitConfig{}.max_sweeps,
        py::arg("convergence_threshold") = FitConfig{}.convergence_threshold,
        py::arg("incremental") = false);

  m.def("default_constants", [] { return constants_dict(default_constants()); });
  m.def("trichotomy_constants",
        [](double true_c_hi, double hat_c_lo, double hat_c_hi) {
          return constants_dict(trichotomy_constants(true_c_hi, hat_c_lo, hat_c_hi));
        });
  m.def("classify",
        [](int sigma, double z, double delta) {
          return std::string(
              to_string(classify_trichotomy(sigma, z, delta, default_constants())));
        });

  m.def("tail_experiment_json", [](const std::string& config_json) {
    const ExperimentConfig config =
        experiment_config_from_json(Json::parse(config_json));
    return trichotomy_report_to_json(tail_experiment(config)).dump();
  });
  m.def("scaling_experiment_json", [](const std::string& config_json) {
    const ExperimentConfig config =
        experiment_config_from_json(Json::parse(config_json));
    return scaling_report_to_json(scaling_experiment(config)).dump();
  });
  m.def("independence_experiment_json", [](const std::string& config_json) {
    const ExperimentConfig config =
        experiment_config_from_json(Json::parse(config_json));
    return independence_report_to_json(independence_experiment(config)).dump();
  });
  m.def("init_sweep_experiment_json",
        [](const TreeTopology& tree, const std::string& config_json) {
          const InitSweepConfig config =
              init_sweep_config_from_json(Json::parse(config_json));
          return init_sweep_report_to_json(init_sweep_experiment(tree, config)).dump();
        });
  m.def("gradient_population_experiment",
        [](const TreeTopology& tree, const std::vector<double>& theta_true,
           const std::vector<double>& theta_hat, EdgeId edge, long samples,
           double delta, uint64_t seed) {
          const GradientPopulationReport report = gradient_population_experiment(
              tree, to_params(tree, theta_true), to_params(tree, theta_hat), edge,
              samples, delta, seed);
          return gradient_population_report_to_json(report).dump();
        },
        py::arg("tree"), py::arg("theta_true"), py::arg("theta_hat"), py::arg("edge"),
        py::arg("samples") = 0, py::arg("delta") = 0.1, py::arg("seed") = 1);
}
