#include <cmath>
#include <vector>

#include <doctest.h>

#include "cfn/estimator.hpp"
#include "cfn/magnetization.hpp"
#include "cfn/model.hpp"
#include "cfn/rng.hpp"
#include "cfn/tree.hpp"
#include "helpers.hpp"

using namespace cfn;

namespace {

Dataset broadcast_dataset(const TreeTopology& tree, const EdgeParameters& truth,
                          int m, uint64_t seed) {
  Dataset data;
  for (int i = 0; i < m; ++i) {
    Rng rng = Rng::substream(seed, static_cast<uint64_t>(i), 1);
    data.samples.push_back(
        broadcast_sample(tree, truth, 0, rng).restricted_to_leaves(tree));
  }
  return data;
}

}  // namespace

TEST_CASE("edge products on a two-leaf tree are the spin products") {
  const TreeTopology pair = testutil::two_leaf_tree();
  const Dataset data = testutil::two_leaf_dataset(2, 3);
  const auto products =
      edge_profile_products(pair, EdgeParameters{{0.5}}, data, 0);
  REQUIRE(products.size() == 3);
  CHECK(products[0] == 1.0);
  CHECK(products[1] == 1.0);
  CHECK(products[2] == -1.0);
}

TEST_CASE("edge products match brute-force side magnetizations") {
  const auto [t, truth] = testutil::quartet();
  Rng rng(11);
  const EdgeParameters hat = testutil::random_theta(t, rng, 0.3, 0.95);
  const Dataset data = broadcast_dataset(t, truth, 12, 12);
  for (EdgeId e = 0; e < t.edge_count(); ++e) {
    const auto products = edge_profile_products(t, hat, data, e);
    const auto [x, y] = t.endpoints(e);
    const RootedView side_x = descendant_subtree(t, x, y);
    const RootedView side_y = descendant_subtree(t, y, x);
    for (size_t i = 0; i < data.size(); ++i) {
      const double want = brute_force_magnetization(t, side_x, hat, data.samples[i]) *
                          brute_force_magnetization(t, side_y, hat, data.samples[i]);
      CHECK(std::abs(products[i] - want) <= 1e-10);
    }
  }
}

TEST_CASE("edge products do not depend on that edge's own theta") {
  const auto [t, truth] = testutil::quartet();
  Rng rng(13);
  EdgeParameters hat = testutil::random_theta(t, rng, 0.3, 0.95);
  const Dataset data = broadcast_dataset(t, truth, 10, 14);
  for (EdgeId e = 0; e < t.edge_count(); ++e) {
    const auto before = edge_profile_products(t, hat, data, e);
    EdgeParameters poked = hat;
    poked.theta[e] = 0.123;
    const auto after = edge_profile_products(t, poked, data, e);
    CHECK(before == after);
  }
}

TEST_CASE("edge derivative") {
  SUBCASE("all-ones products") {
    const std::vector<double> w(4, 1.0);
    CHECK(edge_derivative(w, 0.5) == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
  }
  SUBCASE("agree/disagree split") {
    const std::vector<double> w{1.0, 1.0, 1.0, -1.0};
    const double want = (3.0 / 1.2 - 1.0 / 0.8) / 4.0;
    CHECK(edge_derivative(w, 0.2) == doctest::Approx(want).epsilon(1e-14));
  }
  SUBCASE("all-zero products give a flat objective") {
    const std::vector<double> w(5, 0.0);
    CHECK(edge_derivative(w, 0.7) == 0.0);
  }
  SUBCASE("pole and input validation") {
    const std::vector<double> minus_one{-1.0};
    CHECK_THROWS_AS(edge_derivative(minus_one, 1.0), std::domain_error);
    CHECK_THROWS_AS(edge_derivative(std::vector<double>{}, 0.5),
                    std::invalid_argument);
    const std::vector<double> w{1.0, -1.0};
    CHECK_THROWS_AS(edge_derivative(w, std::vector<double>{1.0}, 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(edge_derivative(w, std::vector<double>{0.0, 0.0}, 0.5),
                    std::invalid_argument);
  }
  SUBCASE("weights behave like multiplicities") {
    const std::vector<double> w{1.0, -1.0};
    const std::vector<double> weights{9.0, 1.0};
    const std::vector<double> expanded{1, 1, 1, 1, 1, 1, 1, 1, 1, -1};
    CHECK(edge_derivative(w, weights, 0.3) ==
          doctest::Approx(edge_derivative(expanded, 0.3)).epsilon(1e-14));
  }
}

TEST_CASE("one-coordinate maximization") {
  FitConfig config;
  SUBCASE("interior root of the agreement profile") {
    std::vector<double> w(10, 1.0);
    w[9] = -1.0;  // 9 of 10 agree: maximizer at 2*(9/10) - 1
    CHECK(optimize_edge(w, config) == doctest::Approx(0.8).epsilon(1e-8));
    CHECK(optimize_edge(std::vector<double>{1.0, -1.0},
                        std::vector<double>{9.0, 1.0}, config) ==
          doctest::Approx(0.8).epsilon(1e-8));
  }
  SUBCASE("derivative positive throughout lands on theta_max") {
    const std::vector<double> w(6, 1.0);
    CHECK(optimize_edge(w, config) == config.theta_max);
  }
  SUBCASE("flat objective takes theta_min") {
    const std::vector<double> w(6, 0.0);
    CHECK(optimize_edge(w, config) == config.theta_min);
  }
  SUBCASE("returned interior point brackets the derivative root") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> w;
      for (int i = 0; i < 25; ++i) w.push_back(rng.uniform(-0.9, 0.9));
      const double theta = optimize_edge(w, config);
      if (theta == config.theta_min || theta == config.theta_max) continue;
      CHECK(edge_derivative(w, theta - 2.0 * config.root_tolerance) >= 0.0);
      CHECK(edge_derivative(w, theta + 2.0 * config.root_tolerance) <= 0.0);
    }
  }
  SUBCASE("configuration validation") {
    FitConfig bad;
    bad.theta_min = 0.5;
    bad.theta_max = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = FitConfig{};
    bad.theta_max = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = FitConfig{};
    bad.theta_min = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = FitConfig{};
    bad.root_tolerance = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = FitConfig{};
    bad.max_sweeps = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = FitConfig{};
    bad.convergence_threshold = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("coordinate sweeps install each update before the next edge") {
  const TreeTopology star = testutil::star_tree();
  const EdgeParameters truth{{0.9, 0.8, 0.85}};
  const Dataset data = broadcast_dataset(star, truth, 20, 16);
  FitConfig config;
  config.sweep_order = {2, 0, 1};
  EdgeParameters manual = EdgeParameters::constant(star, 0.5);
  for (EdgeId e : config.sweep_order) {
    const auto products = edge_profile_products(star, manual, data, e);
    manual.theta[e] = optimize_edge(products, config);
  }
  const EdgeParameters swept =
      coordinate_sweep(star, EdgeParameters::constant(star, 0.5), data, config);
  CHECK(swept.theta == manual.theta);
}

TEST_CASE("coordinate sweep input validation") {
  const TreeTopology star = testutil::star_tree();
  const Dataset data = broadcast_dataset(star, EdgeParameters{{0.9, 0.9, 0.9}}, 5, 17);
  FitConfig config;
  SUBCASE("parameter count must match the tree") {
    CHECK_THROWS_AS(coordinate_sweep(star, EdgeParameters{{0.5}}, data, config),
                    std::invalid_argument);
  }
  SUBCASE("sweep order must be a permutation of the edges") {
    config.sweep_order = {0, 1};
    CHECK_THROWS_AS(
        coordinate_sweep(star, EdgeParameters::constant(star, 0.5), data, config),
        std::invalid_argument);
    config.sweep_order = {0, 1, 1};
    CHECK_THROWS_AS(
        coordinate_sweep(star, EdgeParameters::constant(star, 0.5), data, config),
        std::invalid_argument);
    config.sweep_order = {0, 1, 3};
    CHECK_THROWS_AS(
        coordinate_sweep(star, EdgeParameters::constant(star, 0.5), data, config),
        std::invalid_argument);
  }
  SUBCASE("message reuse requires the default order") {
    config.sweep_order = {0, 1, 2};
    config.incremental_messages = true;
    CHECK_THROWS_AS(
        coordinate_sweep(star, EdgeParameters::constant(star, 0.5), data, config),
        std::invalid_argument);
  }
}

TEST_CASE("fit on a two-leaf tree") {
  const TreeTopology pair = testutil::two_leaf_tree();
  FitConfig config;
  SUBCASE("recovers the agreement-matching theta") {
    const Dataset data = testutil::two_leaf_dataset(9, 10);
    const FitResult result = fit(pair, data, EdgeParameters{{0.5}}, config);
    CHECK(result.reason == FitTermination::kConverged);
    CHECK(std::abs(result.params.theta[0] - 0.8) <= 1e-8);
    CHECK(!result.sweep_log_likelihood.empty());
  }
  SUBCASE("all-agree data pins the boundary") {
    const Dataset data = testutil::two_leaf_dataset(4, 4);
    const FitResult result = fit(pair, data, EdgeParameters{{0.5}}, config);
    CHECK(result.params.theta[0] == config.theta_max);
    CHECK(result.reason == FitTermination::kBoundary);
  }
  SUBCASE("a zero sweep budget returns the start point") {
    config.max_sweeps = 0;
    const Dataset data = testutil::two_leaf_dataset(3, 4);
    const FitResult result = fit(pair, data, EdgeParameters{{0.25}}, config);
    CHECK(result.params.theta[0] == 0.25);
    CHECK(result.reason == FitTermination::kMaxSweeps);
    CHECK(result.sweep_max_change.empty());
    CHECK(result.sweep_log_likelihood.empty());
  }
}

TEST_CASE("fit ascends the dataset log-likelihood") {
  const auto [t, truth] = testutil::quartet();
  const Dataset data = broadcast_dataset(t, truth, 40, 18);
  FitConfig config;
  config.max_sweeps = 6;
  const FitResult result = fit(t, data, EdgeParameters::constant(t, 0.4), config);
  REQUIRE(result.sweep_log_likelihood.size() >= 2);
  for (size_t i = 1; i < result.sweep_log_likelihood.size(); ++i)
    CHECK(result.sweep_log_likelihood[i] >=
          result.sweep_log_likelihood[i - 1] - 1e-12);
}

TEST_CASE("message-reuse sweeps match plain sweeps bit for bit") {
  std::vector<TreeTopology> trees;
  trees.push_back(testutil::quartet().tree);
  trees.push_back(experiment_tree(ExperimentTreeKind::kCaterpillar, 8).tree);
  trees.push_back(experiment_tree(ExperimentTreeKind::kComplete, 3).tree);
  uint64_t seed = 19;
  for (const TreeTopology& t : trees) {
    const EdgeParameters truth = EdgeParameters::constant(t, 0.9);
    const Dataset data = broadcast_dataset(t, truth, 50, seed++);
    FitConfig plain;
    plain.max_sweeps = 4;
    FitConfig reuse = plain;
    reuse.incremental_messages = true;
    const EdgeParameters init = EdgeParameters::constant(t, 0.6);
    const FitResult a = fit(t, data, init, plain);
    const FitResult b = fit(t, data, init, reuse);
    CHECK(a.params.theta == b.params.theta);
    CHECK(a.sweep_max_change == b.sweep_max_change);
    CHECK(a.reason == b.reason);
  }
}

TEST_CASE("termination labels") {
  CHECK(std::string(to_string(FitTermination::kConverged)) == "converged");
  CHECK(std::string(to_string(FitTermination::kMaxSweeps)) == "max-sweeps");
  CHECK(std::string(to_string(FitTermination::kBoundary)) == "boundary");
}
