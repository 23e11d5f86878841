#include <cmath>
#include <string>

#include <doctest.h>

#include "cfn/newick.hpp"
#include "cfn/rng.hpp"
#include "cfn/tree.hpp"
#include "helpers.hpp"

using namespace cfn;

TEST_CASE("two-leaf parse collapses the degree-2 root") {
  const ParsedTree p = parse_newick("(A:0.1,B:0.1);");
  CHECK(p.tree.node_count() == 2);
  CHECK(p.tree.edge_count() == 1);
  CHECK(p.tree.find_label("A") != kNoNode);
  CHECK(p.tree.find_label("B") != kNoNode);
  CHECK(p.params.theta[0] == doctest::Approx(std::exp(-0.2)).epsilon(1e-14));
}

TEST_CASE("quartet parse fuses the root edge lengths") {
  const ParsedTree p = parse_newick("((A:0.1,B:0.1):0.1,(C:0.1,D:0.1):0.1);");
  CHECK(p.tree.node_count() == 6);
  CHECK(p.tree.edge_count() == 5);
  NodeId x = kNoNode, y = kNoNode;
  for (NodeId v = 0; v < p.tree.node_count(); ++v)
    if (!p.tree.is_leaf(v)) (x == kNoNode ? x : y) = v;
  REQUIRE(y != kNoNode);
  const EdgeId internal = p.tree.edge_between(x, y);
  REQUIRE(internal != kNoEdge);
  CHECK(p.params.theta[internal] == doctest::Approx(std::exp(-0.2)).epsilon(1e-14));
  for (const char* name : {"A", "B", "C", "D"}) {
    const NodeId leaf = p.tree.find_label(name);
    const EdgeId pendant = p.tree.neighbors(leaf)[0].edge;
    CHECK(p.params.theta[pendant] == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
  }
}

TEST_CASE("zero length parses to theta exactly 1") {
  const ParsedTree p = parse_newick("(A:0.0,B:0.0);");
  CHECK(p.params.theta[0] == 1.0);
}

TEST_CASE("write then parse reproduces theta") {
  SUBCASE("two leaves") {
    const TreeTopology t = testutil::two_leaf_tree();
    const EdgeParameters params{{std::exp(-0.2)}};
    const ParsedTree back = parse_newick(write_newick(t, params));
    CHECK(back.tree.edge_count() == 1);
    CHECK(std::abs(back.params.theta[0] - params.theta[0]) <= 1e-12);
  }
  SUBCASE("theta 1 emits length 0") {
    const TreeTopology t = testutil::two_leaf_tree();
    const std::string text = write_newick(t, EdgeParameters{{1.0}});
    CHECK(text.find("-0") == std::string::npos);
    CHECK(parse_newick(text).params.theta[0] == 1.0);
  }
  SUBCASE("random trees round-trip to the same path products") {
    Rng rng(29);
    for (int n = 2; n <= 8; ++n) {
      const TreeTopology t = random_binary_tree(n, rng);
      const EdgeParameters params = testutil::random_theta(t, rng, 0.2, 0.995);
      const std::string text = write_newick(t, params);
      const ParsedTree back = parse_newick(text);
      CHECK(back.tree.leaf_ids().size() == t.leaf_ids().size());
      const auto want = testutil::path_products(t, params);
      const auto got = testutil::path_products(back.tree, back.params);
      REQUIRE(want.size() == got.size());
      for (const auto& [key, value] : want)
        CHECK(got.at(key) == doctest::Approx(value).epsilon(1e-12));
      // Writing is canonical: a reparsed tree prints the same string.
      CHECK(write_newick(back.tree, back.params) == text);
    }
  }
}

TEST_CASE("trees with 3 or more leaves are written with a trifurcating root") {
  Rng rng(31);
  const TreeTopology t = random_binary_tree(5, rng);
  const std::string text = write_newick(t, EdgeParameters::constant(t, 0.9));
  int depth = 0, top_level_commas = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 1) ++top_level_commas;
  }
  CHECK(top_level_commas == 2);
}

TEST_CASE("write rejects nonpositive theta") {
  const TreeTopology t = testutil::two_leaf_tree();
  CHECK_THROWS_AS(write_newick(t, EdgeParameters{{0.0}}), std::domain_error);
  CHECK_THROWS_AS(write_newick(t, EdgeParameters{{-0.5}}), std::domain_error);
}

TEST_CASE("parse errors carry a position") {
  auto expect_error = [](const std::string& text) {
    try {
      parse_newick(text);
      FAIL("expected NewickError for: ", text);
    } catch (const NewickError& e) {
      CHECK(e.position() <= text.size());
    }
  };
  expect_error("(A:0.1,B:0.1");                                   // unclosed group
  expect_error("(A:0.1,B:0.1,C:0.1,D:0.1);");                     // root arity 4
  expect_error("((A:0.1,B:0.1,C:0.1):0.1,D:0.1,E:0.1);");         // internal arity 3
  expect_error("(A,B);");                                         // missing lengths
  expect_error("(A:-0.5,B:0.1);");                                // negative length
  expect_error("(A:inf,B:0.1);");                                 // non-finite length
  expect_error("(A:0.1,B:zzz);");                                 // malformed number
  expect_error("A:0.5;");                                         // no group at all
  expect_error("(A:0.1,B:0.1); trailing");                        // trailing junk
  expect_error("");                                               // empty input
}
