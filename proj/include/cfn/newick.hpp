#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "cfn/model.hpp"
#include "cfn/tree.hpp"

namespace cfn {

/** Parse failure carrying the byte offset where the problem was detected. */
class NewickError : public std::runtime_error {
 public:
  NewickError(const std::string& what, size_t position);
  size_t position() const { return position_; }

 private:
  size_t position_;
};

struct ParsedTree {
  TreeTopology tree;
  EdgeParameters params;
};

/**
 * Reads a Newick string with mandatory branch lengths, mapping each length l
 * to theta = exp(-l). A degree-2 root is collapsed by fusing its two incident
 * edges and adding their lengths; a length on the outermost group is ignored.
 * Throws NewickError on malformed input, non-binary internal nodes, or
 * missing/negative/non-finite lengths.
 */
ParsedTree parse_newick(const std::string& text);

/**
 * Writes an unrooted binary tree with lengths -ln(theta) at 12 significant
 * digits. Trees with >= 3 leaves are written with a trifurcating root at an
 * internal node; the 2-leaf tree splits its single length across the root.
 * Throws std::domain_error when some theta <= 0 (length undefined).
 */
std::string write_newick(const TreeTopology& tree, const EdgeParameters& params);

}  // namespace cfn
