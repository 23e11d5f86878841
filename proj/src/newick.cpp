#include "cfn/newick.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <vector>

namespace cfn {

NewickError::NewickError(const std::string& what, size_t position)
    : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
      position_(position) {}

namespace {

struct Clade {
  std::string label;
  std::vector<int> children;
  std::vector<double> child_length;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  // Returns the clade index of the outermost group.
  int run() {
    const int root = clade();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ':') {  // root length: ignored
      ++pos_;
      number();
    }
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ';') ++pos_;
    skip_space();
    if (pos_ != text_.size()) throw NewickError("trailing characters", pos_);
    return root;
  }

  std::vector<Clade> clades;

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_space();
    if (pos_ >= text_.size()) throw NewickError("unexpected end of input", pos_);
    return text_[pos_];
  }

  double number() {
    skip_space();
    const size_t start = pos_;
    size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text_.substr(start), &used);
    } catch (const std::exception&) {
      throw NewickError("expected a branch length", start);
    }
    pos_ = start + used;
    return value;
  }

  std::string name() {
    skip_space();
    const size_t start = pos_;
    static const std::string kStop = "(),:;";
    while (pos_ < text_.size() && kStop.find(text_[pos_]) == std::string::npos &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  int clade() {
    const int id = static_cast<int>(clades.size());
    clades.emplace_back();
    if (peek() == '(') {
      ++pos_;
      while (true) {
        const int child = clade();
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != ':')
          throw NewickError("missing branch length", pos_);
        ++pos_;
        const size_t at = pos_;
        const double len = number();
        if (!std::isfinite(len)) throw NewickError("branch length not finite", at);
        if (len < 0.0) throw NewickError("negative branch length", at);
        clades[id].children.push_back(child);
        clades[id].child_length.push_back(len);
        const char c = peek();
        if (c == ',') {
          ++pos_;
          continue;
        }
        if (c == ')') {
          ++pos_;
          break;
        }
        throw NewickError("expected ',' or ')'", pos_);
      }
      clades[id].label = name();  // optional internal label
    } else {
      clades[id].label = name();
      if (clades[id].label.empty())
        throw NewickError("expected a leaf name or '('", pos_);
    }
    return id;
  }

  const std::string& text_;
  size_t pos_ = 0;
};

}  // namespace

ParsedTree parse_newick(const std::string& text) {
  Parser parser(text);
  const int root = parser.run();
  auto& clades = parser.clades;

  const size_t root_arity = clades[root].children.size();
  if (root_arity != 2 && root_arity != 3)
    throw NewickError("outermost group must have 2 or 3 branches", 0);
  for (size_t i = 0; i < clades.size(); ++i) {
    const size_t arity = clades[i].children.size();
    if (static_cast<int>(i) != root && arity != 0 && arity != 2)
      throw NewickError("internal node is not binary", 0);
  }

  TreeTopology::Builder builder;
  std::vector<NodeId> node_of(clades.size(), kNoNode);
  const bool collapse = root_arity == 2;
  for (size_t i = 0; i < clades.size(); ++i)
    if (!(collapse && static_cast<int>(i) == root))
      node_of[i] = builder.add_node(clades[i].label);

  struct Link {
    NodeId a, b;
    double length;
  };
  std::vector<Link> links;
  for (size_t i = 0; i < clades.size(); ++i) {
    if (collapse && static_cast<int>(i) == root) continue;
    const Clade& c = clades[i];
    for (size_t j = 0; j < c.children.size(); ++j)
      links.push_back({node_of[i], node_of[c.children[j]], c.child_length[j]});
  }
  if (collapse) {
    const Clade& r = clades[root];
    links.push_back({node_of[r.children[0]], node_of[r.children[1]],
                     r.child_length[0] + r.child_length[1]});
  }

  EdgeParameters params;
  params.theta.resize(links.size());
  for (const Link& link : links) {
    const EdgeId e = builder.connect(link.a, link.b);
    params.theta[e] = std::exp(-link.length);
  }
  ParsedTree out{builder.finish(), std::move(params)};
  out.tree.require_unrooted_binary();
  return out;
}

namespace {

std::string format_length(double theta) {
  if (theta <= 0.0) throw std::domain_error("write_newick: theta <= 0 has no length");
  double l = -std::log(theta);
  if (l == 0.0) l = 0.0;  // never print "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", l);
  return buf;
}

void write_clade(const TreeTopology& tree, const EdgeParameters& params, NodeId v,
                 NodeId from, std::string& out) {
  if (tree.is_leaf(v)) {
    out += tree.label(v);
    return;
  }
  out += '(';
  bool first = true;
  for (const Halfedge& h : tree.neighbors(v)) {
    if (h.neighbor == from) continue;
    if (!first) out += ',';
    first = false;
    write_clade(tree, params, h.neighbor, v, out);
    out += ':';
    out += format_length(params.theta[h.edge]);
  }
  out += ')';
}

}  // namespace

std::string write_newick(const TreeTopology& tree, const EdgeParameters& params) {
  tree.require_unrooted_binary();
  if (static_cast<int>(params.theta.size()) != tree.edge_count())
    throw std::invalid_argument("write_newick: parameter/edge count mismatch");

  std::string out;
  if (tree.node_count() == 2) {
    if (params.theta[0] <= 0.0)
      throw std::domain_error("write_newick: theta <= 0 has no length");
    const std::string half = format_length(std::sqrt(params.theta[0]));
    out += '(';
    out += tree.label(0) + ':' + half + ',' + tree.label(1) + ':' + half;
    out += ");";
    return out;
  }
  NodeId root = kNoNode;
  for (NodeId v = 0; v < tree.node_count(); ++v)
    if (!tree.is_leaf(v)) {
      root = v;
      break;
    }
  write_clade(tree, params, root, kNoNode, out);
  out += ';';
  return out;
}

}  // namespace cfn
