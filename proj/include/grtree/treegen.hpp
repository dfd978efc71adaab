#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "grtree/attach_model.hpp"
#include "grtree/rng.hpp"

namespace grtree {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoParent = 0xffffffffu;

// Dynamic weighted sampler over indices 0..size-1 (Fenwick layout).
// sample(u) maps u in [0,1) to the index whose cumulative-weight interval
// contains u*total. Incremental float drift against an exactly recomputed
// total is checked periodically and the structure rebuilt when the relative
// error exceeds 1e-9.
class WeightedIndex {
 public:
  WeightedIndex() = default;
  explicit WeightedIndex(std::size_t reserve_hint) { weight_.reserve(reserve_hint); }

  std::size_t size() const { return weight_.size(); }
  void push_back(double w);
  void update(std::size_t i, double w);
  double weight(std::size_t i) const { return weight_[i]; }
  double total() const { return total_; }
  std::size_t sample(double u01) const;
  void rebuild();

 private:
  void add(std::size_t i, double delta);
  void drift_check();

  std::vector<double> weight_;
  std::vector<double> fen_;  // 1-based partial sums, capacity a power of two
  std::size_t cap_ = 0;
  double total_ = 0.0;
  std::uint64_t ops_ = 0;
};

// Recursive tree in arrival order: vertex 0 is the seed root, vertex 1 its
// initial neighbor, and parent[i] < i for every later vertex. Arrival labels
// in serialized form and reports are 1-based (vertex 0 prints as 1).
struct GrowingTree {
  AttachmentFunction model = AttachmentFunction::uniform();
  std::uint64_t seed = 0;
  std::vector<VertexId> parent;
  std::vector<std::vector<VertexId>> children;
  std::vector<std::uint32_t> degree;  // tree degree: children plus parent edge

  std::uint32_t size() const { return static_cast<std::uint32_t>(parent.size()); }
};

// Grows one vertex at a time: the parent of each new vertex is drawn with
// probability proportional to f(degree). Starts from the two-vertex tree with
// both attachment weights f(1).
class TreeBuilder {
 public:
  TreeBuilder(const AttachmentFunction& f, std::uint64_t master_seed, std::uint64_t stream = 0);

  VertexId step();  // attaches one vertex, returns the chosen parent
  const GrowingTree& tree() const { return tree_; }
  GrowingTree take() { return std::move(tree_); }
  double total_weight() const { return weights_.total(); }

 private:
  GrowingTree tree_;
  WeightedIndex weights_;
  Rng rng_;
};

GrowingTree grow(const AttachmentFunction& f, std::uint32_t n, std::uint64_t master_seed,
                 std::uint64_t stream = 0);

// counts[k] = number of vertices with k children (out-degree histogram).
std::vector<std::uint64_t> degree_histogram(const GrowingTree& t);

// Line format: header "n <count> seed <seed> model <json>", then one line per
// vertex from arrival index 2 holding its parent's 1-based arrival index.
// Round-trips bit-exactly.
void write_tree(const GrowingTree& t, std::ostream& out);
GrowingTree read_tree(std::istream& in);

}  // namespace grtree
