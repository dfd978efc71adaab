#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "grtree/rng.hpp"
#include "grtree/treegen.hpp"

namespace grtree {

// psi[v] is the size of the largest subtree hanging off v, i.e. the largest
// component of the tree once v is removed. subtree_size / max_child_size are
// bookkeeping arrays for the rooting at vertex 0; psi itself does not depend
// on that choice.
struct JordanState {
  std::vector<std::uint32_t> subtree_size;
  std::vector<std::uint32_t> max_child_size;
  std::vector<std::uint32_t> psi;
};

// One BFS pass over the adjacency, then a reverse accumulation; O(n), no
// recursion. Only neighbor structure is read, so relabeled presentations of
// the same shape produce the same psi multiset.
JordanState psi_all(const GrowingTree& t);

// Independent check: removes v and measures components by direct traversal.
std::uint32_t psi_bruteforce(const GrowingTree& t, VertexId v);

// The k vertices with smallest psi, ordered by (psi, arrival index).
std::vector<VertexId> top_k(const JordanState& s, std::uint32_t k);

// |(t, r)_v|: size of the subtree containing v when t is rooted at r.
std::uint32_t rooted_subtree_size(const GrowingTree& t, const JordanState& s, VertexId r,
                                  VertexId v);

struct CentroidProperties {
  bool rank_equivalence = true;       // psi(u) <= psi(v) iff |(t,v)_u| >= |(t,u)_v|, sampled pairs
  std::uint64_t pairs_checked = 0;
  bool min_psi_at_most_half = true;   // min psi <= floor(n/2)
  std::uint32_t centroid_count = 0;   // argmin set size, must be 1 or 2
  bool centroids_adjacent = true;
  bool pair_identity = true;          // two centroids u,v: psi(u) == |(t,u)_v| and symmetric
  bool all_passed() const {
    return rank_equivalence && min_psi_at_most_half && centroid_count >= 1 &&
           centroid_count <= 2 && centroids_adjacent && pair_identity;
  }
};

CentroidProperties check_centroid_properties(const GrowingTree& t, std::uint64_t pair_samples,
                                             Rng& rng);

// After attaching new_vertex to a tree of previous size n_old, the subtree of
// any previous centroid seen from the new vertex covers at least n_old/2.
bool check_growth_step_bound(const GrowingTree& t_after, const JordanState& s_after,
                             VertexId old_centroid, std::uint32_t n_old);

// Exact top-k maintenance under growth. Per step it updates subtree sizes
// along the attachment path and rescans a candidate set; a full O(n) rescan
// every max(64, n/16) steps refreshes the candidates. Candidates are every
// vertex with psi <= (k-th smallest) + delta + slack at refresh time; psi is
// non-decreasing under growth and the k-th smallest rises at most 1 per step,
// so nothing outside the set can reach the top k before the next refresh.
// New vertices are admitted on birth when their leaf psi clears the same bar.
class TopKTracker {
 public:
  TopKTracker(const GrowingTree& t, std::uint32_t k, std::uint32_t slack = 0);

  // Mirror of TreeBuilder::step(); call with the parent each new vertex chose.
  void attach(VertexId parent);

  // Ordered (psi, vertex) pairs, ascending by (psi, arrival index). Holds all
  // vertices while the tree is still smaller than k.
  const std::vector<std::pair<std::uint32_t, VertexId>>& top() const { return topk_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(parent_.size()); }

 private:
  void full_recompute();
  void rescan_candidates();
  std::uint32_t psi_of(VertexId v) const;

  std::uint32_t k_;
  std::uint32_t slack_;
  std::vector<VertexId> parent_;
  std::vector<std::uint32_t> ss_, mcs_;
  std::vector<VertexId> candidates_;
  std::vector<std::pair<std::uint32_t, VertexId>> topk_;
  std::uint64_t steps_left_ = 0;
  std::uint64_t threshold_ = 0;
  std::uint64_t work_since_refresh_ = 0;  // path + rescan cost; caps the amortized step cost
};

// CSV rows (arrival_index, degree, subtree_size, psi), arrival indices 1-based.
void write_psi_csv(const GrowingTree& t, const JordanState& s, std::ostream& out);

}  // namespace grtree
