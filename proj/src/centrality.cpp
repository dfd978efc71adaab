#include "grtree/centrality.hpp"

#include <algorithm>
#include <ostream>

#include "grtree/errors.hpp"

namespace grtree {

JordanState psi_all(const GrowingTree& t) {
  std::uint32_t n = t.size();
  JordanState s;
  s.subtree_size.assign(n, 1);
  s.max_child_size.assign(n, 0);
  s.psi.assign(n, 0);

  std::vector<VertexId> order;
  order.reserve(n);
  order.push_back(0);
  for (std::uint32_t head = 0; head < order.size(); ++head) {
    for (VertexId c : t.children[order[head]]) order.push_back(c);
  }
  if (order.size() != n) throw InternalError("tree adjacency is not connected");

  for (std::uint32_t i = n; i-- > 1;) {
    VertexId v = order[i];
    VertexId p = t.parent[v];
    s.subtree_size[p] += s.subtree_size[v];
    s.max_child_size[p] = std::max(s.max_child_size[p], s.subtree_size[v]);
  }
  for (VertexId v = 0; v < n; ++v) {
    s.psi[v] = v == 0 ? s.max_child_size[0]
                      : std::max(s.max_child_size[v], n - s.subtree_size[v]);
  }
  return s;
}

std::uint32_t psi_bruteforce(const GrowingTree& t, VertexId v) {
  std::uint32_t n = t.size();
  std::vector<bool> seen(n, false);
  seen[v] = true;
  std::vector<VertexId> stack;
  auto neighbors = [&t](VertexId u, auto&& visit) {
    if (u != 0) visit(t.parent[u]);
    for (VertexId c : t.children[u]) visit(c);
  };
  std::uint32_t best = 0;
  std::vector<VertexId> starts;
  neighbors(v, [&starts](VertexId u) { starts.push_back(u); });
  for (VertexId start : starts) {
    if (seen[start]) continue;
    std::uint32_t count = 0;
    stack.push_back(start);
    seen[start] = true;
    while (!stack.empty()) {
      VertexId u = stack.back();
      stack.pop_back();
      ++count;
      neighbors(u, [&](VertexId w) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      });
    }
    best = std::max(best, count);
  }
  return best;
}

std::vector<VertexId> top_k(const JordanState& s, std::uint32_t k) {
  std::uint32_t n = static_cast<std::uint32_t>(s.psi.size());
  if (k == 0 || k > n) throw ConfigError("top_k needs 1 <= k <= vertex count");
  std::vector<VertexId> ids(n);
  for (std::uint32_t v = 0; v < n; ++v) ids[v] = v;
  auto less = [&s](VertexId a, VertexId b) {
    return s.psi[a] != s.psi[b] ? s.psi[a] < s.psi[b] : a < b;
  };
  std::nth_element(ids.begin(), ids.begin() + k - 1, ids.end(), less);
  ids.resize(k);
  std::sort(ids.begin(), ids.end(), less);
  return ids;
}

std::uint32_t rooted_subtree_size(const GrowingTree& t, const JordanState& s, VertexId r,
                                  VertexId v) {
  std::uint32_t n = t.size();
  if (r == v) return n;
  // Walk r toward vertex 0; if v lies on the walk, v's subtree seen from r is
  // everything except the branch of v that contains r.
  VertexId prev = r;
  VertexId u = r;
  while (u != 0) {
    u = t.parent[u];
    if (u == v) return n - s.subtree_size[prev];
    prev = u;
  }
  return s.subtree_size[v];
}

CentroidProperties check_centroid_properties(const GrowingTree& t, std::uint64_t pair_samples,
                                             Rng& rng) {
  std::uint32_t n = t.size();
  JordanState s = psi_all(t);
  CentroidProperties out;

  for (std::uint64_t i = 0; i < pair_samples; ++i) {
    VertexId u = static_cast<VertexId>(rng.below(n));
    VertexId v = static_cast<VertexId>(rng.below(n));
    if (u == v) continue;
    ++out.pairs_checked;
    bool psi_le = s.psi[u] <= s.psi[v];
    bool sub_ge = rooted_subtree_size(t, s, v, u) >= rooted_subtree_size(t, s, u, v);
    if (psi_le != sub_ge) out.rank_equivalence = false;
  }

  std::uint32_t min_psi = s.psi[0];
  for (VertexId v = 1; v < n; ++v) min_psi = std::min(min_psi, s.psi[v]);
  out.min_psi_at_most_half = min_psi <= n / 2;

  std::vector<VertexId> centroids;
  for (VertexId v = 0; v < n; ++v)
    if (s.psi[v] == min_psi) centroids.push_back(v);
  out.centroid_count = static_cast<std::uint32_t>(centroids.size());
  if (centroids.size() == 2) {
    VertexId a = centroids[0], b = centroids[1];
    out.centroids_adjacent = t.parent[a] == b || t.parent[b] == a;
    out.pair_identity = s.psi[a] == rooted_subtree_size(t, s, a, b) &&
                        s.psi[b] == rooted_subtree_size(t, s, b, a);
  }
  return out;
}

bool check_growth_step_bound(const GrowingTree& t_after, const JordanState& s_after,
                             VertexId old_centroid, std::uint32_t n_old) {
  VertexId fresh = t_after.size() - 1;
  std::uint32_t sz = rooted_subtree_size(t_after, s_after, fresh, old_centroid);
  return 2ull * sz >= n_old;
}

TopKTracker::TopKTracker(const GrowingTree& t, std::uint32_t k, std::uint32_t slack)
    : k_(k), slack_(slack) {
  if (k == 0) throw ConfigError("tracker needs k >= 1");
  std::uint32_t n = t.size();
  parent_ = t.parent;
  for (std::uint32_t v = 1; v < n; ++v)
    if (parent_[v] >= v) throw ConfigError("tracker needs arrival-ordered trees (parent < child)");
  ss_.assign(n, 1);
  mcs_.assign(n, 0);
  for (std::uint32_t v = n; v-- > 1;) {
    VertexId p = parent_[v];
    ss_[p] += ss_[v];
    mcs_[p] = std::max(mcs_[p], ss_[v]);
  }
  full_recompute();
}

std::uint32_t TopKTracker::psi_of(VertexId v) const {
  std::uint32_t n = static_cast<std::uint32_t>(parent_.size());
  return v == 0 ? mcs_[0] : std::max(mcs_[v], n - ss_[v]);
}

void TopKTracker::full_recompute() {
  std::uint32_t n = static_cast<std::uint32_t>(parent_.size());
  if (ss_[0] != n) throw InternalError("tracker subtree sizes inconsistent with vertex count");

  std::uint64_t delta = std::max<std::uint64_t>(64, n / 16);
  if (n <= k_) {
    threshold_ = ~0ull;
  } else {
    std::vector<std::uint32_t> psis(n);
    for (VertexId v = 0; v < n; ++v) psis[v] = psi_of(v);
    std::nth_element(psis.begin(), psis.begin() + (k_ - 1), psis.end());
    threshold_ = static_cast<std::uint64_t>(psis[k_ - 1]) + delta + slack_;
  }
  candidates_.clear();
  for (VertexId v = 0; v < n; ++v)
    if (psi_of(v) <= threshold_) candidates_.push_back(v);
  steps_left_ = delta;
  work_since_refresh_ = 0;
  rescan_candidates();
}

void TopKTracker::rescan_candidates() {
  std::uint32_t n = static_cast<std::uint32_t>(parent_.size());
  std::uint32_t want = std::min(k_, n);
  topk_.clear();
  for (VertexId v : candidates_) topk_.emplace_back(psi_of(v), v);
  std::sort(topk_.begin(), topk_.end());
  if (topk_.size() > want) topk_.resize(want);
}

void TopKTracker::attach(VertexId parent) {
  std::uint32_t child = static_cast<std::uint32_t>(parent_.size());
  if (parent >= child) throw ConfigError("attach parent must be an existing vertex");
  parent_.push_back(parent);
  ss_.push_back(1);
  mcs_.push_back(0);

  VertexId from = child;
  VertexId u = parent;
  while (true) {
    ss_[u] += 1;
    mcs_[u] = std::max(mcs_[u], ss_[from]);
    ++work_since_refresh_;
    if (u == 0) break;
    from = u;
    u = parent_[u];
  }

  std::uint64_t leaf_psi = parent_.size() - 1;
  if (leaf_psi <= threshold_) candidates_.push_back(child);

  // Early refresh when unusual tree shapes (deep paths, bloated candidate
  // sets) push the amortized step cost past a constant: a refresh re-tightens
  // the candidate set around the current k-th smallest psi.
  work_since_refresh_ += candidates_.size();
  bool over_budget = work_since_refresh_ > 64 * (parent_.size() + 64);

  if (--steps_left_ == 0 || over_budget) {
    full_recompute();
  } else {
    rescan_candidates();
  }
}

void write_psi_csv(const GrowingTree& t, const JordanState& s, std::ostream& out) {
  out << "arrival_index,degree,subtree_size,psi\n";
  for (std::uint32_t v = 0; v < t.size(); ++v) {
    out << v + 1 << ',' << t.degree[v] << ',' << s.subtree_size[v] << ',' << s.psi[v] << "\n";
  }
}

}  // namespace grtree
