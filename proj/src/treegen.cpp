#include "grtree/treegen.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "grtree/errors.hpp"

namespace grtree {

void WeightedIndex::push_back(double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
  weight_.push_back(w);
  if (weight_.size() > cap_) {
    cap_ = cap_ == 0 ? 64 : cap_ * 2;
    while (cap_ < weight_.size()) cap_ *= 2;
    rebuild();
  } else {
    add(weight_.size() - 1, w);
    total_ += w;
    drift_check();
  }
}

void WeightedIndex::update(std::size_t i, double w) {
  if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and >= 0");
  double delta = w - weight_[i];
  weight_[i] = w;
  add(i, delta);
  total_ += delta;
  drift_check();
}

void WeightedIndex::add(std::size_t i, double delta) {
  for (std::size_t j = i + 1; j <= cap_; j += j & (~j + 1)) fen_[j] += delta;
}

void WeightedIndex::rebuild() {
  fen_.assign(cap_ + 1, 0.0);
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < weight_.size(); ++i) {
    add(i, weight_[i]);
    double y = weight_[i] - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  total_ = sum;
  ops_ = 0;
}

void WeightedIndex::drift_check() {
  if (++ops_ < 4096) return;
  ops_ = 0;
  double sum = 0.0, comp = 0.0;
  for (double w : weight_) {
    double y = w - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  if (std::abs(sum - total_) > 1e-9 * std::max(sum, 1e-300)) {
    rebuild();
  } else {
    total_ = sum;
  }
}

std::size_t WeightedIndex::sample(double u01) const {
  if (weight_.empty() || !(total_ > 0.0)) throw ConfigError("cannot sample from empty or zero-weight index");
  double rem = u01 * total_;
  std::size_t pos = 0;
  for (std::size_t step = cap_; step > 0; step >>= 1) {
    std::size_t next = pos + step;
    if (next <= cap_ && fen_[next] <= rem) {
      rem -= fen_[next];
      pos = next;
    }
  }
  // pos counts fully consumed prefix entries; clamp fp overshoot and skip
  // zero-weight slots so the returned index always has positive weight.
  if (pos >= weight_.size()) pos = weight_.size() - 1;
  while (pos > 0 && weight_[pos] == 0.0) --pos;
  while (weight_[pos] == 0.0 && pos + 1 < weight_.size()) ++pos;
  return pos;
}

TreeBuilder::TreeBuilder(const AttachmentFunction& f, std::uint64_t master_seed,
                         std::uint64_t stream)
    : rng_(master_seed, stream) {
  tree_.model = f;
  tree_.seed = master_seed;
  tree_.parent = {kNoParent, 0};
  tree_.children = {{1}, {}};
  tree_.degree = {1, 1};
  double w1 = f.evaluate(1);
  weights_.push_back(w1);
  weights_.push_back(w1);
}

VertexId TreeBuilder::step() {
  VertexId parent = static_cast<VertexId>(weights_.sample(rng_.uniform01()));
  VertexId child = tree_.size();
  tree_.parent.push_back(parent);
  tree_.children[parent].push_back(child);
  tree_.children.emplace_back();
  tree_.degree[parent] += 1;
  tree_.degree.push_back(1);
  weights_.update(parent, tree_.model.evaluate(tree_.degree[parent]));
  weights_.push_back(tree_.model.evaluate(1));
  return parent;
}

GrowingTree grow(const AttachmentFunction& f, std::uint32_t n, std::uint64_t master_seed,
                 std::uint64_t stream) {
  if (n < 2) throw ConfigError("a grown tree has at least the two seed vertices");
  TreeBuilder b(f, master_seed, stream);
  while (b.tree().size() < n) b.step();
  return b.take();
}

std::vector<std::uint64_t> degree_histogram(const GrowingTree& t) {
  std::size_t max_children = 0;
  for (const auto& c : t.children) max_children = std::max(max_children, c.size());
  std::vector<std::uint64_t> counts(max_children + 1, 0);
  for (const auto& c : t.children) counts[c.size()] += 1;
  return counts;
}

void write_tree(const GrowingTree& t, std::ostream& out) {
  out << "n " << t.size() << " seed " << t.seed << " model " << t.model.to_json() << "\n";
  for (std::uint32_t i = 1; i < t.size(); ++i) out << t.parent[i] + 1 << "\n";
}

GrowingTree read_tree(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("tree file is empty");
  std::istringstream hs(header);
  std::string tag_n, tag_seed, tag_model;
  std::uint32_t n = 0;
  std::uint64_t seed = 0;
  hs >> tag_n >> n >> tag_seed >> seed >> tag_model;
  if (tag_n != "n" || tag_seed != "seed" || tag_model != "model" || n < 2)
    throw ConfigError("malformed tree header");
  std::string model_json;
  std::getline(hs, model_json);

  GrowingTree t;
  t.model = AttachmentFunction::from_json(model_json);
  t.seed = seed;
  t.parent.assign(n, kNoParent);
  t.children.assign(n, {});
  t.degree.assign(n, 0);
  for (std::uint32_t i = 1; i < n; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("tree file truncated");
    std::uint64_t label = 0;
    try {
      label = std::stoull(line);
    } catch (const std::exception&) {
      throw ConfigError("malformed parent line in tree file");
    }
    if (label < 1 || label > i) throw ConfigError("parent arrival index out of range");
    VertexId p = static_cast<VertexId>(label - 1);
    t.parent[i] = p;
    t.children[p].push_back(i);
  }
  for (std::uint32_t i = 0; i < n; ++i)
    t.degree[i] = static_cast<std::uint32_t>(t.children[i].size()) + (i == 0 ? 0 : 1);
  return t;
}

}  // namespace grtree
