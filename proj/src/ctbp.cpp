#include "grtree/ctbp.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "grtree/errors.hpp"

namespace grtree {

namespace {

struct PendingBirth {
  double time;
  std::uint32_t individual;
  bool operator>(const PendingBirth& o) const {
    return time != o.time ? time > o.time : individual > o.individual;
  }
};

using BirthQueue =
    std::priority_queue<PendingBirth, std::vector<PendingBirth>, std::greater<PendingBirth>>;

}  // namespace

std::uint64_t BPRecord::population_at(double t) const {
  std::uint64_t pop = 1;
  for (const BpEvent& e : events) {
    if (e.time > t) break;
    ++pop;
  }
  return pop;
}

BPRecord simulate_ctbp(const AttachmentFunction& f, StopRule stop, Rng& rng,
                       std::uint32_t root_shift, std::uint64_t max_individuals) {
  if (root_shift == 0) throw ConfigError("root_shift must be >= 1");
  std::uint64_t target_size = 0;
  if (stop.kind == StopRule::Kind::size) {
    if (!(stop.value >= 1.0)) throw ConfigError("size stop must be >= 1");
    target_size = static_cast<std::uint64_t>(stop.value);
  } else if (!(stop.value >= 0.0)) {
    throw ConfigError("time stop must be >= 0");
  }

  BPRecord rec;
  rec.root_shift = root_shift;
  rec.birth_time = {0.0};
  rec.parent = {kNoParent};
  rec.child_count = {0};

  BirthQueue queue;
  auto shift_of = [root_shift](std::uint32_t id) { return id == 0 ? root_shift : 1u; };
  queue.push({rng.exponential(f.evaluate(root_shift)), 0});

  while (true) {
    if (stop.kind == StopRule::Kind::size && rec.birth_time.size() >= target_size) {
      rec.stop_time = rec.events.empty() ? 0.0 : rec.events.back().time;
      break;
    }
    if (queue.empty()) throw InternalError("birth queue exhausted");
    PendingBirth e = queue.top();
    if (stop.kind == StopRule::Kind::time && e.time > stop.value) {
      rec.stop_time = stop.value;
      break;
    }
    queue.pop();
    if (rec.birth_time.size() >= max_individuals)
      throw ResourceCapError("branching population exceeded the configured individual cap");

    std::uint32_t child = static_cast<std::uint32_t>(rec.birth_time.size());
    rec.birth_time.push_back(e.time);
    rec.parent.push_back(e.individual);
    rec.child_count.push_back(0);
    rec.events.push_back({e.time, e.individual});
    rec.child_count[e.individual] += 1;

    double parent_rate = f.evaluate(shift_of(e.individual) + rec.child_count[e.individual]);
    queue.push({e.time + rng.exponential(parent_rate), e.individual});
    queue.push({e.time + rng.exponential(f.evaluate(1)), child});
  }
  return rec;
}

EmbeddingResult simulate_embedding(const AttachmentFunction& f, std::uint32_t n,
                                   std::uint64_t master_seed, std::uint64_t stream) {
  if (n < 2) throw ConfigError("embedding needs n >= 2");
  Rng rng(master_seed, stream);

  EmbeddingResult out;
  GrowingTree& t = out.tree;
  t.model = f;
  t.seed = master_seed;
  t.parent = {kNoParent, 0};
  t.children = {{1}, {}};
  t.degree = {1, 1};
  out.arrival_time = {0.0, 0.0};

  // Both seed vertices already carry the seed edge, so each one's next-birth
  // clock runs at f(tree degree) = f(children + 1), same as later vertices.
  BirthQueue queue;
  queue.push({rng.exponential(f.evaluate(1)), 0});
  queue.push({rng.exponential(f.evaluate(1)), 1});

  while (t.size() < n) {
    PendingBirth e = queue.top();
    queue.pop();
    VertexId child = t.size();
    t.parent.push_back(e.individual);
    t.children[e.individual].push_back(child);
    t.children.emplace_back();
    t.degree[e.individual] += 1;
    t.degree.push_back(1);
    out.arrival_time.push_back(e.time);
    queue.push({e.time + rng.exponential(f.evaluate(t.degree[e.individual])), e.individual});
    queue.push({e.time + rng.exponential(f.evaluate(1)), child});
  }
  return out;
}

PopulationChain::PopulationChain(const AttachmentFunction& f, Rng& rng, std::uint32_t root_shift)
    : f_(&f), rng_(&rng), root_shift_(root_shift) {
  if (root_shift == 0) throw ConfigError("root_shift must be >= 1");
  root_rate_ = f.evaluate(root_shift);
}

void PopulationChain::step() {
  double total = root_rate_ + class_rate_.total();
  double gap = pending_gap_ >= 0.0 ? pending_gap_ : rng_->exponential(total);
  pending_gap_ = -1.0;
  time_ += gap;

  double u = rng_->uniform01() * total;
  if (u < root_rate_ || class_rate_.size() == 0) {
    root_children_ += 1;
    root_rate_ = f_->evaluate(root_shift_ + root_children_);
  } else {
    double cl_total = class_rate_.total();
    double v = (u - root_rate_) / cl_total;
    if (v >= 1.0) v = 1.0 - 1e-16;
    std::size_t c = class_rate_.sample(v);
    count_[c] -= 1;
    class_rate_.update(c, static_cast<double>(count_[c]) * f_->evaluate(c + 1));
    if (c + 1 >= count_.size()) {
      count_.push_back(0);
      class_rate_.push_back(0.0);
    }
    count_[c + 1] += 1;
    class_rate_.update(c + 1, static_cast<double>(count_[c + 1]) * f_->evaluate(c + 2));
  }
  if (count_.empty()) {
    count_.push_back(0);
    class_rate_.push_back(0.0);
  }
  count_[0] += 1;
  class_rate_.update(0, static_cast<double>(count_[0]) * f_->evaluate(1));
  pop_ += 1;
}

bool PopulationChain::step_before(double t_limit) {
  if (pending_gap_ < 0.0) {
    double total = root_rate_ + class_rate_.total();
    pending_gap_ = rng_->exponential(total);
  }
  if (time_ + pending_gap_ > t_limit) return false;
  step();
  return true;
}

double sample_y(const AttachmentFunction& f, double lambda, double tol, Rng& rng) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  constexpr std::uint64_t kCap = 10'000'000;
  constexpr int kWindow = 50;
  double ring[kWindow];
  double sigma = 0.0, y = 0.0;
  for (std::uint64_t i = 1; i <= kCap; ++i) {
    sigma += rng.exponential(f.evaluate(i));
    double term = std::exp(-lambda * sigma);
    y += term;
    std::uint64_t slot = (i - 1) % kWindow;
    if (i > kWindow && term < tol * 1e-3) {
      double old = ring[slot];
      double ratio = old > 0.0 ? std::pow(term / old, 1.0 / kWindow) : 0.0;
      ratio = std::min(ratio, 0.999);
      if (term * ratio / (1.0 - ratio) < tol) return y;
    }
    if (term == 0.0) return y;
    ring[slot] = term;
  }
  throw SeriesError("clock-sum draw did not converge within the term cap", y, kCap);
}

WSample sample_w_infinity(const AttachmentFunction& f, double lambda, StopRule horizon, Rng& rng) {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  WSample out;
  PopulationChain chain(f, rng);
  if (horizon.kind == StopRule::Kind::size) {
    std::uint64_t m = static_cast<std::uint64_t>(horizon.value);
    if (m < 2) throw ConfigError("size horizon must be >= 2");
    while (chain.population() < m) chain.step();
    out.stop_time = chain.time();
  } else {
    if (!(horizon.value > 0.0)) throw ConfigError("time horizon must be positive");
    while (chain.step_before(horizon.value)) {
    }
    out.stop_time = horizon.value;
  }
  out.population = chain.population();
  out.w = std::exp(-lambda * out.stop_time) * static_cast<double>(chain.population());
  out.horizon_warning = lambda * out.stop_time < std::log(1e4);
  return out;
}

std::vector<double> trajectory(const AttachmentFunction& f, double lambda,
                               const std::vector<double>& t_grid, Rng& rng) {
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw ConfigError("trajectory grid must be ascending");
  PopulationChain chain(f, rng);
  std::vector<double> path;
  path.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw ConfigError("trajectory grid times must be >= 0");
    while (chain.step_before(t)) {
    }
    path.push_back(std::exp(-lambda * t) * static_cast<double>(chain.population()));
  }
  return path;
}

}  // namespace grtree
