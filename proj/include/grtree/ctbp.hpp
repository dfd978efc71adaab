#pragma once

#include <cstdint>
#include <vector>

#include "grtree/attach_model.hpp"
#include "grtree/rng.hpp"
#include "grtree/treegen.hpp"

namespace grtree {

struct StopRule {
  enum class Kind { size, time };
  Kind kind = Kind::size;
  double value = 0.0;
  static StopRule at_size(std::uint64_t m) { return {Kind::size, static_cast<double>(m)}; }
  static StopRule at_time(double t) { return {Kind::time, t}; }
};

struct BpEvent {
  double time;
  std::uint32_t parent;
};

// Full per-individual record of a continuous-time branching run. Individuals
// are numbered in birth order; the root is 0 with birth_time 0. An individual
// with c previous children waits Exp(f(shift+c)) for its next birth, where
// shift is 1 except possibly for the root (root_shift k starts the root's
// inter-arrival clocks at f(k), continuing a degree-k vertex).
struct BPRecord {
  std::uint32_t root_shift = 1;
  double stop_time = 0.0;
  std::vector<double> birth_time;
  std::vector<std::uint32_t> parent;  // kNoParent for the root
  std::vector<std::uint32_t> child_count;
  std::vector<BpEvent> events;  // birth order

  std::uint64_t population_at(double t) const;
};

// Event-driven simulation; one pending birth per individual in a (time,
// index)-ordered queue, ties broken toward the earlier-born individual.
// Throws ResourceCapError when the population would exceed max_individuals.
BPRecord simulate_ctbp(const AttachmentFunction& f, StopRule stop, Rng& rng,
                       std::uint32_t root_shift = 1, std::uint64_t max_individuals = 20'000'000);

// Two branching runs racing from the two seed vertices (with the seed edge
// between them), merged into one event stream; attaching each birth to its
// parent reproduces the discrete attachment tree in arrival law, with the
// arrival clock times returned alongside.
struct EmbeddingResult {
  GrowingTree tree;
  std::vector<double> arrival_time;  // arrival_time[0] = arrival_time[1] = 0
};
EmbeddingResult simulate_embedding(const AttachmentFunction& f, std::uint32_t n,
                                   std::uint64_t master_seed, std::uint64_t stream = 0);

// Jump-chain view of the same process when only population size and event
// times are needed: holding times are Exp(total rate) and the firing
// individual is drawn by rate, grouped by child count so each step costs
// O(log max-children). Root handled separately to honor root_shift.
class PopulationChain {
 public:
  PopulationChain(const AttachmentFunction& f, Rng& rng, std::uint32_t root_shift = 1);

  // Commits the next birth and returns true, unless it would land after
  // t_limit, in which case the state is left at the pre-birth population.
  bool step_before(double t_limit);
  void step();

  std::uint64_t population() const { return pop_; }
  double time() const { return time_; }

 private:
  const AttachmentFunction* f_;
  Rng* rng_;
  WeightedIndex class_rate_;          // index c: (count of c-child individuals) * f(c+1)
  std::vector<std::uint64_t> count_;  // non-root individuals by child count
  std::uint32_t root_children_ = 0;
  std::uint32_t root_shift_;
  double root_rate_;
  double pending_gap_ = -1.0;  // holding time drawn but not yet committed
  double time_ = 0.0;
  std::uint64_t pop_ = 1;
};

// One draw of Y = sum_i exp(-lambda * sigma_i) over the arrival clocks
// sigma_i = E_1 + ... + E_i, E_i ~ Exp(f(i)). Stops once the current term is
// below tol*1e-3 and a geometric tail estimate (ratio averaged over the last
// 50 terms, capped at 0.999) is below tol. At lambda = lambda_star its mean
// is exactly 1. Throws SeriesError at 1e7 terms.
double sample_y(const AttachmentFunction& f, double lambda, double tol, Rng& rng);

struct WSample {
  double w = 0.0;
  double stop_time = 0.0;
  std::uint64_t population = 0;
  bool horizon_warning = false;  // set when exp(lambda * stop_time) < 1e4
};

// Martingale-limit draw: runs the population to the horizon (default: size
// 1e6, which bounds the event count regardless of f) and returns
// exp(-lambda * T) * Z(T).
WSample sample_w_infinity(const AttachmentFunction& f, double lambda, StopRule horizon, Rng& rng);

// One path of t -> exp(-lambda * t) * Z(t) evaluated on an ascending grid.
std::vector<double> trajectory(const AttachmentFunction& f, double lambda,
                               const std::vector<double>& t_grid, Rng& rng);

}  // namespace grtree
