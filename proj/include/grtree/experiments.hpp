#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grtree/attach_model.hpp"
#include "grtree/report.hpp"
#include "grtree/stats.hpp"

namespace grtree {

// Runs fn(0..items-1) across worker_count threads pulling from a shared
// counter. Results must depend only on the item index (give each item its own
// rng stream); the outcome is then identical for any worker count.
void parallel_for(std::uint64_t items, unsigned worker_count,
                  const std::function<void(std::uint64_t)>& fn);

struct ExperimentStat {
  std::string name;
  double value = 0.0;
  std::uint64_t samples = 0;
};

// A named bundle of result tables plus scalar statistics; config_json echoes
// the full configuration (model, seeds, sizes) needed to reproduce every
// random quantity.
struct ExperimentReport {
  std::string name;
  std::string config_json = "{}";
  std::vector<Table> tables;
  std::vector<ExperimentStat> stats;
};

// Grows `replicas` trees through the checkpoints in n_list and reports, for
// each (n, K), the fraction of replicas whose seed vertex lands in the top K
// by psi. Ties at the K-th smallest psi are settled by one uniform draw per
// replica-checkpoint shared across all K, so recovery is exactly monotone in
// K within a replica. Columns: n, K, successes, replicas, success_rate,
// ci_lo, ci_hi (Wilson 95%).
Table root_recovery_experiment(const AttachmentFunction& f, std::vector<std::uint32_t> n_list,
                               std::vector<std::uint32_t> k_list, std::uint32_t replicas,
                               std::uint64_t master_seed, unsigned workers = 1);

struct BudgetEstimate {
  double epsilon = 0.0;
  std::uint32_t n = 0;         // tree size the estimate was read at (largest in the table)
  std::int64_t k_hat = -1;     // smallest listed K with success_rate >= 1-epsilon
  std::int64_t k_lo = -1;      // smallest K whose Wilson upper band reaches 1-epsilon
  std::int64_t k_hi = -1;      // smallest K whose Wilson lower band reaches 1-epsilon
  bool censored = false;       // no listed K qualifies
};

// Reads a root_recovery_experiment table at its largest n.
BudgetEstimate estimate_budget(const Table& recovery, double epsilon);

// Least-squares slope of log k_hat against log(1/epsilon).
LineFit fit_budget_exponent(const std::vector<double>& epsilon,
                            const std::vector<double>& k_hat);

struct ScalingFit {
  LineFit fit;                // slope = fitted exponent of K(eps) against 1/eps
  double slope_lo = 0.0;      // bootstrap 95% percentile interval over replicas
  double slope_hi = 0.0;
  Table k_hat_table;          // (epsilon, k_hat)
  bool censored = false;      // some k_hat ran into the tree size
};

// Single-size budget scaling: each replica contributes the rank of the seed
// vertex (tie draw included), k_hat(eps) is the ceil((1-eps)*replicas)-th
// order statistic of those ranks, i.e. the smallest budget whose empirical
// success rate reaches 1-eps.
ScalingFit budget_scaling_fit(const AttachmentFunction& f, std::vector<double> epsilon_list,
                              std::uint32_t n, std::uint32_t replicas,
                              std::uint64_t master_seed, unsigned workers = 1);

struct PersistenceReplica {
  // Last growth step whose top-K differed from the previous step's, ignoring
  // the vertex born that step while the list is still filling; 0 = no change
  // observed. "ordered" compares the (psi, arrival)-ordered vertex list;
  // "grouped" compares only the partition into equal-psi groups, so rotations
  // inside a tie do not fire; k1 watches the first entry only.
  std::uint64_t last_change_ordered = 0;
  std::uint64_t last_change_grouped = 0;
  std::uint64_t last_change_k1 = 0;
  std::vector<std::uint32_t> window_changes_ordered;  // earliest window first
  std::vector<std::uint32_t> window_changes_grouped;
};

struct PersistenceResult {
  std::uint32_t k = 0;
  std::uint64_t n_max = 0;
  // Dyadic window bounds: window i covers [window_lo[i], window_lo[i+1]), the
  // last one [n_max/2, n_max].
  std::vector<std::uint64_t> window_lo;
  std::vector<PersistenceReplica> replicas;
  Table window_summary;       // per-window change fractions, both rules, Wilson CIs
  Table last_change_summary;  // quantiles of the three last-change step distributions
};

PersistenceResult persistence_experiment(const AttachmentFunction& f, std::uint32_t k,
                                         std::uint64_t n_max, std::uint32_t replicas,
                                         std::uint32_t windows, std::uint64_t master_seed,
                                         unsigned workers = 1);

// Per-replica last step at which the smallest-psi vertex changed (K=1 slice
// of the persistence log); median goes into the table metadata.
Table terminal_centroid_report(const PersistenceResult& r);

struct RdeTestResult {
  double ks = 0.0;
  std::uint32_t pool_size = 0;
  double horizon_warning_fraction = 0.0;  // pool-A draws stopped short of the horizon target
  std::vector<double> pool_a;             // direct limit samples
  std::vector<double> pool_b;             // composite resampled draws
};

// Distributional fixed-point check: pool A holds direct normalized-limit
// samples; pool B rebuilds the limit from fresh arrival clocks with leaf
// values resampled out of pool A. Returns the two-sample KS distance.
RdeTestResult rde_fixed_point_test(const AttachmentFunction& f, double lambda_star,
                                   std::uint32_t pool_size, std::uint64_t master_seed,
                                   unsigned workers = 1,
                                   std::uint64_t horizon_population = 10000);

struct TailProfile {
  Table survival;       // (x, log_survival) over the [q50, q99.9] quantile range
  double rate = 0.0;    // minus the fitted slope of log-survival on [q90, q99]
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  double fit_lo = 0.0;  // x-range the line was fitted on
  double fit_hi = 0.0;
};

// Exponential-tail diagnostic for a sample pool (needs >= 1e4 points).
TailProfile tail_profile(std::vector<double> samples);

struct ConvergenceProfile {
  Table deviation;  // (t, dev_q90): 90th percentile of sup_{s >= t} |path(s) - terminal|
  Table sup_tail;   // (a, tail_prob, ci_lo, ci_hi): P(sup over the grid >= a)
};

// Runs `replicas` normalized population paths over t_grid; each path's
// terminal value stands in for its limit, and deviations are measured from
// it. Decay of dev_q90 across t is the associated property check.
ConvergenceProfile convergence_profile(const AttachmentFunction& f, double lambda_star,
                                       std::vector<double> t_grid, std::uint32_t replicas,
                                       std::uint64_t master_seed, unsigned workers = 1);

}  // namespace grtree
