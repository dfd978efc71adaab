#include "grtree/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "grtree/centrality.hpp"
#include "grtree/ctbp.hpp"
#include "grtree/errors.hpp"
#include "grtree/treegen.hpp"
#include "json.hpp"

namespace grtree {

void parallel_for(std::uint64_t items, unsigned worker_count,
                  const std::function<void(std::uint64_t)>& fn) {
  if (worker_count == 0) throw ConfigError("worker_count must be >= 1");
  if (worker_count == 1 || items <= 1) {
    for (std::uint64_t i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= items) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned n_threads = static_cast<unsigned>(std::min<std::uint64_t>(worker_count, items));
  pool.reserve(n_threads);
  for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Auxiliary stream ids live far from the replica indices (< 2^32) so growth,
// tie draws, composite pools and bootstrap draws never share a stream.
constexpr std::uint64_t kTieStreamBit = 0x8000000000000000ull;
constexpr std::uint64_t kPoolBStreamBase = 0x4000000000000000ull;
constexpr std::uint64_t kBootstrapStream = 0x2000000000000000ull;

// Rank of the seed vertex in the psi order, arrival-blind: vertices with
// strictly smaller psi come first, and the seed's position inside its
// equal-psi class is the uniform draw u. Sharing one u across budgets keeps
// the recovery indicator exactly monotone in K.
std::uint32_t seed_vertex_rank(const JordanState& s, double u) {
  std::uint32_t psi0 = s.psi[0];
  std::uint64_t below = 0, equal = 0;
  for (std::uint32_t x : s.psi) {
    below += x < psi0;
    equal += x == psi0;
  }
  auto pos = static_cast<std::uint64_t>(u * static_cast<double>(equal));
  if (pos >= equal) pos = equal - 1;
  return static_cast<std::uint32_t>(below + pos + 1);
}

nlohmann::json model_meta(const AttachmentFunction& f, std::uint64_t master_seed) {
  return {{"model", nlohmann::json::parse(f.to_json())}, {"master_seed", master_seed}};
}

void sort_unique(std::vector<std::uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Table root_recovery_experiment(const AttachmentFunction& f, std::vector<std::uint32_t> n_list,
                               std::vector<std::uint32_t> k_list, std::uint32_t replicas,
                               std::uint64_t master_seed, unsigned workers) {
  if (replicas < 100) throw ConfigError("root recovery needs at least 100 replicas");
  if (n_list.empty() || k_list.empty())
    throw ConfigError("root recovery needs non-empty n_list and k_list");
  sort_unique(n_list);
  sort_unique(k_list);
  if (n_list.front() < 2) throw ConfigError("tree sizes start at 2");
  if (k_list.front() < 1) throw ConfigError("budgets start at 1");

  const std::size_t checkpoints = n_list.size();
  std::vector<std::uint32_t> rank(static_cast<std::size_t>(replicas) * checkpoints);
  parallel_for(replicas, workers, [&](std::uint64_t r) {
    TreeBuilder builder(f, master_seed, r);
    Rng tie(master_seed, r | kTieStreamBit);
    for (std::size_t i = 0; i < checkpoints; ++i) {
      while (builder.tree().size() < n_list[i]) builder.step();
      JordanState s = psi_all(builder.tree());
      rank[r * checkpoints + i] = seed_vertex_rank(s, tie.uniform01());
    }
  });

  Table t;
  t.name = "root-recovery";
  nlohmann::json meta = model_meta(f, master_seed);
  meta["experiment"] = "root-recovery";
  meta["replicas"] = replicas;
  meta["n_list"] = n_list;
  meta["k_list"] = k_list;
  meta["plot"] = {{"x", "n"},
                  {"y", {"success_rate"}},
                  {"series", {"K"}},
                  {"ci", {"ci_lo", "ci_hi"}}};
  t.meta_json = meta.dump();
  t.columns = {"n", "K", "successes", "replicas", "success_rate", "ci_lo", "ci_hi"};
  for (std::size_t i = 0; i < checkpoints; ++i) {
    for (std::uint32_t k : k_list) {
      std::uint64_t hits = 0;
      for (std::uint64_t r = 0; r < replicas; ++r) hits += rank[r * checkpoints + i] <= k;
      Interval ci = wilson_interval(hits, replicas);
      t.add_row({static_cast<std::int64_t>(n_list[i]), static_cast<std::int64_t>(k),
                 static_cast<std::int64_t>(hits), static_cast<std::int64_t>(replicas),
                 static_cast<double>(hits) / replicas, ci.lo, ci.hi});
    }
  }
  return t;
}

BudgetEstimate estimate_budget(const Table& recovery, double epsilon) {
  if (recovery.rows.empty()) throw ConfigError("budget estimate needs a non-empty recovery table");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  std::size_t ci_n = recovery.column_index("n");
  std::size_t ci_k = recovery.column_index("K");
  std::size_t ci_s = recovery.column_index("successes");
  std::size_t ci_r = recovery.column_index("replicas");

  auto as_int = [](const Cell& c) -> std::int64_t {
    if (std::holds_alternative<std::int64_t>(c)) return std::get<std::int64_t>(c);
    if (std::holds_alternative<double>(c)) return static_cast<std::int64_t>(std::get<double>(c));
    throw ConfigError("recovery table holds a non-numeric count");
  };

  std::int64_t n_max = 0;
  for (const auto& row : recovery.rows) n_max = std::max(n_max, as_int(row[ci_n]));

  // (K, successes, trials) at the largest n, ascending in K.
  std::vector<std::tuple<std::int64_t, std::uint64_t, std::uint64_t>> rows;
  for (const auto& row : recovery.rows)
    if (as_int(row[ci_n]) == n_max)
      rows.emplace_back(as_int(row[ci_k]), static_cast<std::uint64_t>(as_int(row[ci_s])),
                        static_cast<std::uint64_t>(as_int(row[ci_r])));
  std::sort(rows.begin(), rows.end());

  BudgetEstimate est;
  est.epsilon = epsilon;
  est.n = static_cast<std::uint32_t>(n_max);
  const double target = 1.0 - epsilon;
  for (const auto& [k, s, r] : rows) {
    if (r == 0) throw ConfigError("recovery table row with zero replicas");
    double rate = static_cast<double>(s) / static_cast<double>(r);
    Interval ci = wilson_interval(s, r);
    if (est.k_lo < 0 && ci.hi >= target) est.k_lo = k;
    if (est.k_hat < 0 && rate >= target) est.k_hat = k;
    if (est.k_hi < 0 && ci.lo >= target) est.k_hi = k;
  }
  est.censored = est.k_hat < 0;
  return est;
}

LineFit fit_budget_exponent(const std::vector<double>& epsilon,
                            const std::vector<double>& k_hat) {
  if (epsilon.size() != k_hat.size() || epsilon.size() < 3)
    throw ConfigError("budget exponent fit needs >= 3 (epsilon, k_hat) pairs");
  std::vector<double> x, y;
  x.reserve(epsilon.size());
  y.reserve(epsilon.size());
  for (std::size_t i = 0; i < epsilon.size(); ++i) {
    if (!(epsilon[i] > 0.0 && epsilon[i] < 1.0) || !(k_hat[i] >= 1.0))
      throw ConfigError("budget exponent fit needs epsilon in (0,1) and k_hat >= 1");
    x.push_back(std::log(1.0 / epsilon[i]));
    y.push_back(std::log(k_hat[i]));
  }
  return least_squares_line(x, y);
}

namespace {

// k_hat(eps) from a sorted rank sample: the m-th order statistic with
// m = ceil((1-eps) * count), the smallest budget whose empirical success
// rate reaches 1-eps.
std::uint32_t k_hat_from_ranks(const std::vector<std::uint32_t>& sorted_ranks, double eps) {
  auto count = static_cast<double>(sorted_ranks.size());
  auto m = static_cast<std::size_t>(std::ceil((1.0 - eps) * count - 1e-12));
  m = std::min(std::max<std::size_t>(m, 1), sorted_ranks.size());
  return sorted_ranks[m - 1];
}

}  // namespace

ScalingFit budget_scaling_fit(const AttachmentFunction& f, std::vector<double> epsilon_list,
                              std::uint32_t n, std::uint32_t replicas,
                              std::uint64_t master_seed, unsigned workers) {
  if (epsilon_list.size() < 3) throw ConfigError("budget scaling needs >= 3 epsilon values");
  for (double e : epsilon_list)
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (replicas < 100) throw ConfigError("budget scaling needs at least 100 replicas");
  if (n < 3) throw ConfigError("budget scaling needs trees of size >= 3");

  std::vector<std::uint32_t> ranks(replicas);
  parallel_for(replicas, workers, [&](std::uint64_t r) {
    GrowingTree t = grow(f, n, master_seed, r);
    JordanState s = psi_all(t);
    Rng tie(master_seed, r | kTieStreamBit);
    ranks[r] = seed_vertex_rank(s, tie.uniform01());
  });
  std::vector<std::uint32_t> sorted_ranks = ranks;
  std::sort(sorted_ranks.begin(), sorted_ranks.end());

  ScalingFit out;
  std::vector<double> k_hats;
  for (double e : epsilon_list) {
    std::uint32_t k = k_hat_from_ranks(sorted_ranks, e);
    k_hats.push_back(k);
    out.censored = out.censored || k >= n;
  }
  out.fit = fit_budget_exponent(epsilon_list, k_hats);

  // Bootstrap over replicas: resample the rank pool, refit, take the 95%
  // percentile interval of the slopes.
  constexpr int kBoot = 200;
  Rng boot(master_seed, kBootstrapStream);
  std::vector<double> slopes;
  slopes.reserve(kBoot);
  std::vector<std::uint32_t> resample(replicas);
  for (int b = 0; b < kBoot; ++b) {
    for (std::uint32_t i = 0; i < replicas; ++i)
      resample[i] = ranks[boot.below(replicas)];
    std::sort(resample.begin(), resample.end());
    std::vector<double> ks;
    ks.reserve(epsilon_list.size());
    for (double e : epsilon_list) ks.push_back(k_hat_from_ranks(resample, e));
    slopes.push_back(fit_budget_exponent(epsilon_list, ks).slope);
  }
  std::sort(slopes.begin(), slopes.end());
  out.slope_lo = quantile_sorted(slopes, 0.025);
  out.slope_hi = quantile_sorted(slopes, 0.975);

  out.k_hat_table.name = "budget-scaling";
  nlohmann::json meta = model_meta(f, master_seed);
  meta["experiment"] = "budget-scaling";
  meta["n"] = n;
  meta["replicas"] = replicas;
  meta["slope"] = out.fit.slope;
  meta["slope_ci"] = {out.slope_lo, out.slope_hi};
  meta["censored"] = out.censored;
  meta["plot"] = {{"x", "epsilon"}, {"y", {"k_hat"}}};
  out.k_hat_table.meta_json = meta.dump();
  out.k_hat_table.columns = {"epsilon", "k_hat"};
  for (std::size_t i = 0; i < epsilon_list.size(); ++i)
    out.k_hat_table.add_row({epsilon_list[i], static_cast<std::int64_t>(k_hats[i])});
  return out;
}

namespace {

// Ordered top-k as plain vertex ids, and as the partition into equal-psi
// groups (psi values drift upward every step, so comparisons must use only
// vertex identity and grouping).
struct TopKView {
  std::vector<VertexId> ordered;
  std::vector<std::vector<VertexId>> groups;
};

TopKView view_of(const std::vector<std::pair<std::uint32_t, VertexId>>& top) {
  TopKView v;
  v.ordered.reserve(top.size());
  for (std::size_t i = 0; i < top.size(); ++i) {
    v.ordered.push_back(top[i].second);
    if (i == 0 || top[i].first != top[i - 1].first) v.groups.emplace_back();
    v.groups.back().push_back(top[i].second);
  }
  return v;
}

// Removes the vertex born this step so that the list merely filling up while
// the tree is still small does not count as a change.
void strip_vertex(TopKView& v, VertexId fresh) {
  auto it = std::find(v.ordered.begin(), v.ordered.end(), fresh);
  if (it == v.ordered.end()) return;
  v.ordered.erase(it);
  for (auto g = v.groups.begin(); g != v.groups.end(); ++g) {
    auto gi = std::find(g->begin(), g->end(), fresh);
    if (gi != g->end()) {
      g->erase(gi);
      if (g->empty()) v.groups.erase(g);
      break;
    }
  }
}

}  // namespace

PersistenceResult persistence_experiment(const AttachmentFunction& f, std::uint32_t k,
                                         std::uint64_t n_max, std::uint32_t replicas,
                                         std::uint32_t windows, std::uint64_t master_seed,
                                         unsigned workers) {
  if (k < 1) throw ConfigError("persistence needs k >= 1");
  if (n_max < 1000) throw ConfigError("persistence needs n_max >= 1000");
  if (replicas < 1) throw ConfigError("persistence needs at least one replica");
  if (windows < 1 || (n_max >> windows) < 2)
    throw ConfigError("window count must satisfy n_max / 2^windows >= 2");

  PersistenceResult res;
  res.k = k;
  res.n_max = n_max;
  for (std::uint32_t j = windows; j >= 1; --j) res.window_lo.push_back(n_max >> j);

  res.replicas.assign(replicas, PersistenceReplica{});
  parallel_for(replicas, workers, [&](std::uint64_t r) {
    PersistenceReplica& rep = res.replicas[r];
    rep.window_changes_ordered.assign(windows, 0);
    rep.window_changes_grouped.assign(windows, 0);

    TreeBuilder builder(f, master_seed, r);
    TopKTracker tracker(builder.tree(), k);
    TopKView prev = view_of(tracker.top());
    VertexId prev_first = prev.ordered.front();
    std::size_t window = 0;  // cursor into res.window_lo, steps are increasing

    for (std::uint64_t n = 3; n <= n_max; ++n) {
      VertexId parent = builder.step();
      tracker.attach(parent);
      TopKView cur = view_of(tracker.top());
      TopKView stripped = cur;
      strip_vertex(stripped, static_cast<VertexId>(n - 1));

      bool changed_ordered = stripped.ordered != prev.ordered;
      bool changed_grouped = stripped.groups != prev.groups;
      VertexId cur_first = cur.ordered.front();
      bool changed_k1 = cur_first != prev_first;

      if (changed_ordered || changed_grouped) {
        while (window + 1 < res.window_lo.size() && n >= res.window_lo[window + 1]) ++window;
        bool in_windows = n >= res.window_lo.front();
        if (in_windows && changed_ordered) rep.window_changes_ordered[window] += 1;
        if (in_windows && changed_grouped) rep.window_changes_grouped[window] += 1;
        if (changed_ordered) rep.last_change_ordered = n;
        if (changed_grouped) rep.last_change_grouped = n;
      }
      if (changed_k1) rep.last_change_k1 = n;

      prev = std::move(cur);
      prev_first = cur_first;
    }
  });

  nlohmann::json base = model_meta(f, master_seed);
  base["experiment"] = "persistence";
  base["k"] = k;
  base["n_max"] = n_max;
  base["replicas"] = replicas;
  base["windows"] = windows;

  res.window_summary.name = "persistence-windows";
  {
    nlohmann::json meta = base;
    meta["plot"] = {{"x", "n_lo"},
                    {"y", {"frac_ordered", "frac_grouped"}},
                    {"ci", {"ci_lo_ordered", "ci_hi_ordered"}}};
    res.window_summary.meta_json = meta.dump();
  }
  res.window_summary.columns = {"window",       "n_lo",          "n_hi",
                                "frac_ordered", "ci_lo_ordered", "ci_hi_ordered",
                                "frac_grouped", "ci_lo_grouped", "ci_hi_grouped"};
  for (std::uint32_t w = 0; w < windows; ++w) {
    std::uint64_t hit_o = 0, hit_g = 0;
    for (const auto& rep : res.replicas) {
      hit_o += rep.window_changes_ordered[w] > 0;
      hit_g += rep.window_changes_grouped[w] > 0;
    }
    Interval ci_o = wilson_interval(hit_o, replicas);
    Interval ci_g = wilson_interval(hit_g, replicas);
    std::uint64_t hi = w + 1 < windows ? res.window_lo[w + 1] : n_max;
    res.window_summary.add_row({static_cast<std::int64_t>(w + 1),
                                static_cast<std::int64_t>(res.window_lo[w]),
                                static_cast<std::int64_t>(hi),
                                static_cast<double>(hit_o) / replicas, ci_o.lo, ci_o.hi,
                                static_cast<double>(hit_g) / replicas, ci_g.lo, ci_g.hi});
  }

  res.last_change_summary.name = "persistence-last-change";
  res.last_change_summary.meta_json = base.dump();
  res.last_change_summary.columns = {"rule", "min", "q25", "median", "q75", "q90", "max"};
  auto add_quantiles = [&](const std::string& rule, auto getter) {
    std::vector<double> v;
    v.reserve(replicas);
    for (const auto& rep : res.replicas) v.push_back(static_cast<double>(getter(rep)));
    std::sort(v.begin(), v.end());
    res.last_change_summary.add_row({rule, v.front(), quantile_sorted(v, 0.25),
                                     quantile_sorted(v, 0.5), quantile_sorted(v, 0.75),
                                     quantile_sorted(v, 0.9), v.back()});
  };
  add_quantiles("ordered", [](const PersistenceReplica& r) { return r.last_change_ordered; });
  add_quantiles("grouped", [](const PersistenceReplica& r) { return r.last_change_grouped; });
  add_quantiles("k1", [](const PersistenceReplica& r) { return r.last_change_k1; });
  return res;
}

Table terminal_centroid_report(const PersistenceResult& r) {
  if (r.replicas.empty()) throw ConfigError("terminal centroid report needs replicas");
  std::vector<double> v;
  v.reserve(r.replicas.size());
  for (const auto& rep : r.replicas) v.push_back(static_cast<double>(rep.last_change_k1));

  Table t;
  t.name = "terminal-centroid";
  nlohmann::json meta{{"experiment", "terminal-centroid"},
                      {"n_max", r.n_max},
                      {"median_last_change", median(v)}};
  t.meta_json = meta.dump();
  t.columns = {"replica", "last_change_step"};
  for (std::size_t i = 0; i < r.replicas.size(); ++i)
    t.add_row({static_cast<std::int64_t>(i),
               static_cast<std::int64_t>(r.replicas[i].last_change_k1)});
  return t;
}

RdeTestResult rde_fixed_point_test(const AttachmentFunction& f, double lambda_star,
                                   std::uint32_t pool_size, std::uint64_t master_seed,
                                   unsigned workers, std::uint64_t horizon_population) {
  if (pool_size < 1000) throw ConfigError("fixed-point test needs pool_size >= 1000");
  if (!(lambda_star > 0.0) || !std::isfinite(lambda_star))
    throw ConfigError("lambda_star must be positive and finite");

  RdeTestResult res;
  res.pool_size = pool_size;
  res.pool_a.assign(pool_size, 0.0);
  std::vector<std::uint8_t> warned(pool_size, 0);
  parallel_for(pool_size, workers, [&](std::uint64_t i) {
    Rng rng(master_seed, i);
    WSample s = sample_w_infinity(f, lambda_star, StopRule::at_size(horizon_population), rng);
    res.pool_a[i] = s.w;
    warned[i] = s.horizon_warning;
  });
  std::uint64_t warn_count = 0;
  for (auto w : warned) warn_count += w;
  res.horizon_warning_fraction = static_cast<double>(warn_count) / pool_size;

  // Composite draws: fresh arrival clocks, leaf values bootstrapped from pool
  // A. Truncation mirrors the Y sampler: stop once the discount alone is
  // negligible and its geometric tail estimate is below tol.
  const double tol = 1e-5;
  res.pool_b.assign(pool_size, 0.0);
  parallel_for(pool_size, workers, [&](std::uint64_t i) {
    Rng rng(master_seed, kPoolBStreamBase + i);
    constexpr int kRing = 50;
    double ring[kRing];
    double sigma = 0.0;
    double acc = 0.0;
    for (std::uint64_t j = 1;; ++j) {
      sigma += rng.exponential(f.evaluate(j));
      double discount = std::exp(-lambda_star * sigma);
      acc += discount * res.pool_a[rng.below(pool_size)];
      std::size_t slot = (j - 1) % kRing;
      if (j > kRing && discount < tol * 1e-3) {
        double ratio = std::pow(discount / ring[slot], 1.0 / kRing);
        ratio = std::min(ratio, 0.999);
        if (discount * ratio / (1.0 - ratio) < tol) break;
      }
      ring[slot] = discount;
      if (j >= 10'000'000)
        throw SeriesError("composite limit draw did not converge", acc, j);
    }
    res.pool_b[i] = acc;
  });

  res.ks = ks_two_sample(res.pool_a, res.pool_b);
  return res;
}

TailProfile tail_profile(std::vector<double> samples) {
  if (samples.size() < 10'000) throw ConfigError("tail profile needs >= 1e4 samples");
  std::sort(samples.begin(), samples.end());

  TailProfile out;
  out.survival.name = "tail-profile";
  out.survival.columns = {"x", "log_survival"};

  std::vector<double> fit_x, fit_y;
  std::vector<double> q_grid;
  for (int i = 0; i < 200; ++i) q_grid.push_back(0.50 + i * 0.0025);
  q_grid.push_back(0.999);
  for (double q : q_grid) {
    double x = quantile_sorted(samples, q);
    double ls = std::log(1.0 - q);
    out.survival.add_row({x, ls});
    if (q >= 0.90 - 1e-9 && q <= 0.99 + 1e-9) {
      fit_x.push_back(x);
      fit_y.push_back(ls);
    }
  }
  LineFit fit = least_squares_line(fit_x, fit_y);
  out.rate = -fit.slope;
  out.intercept = fit.intercept;
  out.max_abs_residual = fit.max_abs_residual;
  out.fit_lo = fit_x.front();
  out.fit_hi = fit_x.back();

  nlohmann::json meta{{"experiment", "tail-profile"},
                      {"samples", samples.size()},
                      {"rate", out.rate},
                      {"max_abs_residual", out.max_abs_residual},
                      {"fit_range", {out.fit_lo, out.fit_hi}},
                      {"plot", {{"x", "x"}, {"y", {"log_survival"}}}}};
  out.survival.meta_json = meta.dump();
  return out;
}

ConvergenceProfile convergence_profile(const AttachmentFunction& f, double lambda_star,
                                       std::vector<double> t_grid, std::uint32_t replicas,
                                       std::uint64_t master_seed, unsigned workers) {
  if (t_grid.size() < 2) throw ConfigError("convergence profile needs >= 2 grid points");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()))
    throw ConfigError("t_grid must be ascending");
  if (replicas < 100) throw ConfigError("convergence profile needs >= 100 replicas");

  const std::size_t grid = t_grid.size();
  // sup_dev[i * grid + j]: replica i, sup over grid points >= j of
  // |path - terminal|; sup_path[i]: sup of the normalized path itself.
  std::vector<double> sup_dev(static_cast<std::size_t>(replicas) * grid);
  std::vector<double> sup_path(replicas);
  parallel_for(replicas, workers, [&](std::uint64_t i) {
    Rng rng(master_seed, i);
    std::vector<double> path = trajectory(f, lambda_star, t_grid, rng);
    double terminal = path.back();
    double run = 0.0, run_path = 0.0;
    for (std::size_t j = grid; j-- > 0;) {
      run = std::max(run, std::abs(path[j] - terminal));
      run_path = std::max(run_path, path[j]);
      sup_dev[i * grid + j] = run;
    }
    sup_path[i] = run_path;
  });

  nlohmann::json base = model_meta(f, master_seed);
  base["experiment"] = "convergence-profile";
  base["lambda_star"] = lambda_star;
  base["replicas"] = replicas;
  base["t_grid"] = t_grid;

  ConvergenceProfile out;
  out.deviation.name = "convergence-deviation";
  {
    nlohmann::json meta = base;
    meta["plot"] = {{"x", "t"}, {"y", {"dev_q90"}}};
    out.deviation.meta_json = meta.dump();
  }
  out.deviation.columns = {"t", "dev_q90"};
  std::vector<double> col(replicas);
  for (std::size_t j = 0; j < grid; ++j) {
    for (std::uint32_t i = 0; i < replicas; ++i) col[i] = sup_dev[i * grid + j];
    std::sort(col.begin(), col.end());
    out.deviation.add_row({t_grid[j], quantile_sorted(col, 0.90)});
  }

  out.sup_tail.name = "convergence-sup-tail";
  {
    nlohmann::json meta = base;
    meta["plot"] = {{"x", "a"}, {"y", {"tail_prob"}}, {"ci", {"ci_lo", "ci_hi"}}};
    out.sup_tail.meta_json = meta.dump();
  }
  out.sup_tail.columns = {"a", "tail_prob", "ci_lo", "ci_hi"};
  for (double a : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    std::uint64_t hits = 0;
    for (double s : sup_path) hits += s >= a;
    Interval ci = wilson_interval(hits, replicas);
    out.sup_tail.add_row({a, static_cast<double>(hits) / replicas, ci.lo, ci.hi});
  }
  return out;
}

}  // namespace grtree
