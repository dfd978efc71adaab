#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grtree/attach_model.hpp"
#include "grtree/centrality.hpp"
#include "grtree/ctbp.hpp"
#include "grtree/errors.hpp"
#include "grtree/experiments.hpp"
#include "grtree/malthusian.hpp"
#include "grtree/report.hpp"
#include "grtree/rng.hpp"
#include "grtree/treegen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace grtree;

namespace {

// Salts for deriving sub-seeds when one command runs several independent
// sample pools; each pool then uses streams 0..count-1 under its own seed.
constexpr std::uint64_t kSaltYPool = 1;
constexpr std::uint64_t kSaltWPool = 2;
constexpr std::uint64_t kSaltConvergence = 3;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
};

json load_config(const CommonArgs& a, const std::string& command) {
  json cfg = json::object();
  if (!a.config_path.empty()) {
    std::ifstream in(a.config_path);
    if (!in) throw ConfigError("cannot open config file: " + a.config_path);
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
  }
  if (a.seed) cfg["master_seed"] = *a.seed;
  if (a.workers) cfg["worker_count"] = *a.workers;
  if (a.out_dir) cfg["output_dir"] = *a.out_dir;
  if (cfg.contains("experiment")) {
    if (!cfg["experiment"].is_string() || cfg["experiment"].get<std::string>() != command)
      throw ConfigError("config experiment '" + cfg["experiment"].dump() +
                        "' does not match subcommand '" + command + "'");
  } else {
    cfg["experiment"] = command;
  }
  return cfg;
}

void check_keys(const json& cfg, std::initializer_list<const char*> extra, const char* cmd) {
  static const char* kCommon[] = {"experiment", "model", "master_seed", "worker_count",
                                  "output_dir"};
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool ok = false;
    for (const char* k : kCommon) ok = ok || it.key() == k;
    for (const char* k : extra) ok = ok || it.key() == k;
    if (!ok)
      throw ConfigError("unknown config field '" + it.key() + "' for " + cmd);
  }
}

template <typename T>
T field(const json& cfg, const char* key) {
  if (!cfg.contains(key))
    throw ConfigError(std::string("missing config field '") + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& cfg, const char* key, T def) {
  return cfg.contains(key) ? field<T>(cfg, key) : def;
}

AttachmentFunction model_of(const json& cfg) {
  if (!cfg.contains("model")) throw ConfigError("missing config field 'model'");
  return AttachmentFunction::from_json(cfg.at("model").dump());
}

std::uint64_t seed_of(const json& cfg) { return field<std::uint64_t>(cfg, "master_seed"); }

unsigned workers_of(const json& cfg) {
  auto w = field_or<std::uint64_t>(cfg, "worker_count", 1);
  if (w < 1 || w > 1024) throw ConfigError("worker_count must be in [1, 1024]");
  return static_cast<unsigned>(w);
}

std::uint32_t size_field(const json& cfg, const char* key) {
  auto v = field<std::uint64_t>(cfg, key);
  if (v > 0xfffffffeull) throw ConfigError(std::string(key) + " exceeds the 2^32-2 vertex cap");
  return static_cast<std::uint32_t>(v);
}

std::string stem_for(const std::string& cmd, const AttachmentFunction& f, std::uint64_t seed) {
  return cmd + "-" + f.slug() + "-" + std::to_string(seed);
}

// Collects output files plus their hashes and writes the manifest last, so a
// run that dies mid-way leaves either no manifest or one flagging the failure.
struct Emitter {
  fs::path dir;
  Manifest manifest;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Emitter(const std::string& command, const json& cfg) {
    dir = field_or<std::string>(cfg, "output_dir", ".");
    fs::create_directories(dir);
    manifest.command = command;
    manifest.config_json = cfg.dump();
  }

  void write_text(const std::string& filename, const std::string& bytes) {
    fs::path p = dir / filename;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InternalError("cannot open for writing: " + p.string());
    out << bytes;
    if (!out) throw InternalError("short write: " + p.string());
    manifest.outputs.emplace_back(filename, content_hash(bytes));
  }

  void write_table(const Table& t, const std::string& filename) {
    std::ostringstream ss;
    write_table_csv(t, ss);
    write_text(filename, ss.str());
  }

  void finish(const std::string& stem, const std::string& status) {
    manifest.status = status;
    manifest.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fs::path p = dir / (stem + ".manifest.json");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InternalError("cannot open for writing: " + p.string());
    out << manifest_json(manifest);
  }
};

// Runs the body and always leaves a manifest behind; a resource-cap abort is
// recorded (with whatever outputs were completed) before propagating.
int emit_guarded(Emitter& em, const std::string& stem, const std::function<int()>& body) {
  try {
    int rc = body();
    em.finish(stem, rc == 0 ? "ok" : "validation-failed");
    return rc;
  } catch (const ResourceCapError&) {
    em.finish(stem, "resource-cap");
    throw;
  } catch (const SeriesError&) {
    em.finish(stem, "resource-cap");
    throw;
  }
}

int cmd_solve_malthusian(const CommonArgs& args, std::optional<double> tol_flag) {
  json cfg = load_config(args, "solve-malthusian");
  if (tol_flag) cfg["tolerance"] = *tol_flag;
  check_keys(cfg, {"tolerance"}, "solve-malthusian");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  double tol = field_or<double>(cfg, "tolerance", 1e-9);

  Emitter em("solve-malthusian", cfg);
  std::string stem = stem_for("solve-malthusian", f, seed);
  return emit_guarded(em, stem, [&] {
    MalthusianSolution sol = solve_malthusian(f, tol);
    DegreePmf pmf = degree_pmf(f, sol.lambda_star, 64);
    json out{{"model", json::parse(f.to_json())},
             {"lambda_star", sol.lambda_star},
             {"bracket", {sol.bracket_lo, sol.bracket_hi}},
             {"domain_lower", sol.domain_lower},
             {"truncation_depth", sol.truncation_depth},
             {"tail_bound", sol.tail_bound},
             {"assumption_limsup_ok", check_assumption_limsup(f, sol)},
             {"degree_pmf_head", std::vector<double>(pmf.p.begin(), pmf.p.begin() + 16)},
             {"pmf_residual_64", pmf.residual}};
    em.write_text(stem + ".json", out.dump(2) + "\n");
    std::cout << "lambda_star = " << sol.lambda_star << " (bracket width "
              << sol.bracket_hi - sol.bracket_lo << ", tail bound " << sol.tail_bound << ")\n";
    return 0;
  });
}

int cmd_validate_model(const CommonArgs& args) {
  json cfg = load_config(args, "validate-model");
  check_keys(cfg, {}, "validate-model");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);

  Emitter em("validate-model", cfg);
  std::string stem = stem_for("validate-model", f, seed);
  return emit_guarded(em, stem, [&] {
    ValidationReport report = validate(f);
    em.write_text(stem + ".json", report.to_json() + "\n");
    for (const auto& c : report.checks)
      std::cout << (c.passed ? "  ok   " : "  FAIL ") << c.name
                << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
    std::cout << "validation " << (report.passed ? "passed" : "failed") << "\n";
    return report.passed ? 0 : 2;
  });
}

int cmd_grow(const CommonArgs& args, std::optional<std::uint64_t> n_flag) {
  json cfg = load_config(args, "grow");
  if (n_flag) cfg["n"] = *n_flag;
  check_keys(cfg, {"n"}, "grow");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  std::uint32_t n = size_field(cfg, "n");

  Emitter em("grow", cfg);
  std::string stem = stem_for("grow", f, seed);
  return emit_guarded(em, stem, [&] {
    GrowingTree t = grow(f, n, seed);
    std::ostringstream ss;
    write_tree(t, ss);
    em.write_text(stem + ".tree", ss.str());
    std::cout << "grew tree: n = " << t.size() << ", edges = " << t.size() - 1 << "\n";
    return 0;
  });
}

Table psi_table(const GrowingTree& t, const JordanState& s) {
  Table out;
  out.name = "centrality";
  json meta{{"experiment", "centrality"},
            {"model", json::parse(t.model.to_json())},
            {"master_seed", t.seed},
            {"n", t.size()}};
  out.meta_json = meta.dump();
  out.columns = {"arrival_index", "degree", "subtree_size", "psi"};
  for (std::uint32_t v = 0; v < t.size(); ++v)
    out.add_row({static_cast<std::int64_t>(v + 1), static_cast<std::int64_t>(t.degree[v]),
                 static_cast<std::int64_t>(s.subtree_size[v]),
                 static_cast<std::int64_t>(s.psi[v])});
  return out;
}

int cmd_centrality(const CommonArgs& args, std::string tree_flag,
                   std::optional<std::uint64_t> n_flag) {
  json cfg = load_config(args, "centrality");
  if (!tree_flag.empty()) cfg["tree_file"] = tree_flag;
  if (n_flag) cfg["n"] = *n_flag;
  check_keys(cfg, {"n", "tree_file"}, "centrality");

  GrowingTree t;
  if (cfg.contains("tree_file")) {
    auto path = field<std::string>(cfg, "tree_file");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tree file: " + path);
    t = read_tree(in);
  } else {
    t = grow(model_of(cfg), size_field(cfg, "n"), seed_of(cfg));
  }

  Emitter em("centrality", cfg);
  std::string stem = stem_for("centrality", t.model, t.seed);
  return emit_guarded(em, stem, [&] {
    JordanState s = psi_all(t);
    em.write_table(psi_table(t, s), stem + ".csv");
    std::vector<VertexId> best = top_k(s, std::min<std::uint32_t>(3, t.size()));
    std::cout << "n = " << t.size() << ", centroid arrival_index = " << best[0] + 1
              << " with psi = " << s.psi[best[0]] << "\n";
    return 0;
  });
}

int cmd_rootfind(const CommonArgs& args, std::optional<std::uint64_t> replicas_flag) {
  json cfg = load_config(args, "rootfind");
  if (replicas_flag) cfg["replicas"] = *replicas_flag;
  check_keys(cfg, {"n_list", "K_list", "replicas", "epsilon_list", "fit_scaling"}, "rootfind");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  auto n_list = field<std::vector<std::uint32_t>>(cfg, "n_list");
  auto k_list = field<std::vector<std::uint32_t>>(cfg, "K_list");
  auto replicas = size_field(cfg, "replicas");
  unsigned workers = workers_of(cfg);

  Emitter em("rootfind", cfg);
  std::string stem = stem_for("rootfind", f, seed);
  return emit_guarded(em, stem, [&] {
    Table recovery = root_recovery_experiment(f, n_list, k_list, replicas, seed, workers);
    em.write_table(recovery, stem + ".csv");

    if (cfg.contains("epsilon_list")) {
      auto eps_list = field<std::vector<double>>(cfg, "epsilon_list");
      Table budget;
      budget.name = "budget-estimates";
      json meta = json::parse(recovery.meta_json);
      meta["experiment"] = "budget-estimates";
      budget.meta_json = meta.dump();
      budget.columns = {"epsilon", "n", "k_hat", "k_lo", "k_hi", "censored"};
      for (double eps : eps_list) {
        BudgetEstimate est = estimate_budget(recovery, eps);
        budget.add_row({est.epsilon, static_cast<std::int64_t>(est.n), est.k_hat, est.k_lo,
                        est.k_hi, static_cast<std::int64_t>(est.censored)});
        std::cout << "K_hat(" << eps << ") = "
                  << (est.censored ? std::string("censored") : std::to_string(est.k_hat))
                  << "\n";
      }
      em.write_table(budget, stem + "-budget.csv");

      if (field_or<bool>(cfg, "fit_scaling", false)) {
        std::uint32_t n_fit = *std::max_element(n_list.begin(), n_list.end());
        ScalingFit fit = budget_scaling_fit(f, eps_list, n_fit, replicas, seed, workers);
        em.write_table(fit.k_hat_table, stem + "-scaling.csv");
        std::cout << "budget scaling slope = " << fit.fit.slope << " (bootstrap 95% ["
                  << fit.slope_lo << ", " << fit.slope_hi << "]"
                  << (fit.censored ? ", censored" : "") << ")\n";
      }
    }
    return 0;
  });
}

int cmd_persistence(const CommonArgs& args, std::optional<std::uint64_t> k_flag,
                    std::optional<std::uint64_t> n_max_flag,
                    std::optional<std::uint64_t> replicas_flag,
                    std::optional<std::uint64_t> windows_flag) {
  json cfg = load_config(args, "persistence");
  if (k_flag) cfg["k"] = *k_flag;
  if (n_max_flag) cfg["n_max"] = *n_max_flag;
  if (replicas_flag) cfg["replicas"] = *replicas_flag;
  if (windows_flag) cfg["checkpoints"] = *windows_flag;
  check_keys(cfg, {"k", "n_max", "replicas", "checkpoints"}, "persistence");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  auto k = size_field(cfg, "k");
  auto n_max = field<std::uint64_t>(cfg, "n_max");
  auto replicas = size_field(cfg, "replicas");
  auto windows = static_cast<std::uint32_t>(field_or<std::uint64_t>(cfg, "checkpoints", 8));
  unsigned workers = workers_of(cfg);

  Emitter em("persistence", cfg);
  std::string stem = stem_for("persistence", f, seed);
  return emit_guarded(em, stem, [&] {
    PersistenceResult res = persistence_experiment(f, k, n_max, replicas, windows, seed, workers);
    em.write_table(res.window_summary, stem + ".csv");
    em.write_table(res.last_change_summary, stem + "-last-change.csv");
    em.write_table(terminal_centroid_report(res), stem + "-terminal.csv");
    std::vector<double> last;
    for (const auto& rep : res.replicas)
      last.push_back(static_cast<double>(rep.last_change_ordered));
    std::cout << "median last top-" << k << " change step = " << median(last) << " of n_max "
              << n_max << "\n";
    return 0;
  });
}

int cmd_ctbp_sample(const CommonArgs& args, std::optional<std::uint64_t> stop_size_flag,
                    std::optional<double> stop_time_flag,
                    std::optional<std::uint64_t> root_shift_flag) {
  json cfg = load_config(args, "ctbp-sample");
  if (stop_size_flag) cfg["stop_size"] = *stop_size_flag;
  if (stop_time_flag) cfg["stop_time"] = *stop_time_flag;
  if (root_shift_flag) cfg["root_shift"] = *root_shift_flag;
  check_keys(cfg, {"stop_size", "stop_time", "root_shift", "max_individuals"}, "ctbp-sample");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  if (cfg.contains("stop_size") == cfg.contains("stop_time"))
    throw ConfigError("ctbp-sample needs exactly one of stop_size / stop_time");
  StopRule stop = cfg.contains("stop_size")
                      ? StopRule::at_size(field<std::uint64_t>(cfg, "stop_size"))
                      : StopRule::at_time(field<double>(cfg, "stop_time"));
  auto root_shift = static_cast<std::uint32_t>(field_or<std::uint64_t>(cfg, "root_shift", 1));
  auto cap = field_or<std::uint64_t>(cfg, "max_individuals", 20'000'000);

  Emitter em("ctbp-sample", cfg);
  std::string stem = stem_for("ctbp-sample", f, seed);
  return emit_guarded(em, stem, [&] {
    Rng rng(seed, 0);
    BPRecord rec = simulate_ctbp(f, stop, rng, root_shift, cap);
    Table t;
    t.name = "ctbp-events";
    json meta = json::parse(em.manifest.config_json);
    meta["lineage"] = "event k births individual with arrival index k+1";
    t.meta_json = meta.dump();
    t.columns = {"event_index", "time", "parent_arrival_index"};
    for (std::size_t i = 0; i < rec.events.size(); ++i)
      t.add_row({static_cast<std::int64_t>(i + 1), rec.events[i].time,
                 static_cast<std::int64_t>(rec.events[i].parent + 1)});
    em.write_table(t, stem + ".csv");
    std::cout << "population " << rec.birth_time.size() << " at stop time " << rec.stop_time
              << "\n";
    return 0;
  });
}

int cmd_limit_stats(const CommonArgs& args, std::optional<std::uint64_t> pool_flag) {
  json cfg = load_config(args, "limit-stats");
  if (pool_flag) cfg["pool_size"] = *pool_flag;
  check_keys(cfg, {"pool_size", "replicas", "t_grid", "horizon_population", "tolerance"},
             "limit-stats");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  auto pool_size = size_field(cfg, "pool_size");
  if (pool_size < 100) throw ConfigError("limit-stats needs pool_size >= 100");
  auto horizon = field_or<std::uint64_t>(cfg, "horizon_population", 10000);
  double tol = field_or<double>(cfg, "tolerance", 1e-9);
  unsigned workers = workers_of(cfg);

  Emitter em("limit-stats", cfg);
  std::string stem = stem_for("limit-stats", f, seed);
  return emit_guarded(em, stem, [&] {
    MalthusianSolution sol = solve_malthusian(f, tol);
    const double lam = sol.lambda_star;

    std::uint64_t seed_y = derive_stream_seed(seed, kSaltYPool);
    std::uint64_t seed_w = derive_stream_seed(seed, kSaltWPool);
    std::vector<double> ys(pool_size), ws(pool_size);
    std::vector<std::uint8_t> warn(pool_size, 0);
    parallel_for(pool_size, workers, [&](std::uint64_t i) {
      Rng ry(seed_y, i);
      ys[i] = sample_y(f, lam, 1e-6, ry);
      Rng rw(seed_w, i);
      WSample s = sample_w_infinity(f, lam, StopRule::at_size(horizon), rw);
      ws[i] = s.w;
      warn[i] = s.horizon_warning;
    });

    double mean_y = 0.0, mean_w = 0.0;
    for (std::uint32_t i = 0; i < pool_size; ++i) {
      mean_y += ys[i];
      mean_w += ws[i];
    }
    mean_y /= pool_size;
    mean_w /= pool_size;
    double var_y = 0.0;
    for (double y : ys) var_y += (y - mean_y) * (y - mean_y);
    double se_y = std::sqrt(var_y / pool_size / std::max<std::uint32_t>(pool_size - 1, 1));
    std::uint64_t warns = 0;
    for (auto w : warn) warns += w;

    json meta = json::parse(em.manifest.config_json);
    meta["lambda_star"] = lam;
    auto one_column = [&](const std::string& name, const std::vector<double>& v,
                          std::uint64_t pool_seed, json extra) {
      Table t;
      t.name = name;
      json m = meta;
      m["derived_seed"] = pool_seed;
      m.update(extra);
      t.meta_json = m.dump();
      t.columns = {name};
      for (double x : v) t.add_row({x});
      return t;
    };
    em.write_table(one_column("y", ys, seed_y, json{{"mean_y", mean_y}, {"se_y", se_y}}),
                   stem + "-y.csv");
    em.write_table(one_column("w", ws, seed_w,
                              json{{"horizon_population", horizon},
                                   {"mean_w", mean_w},
                                   {"horizon_warning_fraction",
                                    static_cast<double>(warns) / pool_size}}),
                   stem + "-w.csv");
    std::cout << "lambda_star = " << lam << ", mean Y = " << mean_y << " (se " << se_y
              << "), mean W = " << mean_w << "\n";

    if (pool_size >= 10000) {
      TailProfile tail = tail_profile(ws);
      em.write_table(tail.survival, stem + "-tail.csv");
      std::cout << "W tail decay rate = " << tail.rate << " (max residual "
                << tail.max_abs_residual << " on [" << tail.fit_lo << ", " << tail.fit_hi
                << "])\n";
    }

    if (cfg.contains("t_grid")) {
      auto t_grid = field<std::vector<double>>(cfg, "t_grid");
      auto replicas = static_cast<std::uint32_t>(field_or<std::uint64_t>(cfg, "replicas", 1000));
      std::uint64_t seed_c = derive_stream_seed(seed, kSaltConvergence);
      ConvergenceProfile prof = convergence_profile(f, lam, t_grid, replicas, seed_c, workers);
      em.write_table(prof.deviation, stem + "-deviation.csv");
      em.write_table(prof.sup_tail, stem + "-sup-tail.csv");
      std::cout << "convergence profile over " << t_grid.size() << " grid points, " << replicas
                << " paths\n";
    }
    return 0;
  });
}

int cmd_rde_test(const CommonArgs& args, std::optional<std::uint64_t> pool_flag,
                 std::optional<double> threshold_flag) {
  json cfg = load_config(args, "rde-test");
  if (pool_flag) cfg["pool_size"] = *pool_flag;
  if (threshold_flag) cfg["threshold"] = *threshold_flag;
  check_keys(cfg, {"pool_size", "threshold", "horizon_population"}, "rde-test");
  AttachmentFunction f = model_of(cfg);
  std::uint64_t seed = seed_of(cfg);
  auto pool_size = size_field(cfg, "pool_size");
  double threshold = field_or<double>(cfg, "threshold", 0.03);
  auto horizon = field_or<std::uint64_t>(cfg, "horizon_population", 10000);
  unsigned workers = workers_of(cfg);

  Emitter em("rde-test", cfg);
  std::string stem = stem_for("rde-test", f, seed);
  return emit_guarded(em, stem, [&] {
    MalthusianSolution sol = solve_malthusian(f);
    RdeTestResult res =
        rde_fixed_point_test(f, sol.lambda_star, pool_size, seed, workers, horizon);

    Table pools;
    pools.name = "rde-pools";
    json meta = json::parse(em.manifest.config_json);
    meta["lambda_star"] = sol.lambda_star;
    meta["ks"] = res.ks;
    meta["threshold"] = threshold;
    meta["horizon_warning_fraction"] = res.horizon_warning_fraction;
    pools.meta_json = meta.dump();
    pools.columns = {"replica", "w_direct", "w_composite"};
    for (std::uint32_t i = 0; i < pool_size; ++i)
      pools.add_row({static_cast<std::int64_t>(i), res.pool_a[i], res.pool_b[i]});
    em.write_table(pools, stem + ".csv");

    json verdict{{"ks", res.ks},
                 {"threshold", threshold},
                 {"pass", res.ks < threshold},
                 {"pool_size", pool_size},
                 {"lambda_star", sol.lambda_star},
                 {"horizon_warning_fraction", res.horizon_warning_fraction}};
    em.write_text(stem + ".json", verdict.dump(2) + "\n");
    std::cout << "two-sample KS = " << res.ks << " against threshold " << threshold << ": "
              << (res.ks < threshold ? "PASS" : "FAIL") << "\n";
    return 0;
  });
}

int cmd_report(const CommonArgs& args, std::string table_flag) {
  json cfg = load_config(args, "report");
  if (!table_flag.empty()) cfg["table_file"] = table_flag;
  check_keys(cfg, {"table_file"}, "report");
  auto path = field<std::string>(cfg, "table_file");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file: " + path);
  std::string stem = fs::path(path).stem().string();
  Table t = read_table_csv(in, stem);

  Emitter em("report", cfg);
  return emit_guarded(em, stem + "-long", [&] {
    Table lf = long_format(t);
    em.write_table(lf, stem + "-long.csv");
    std::cout << "rendered " << lf.rows.size() << " long-format rows from " << t.rows.size()
              << " input rows\n";
    return 0;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growing random trees: attachment models, Jordan-centrality root finding, "
               "branching-process limit diagnostics"};
  app.require_subcommand(1);

  std::function<int()> run;
  auto add_common = [&](CLI::App* sub, CommonArgs& c) {
    sub->add_option("-c,--config", c.config_path, "JSON config file");
    sub->add_option("--seed", c.seed, "master seed (overrides config)");
    sub->add_option("--workers", c.workers, "worker thread count (overrides config)");
    sub->add_option("-o,--out", c.out_dir, "output directory (overrides config)");
  };

  static CommonArgs c_solve;
  static std::optional<double> solve_tol;
  auto* solve = app.add_subcommand("solve-malthusian", "solve the growth-rate equation");
  add_common(solve, c_solve);
  solve->add_option("--tol", solve_tol, "bisection tolerance");
  solve->callback([&] { run = [&] { return cmd_solve_malthusian(c_solve, solve_tol); }; });

  static CommonArgs c_validate;
  auto* validate_cmd = app.add_subcommand("validate-model", "check attachment-model metadata");
  add_common(validate_cmd, c_validate);
  validate_cmd->callback([&] { run = [&] { return cmd_validate_model(c_validate); }; });

  static CommonArgs c_grow;
  static std::optional<std::uint64_t> grow_n;
  auto* grow_cmd = app.add_subcommand("grow", "grow one attachment tree and write it");
  add_common(grow_cmd, c_grow);
  grow_cmd->add_option("-n,--n", grow_n, "number of vertices");
  grow_cmd->callback([&] { run = [&] { return cmd_grow(c_grow, grow_n); }; });

  static CommonArgs c_centrality;
  static std::string centrality_tree;
  static std::optional<std::uint64_t> centrality_n;
  auto* centrality_cmd =
      app.add_subcommand("centrality", "psi for every vertex of a grown or loaded tree");
  add_common(centrality_cmd, c_centrality);
  centrality_cmd->add_option("--tree", centrality_tree, "tree file to load instead of growing");
  centrality_cmd->add_option("-n,--n", centrality_n, "number of vertices when growing");
  centrality_cmd->callback(
      [&] { run = [&] { return cmd_centrality(c_centrality, centrality_tree, centrality_n); }; });

  static CommonArgs c_rootfind;
  static std::optional<std::uint64_t> rootfind_replicas;
  auto* rootfind_cmd =
      app.add_subcommand("rootfind", "seed-vertex recovery rates over budgets and sizes");
  add_common(rootfind_cmd, c_rootfind);
  rootfind_cmd->add_option("--replicas", rootfind_replicas, "Monte Carlo replicas");
  rootfind_cmd->callback(
      [&] { run = [&] { return cmd_rootfind(c_rootfind, rootfind_replicas); }; });

  static CommonArgs c_persist;
  static std::optional<std::uint64_t> persist_k, persist_n_max, persist_replicas, persist_windows;
  auto* persist_cmd =
      app.add_subcommand("persistence", "top-k change tracking along tree growth");
  add_common(persist_cmd, c_persist);
  persist_cmd->add_option("-k,--k", persist_k, "top list size");
  persist_cmd->add_option("--n-max", persist_n_max, "growth horizon");
  persist_cmd->add_option("--replicas", persist_replicas, "Monte Carlo replicas");
  persist_cmd->add_option("--windows", persist_windows, "dyadic window count");
  persist_cmd->callback([&] {
    run = [&] {
      return cmd_persistence(c_persist, persist_k, persist_n_max, persist_replicas,
                             persist_windows);
    };
  });

  static CommonArgs c_ctbp;
  static std::optional<std::uint64_t> ctbp_stop_size, ctbp_root_shift;
  static std::optional<double> ctbp_stop_time;
  auto* ctbp_cmd = app.add_subcommand("ctbp-sample", "one branching-process event log");
  add_common(ctbp_cmd, c_ctbp);
  ctbp_cmd->add_option("--stop-size", ctbp_stop_size, "stop at this population");
  ctbp_cmd->add_option("--stop-time", ctbp_stop_time, "stop at this time");
  ctbp_cmd->add_option("--root-shift", ctbp_root_shift, "root clock shift (degree continuation)");
  ctbp_cmd->callback([&] {
    run = [&] { return cmd_ctbp_sample(c_ctbp, ctbp_stop_size, ctbp_stop_time, ctbp_root_shift); };
  });

  static CommonArgs c_limit;
  static std::optional<std::uint64_t> limit_pool;
  auto* limit_cmd =
      app.add_subcommand("limit-stats", "Y and W sample pools, tails, convergence profile");
  add_common(limit_cmd, c_limit);
  limit_cmd->add_option("--pool-size", limit_pool, "sample pool size");
  limit_cmd->callback([&] { run = [&] { return cmd_limit_stats(c_limit, limit_pool); }; });

  static CommonArgs c_rde;
  static std::optional<std::uint64_t> rde_pool;
  static std::optional<double> rde_threshold;
  auto* rde_cmd = app.add_subcommand("rde-test", "distributional fixed-point check for W");
  add_common(rde_cmd, c_rde);
  rde_cmd->add_option("--pool-size", rde_pool, "sample pool size");
  rde_cmd->add_option("--threshold", rde_threshold, "KS pass threshold");
  rde_cmd->callback([&] { run = [&] { return cmd_rde_test(c_rde, rde_pool, rde_threshold); }; });

  static CommonArgs c_report;
  static std::string report_table;
  auto* report_cmd = app.add_subcommand("report", "render a result table into long format");
  add_common(report_cmd, c_report);
  report_cmd->add_option("--table", report_table, "input CSV table");
  report_cmd->callback([&] { run = [&] { return cmd_report(c_report, report_table); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 3;
  } catch (const SeriesError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 3;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
