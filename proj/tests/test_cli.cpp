#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "grtree/attach_model.hpp"
#include "grtree/report.hpp"
#include "grtree/treegen.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const char* cli = std::getenv("GRTREE_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "GRTREE_CLI must point at the built binary");
  std::string cmd = std::string("\"") + cli + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct Workdir {
  fs::path dir;
  explicit Workdir(const std::string& tag) {
    dir = fs::path("cli-scratch") / tag;
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  fs::path write_config(const json& cfg) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << cfg.dump(2) << "\n";
    return p;
  }
  std::string slurp(const fs::path& rel) const {
    std::ifstream in(dir / rel);
    REQUIRE_MESSAGE(in.good(), ((dir / rel).string() + " should exist"));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

json base_config(const std::string& experiment, const Workdir& w, std::uint64_t seed) {
  json cfg;
  cfg["experiment"] = experiment;
  cfg["model"] = json::parse(grtree::AttachmentFunction::uniform().to_json());
  cfg["master_seed"] = seed;
  cfg["worker_count"] = 1;
  cfg["output_dir"] = w.dir.string();
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve-malthusian writes solution and manifest") {
  Workdir w("solve");
  auto cfg = base_config("solve-malthusian", w, 1);
  cfg["tolerance"] = 1e-10;
  auto r = run_cli("solve-malthusian -c " + w.write_config(cfg).string());
  CHECK_MESSAGE(r.exit_code == 0, r.output);

  auto sol = json::parse(w.slurp("solve-malthusian-uniform-1.json"));
  CHECK(std::abs(sol["lambda_star"].get<double>() - 1.0) < 1e-9);
  CHECK(sol["assumption_limsup_ok"] == true);
  CHECK(std::abs(sol["degree_pmf_head"][0].get<double>() - 0.5) < 1e-10);

  auto man = json::parse(w.slurp("solve-malthusian-uniform-1.manifest.json"));
  CHECK(man["command"] == "solve-malthusian");
  CHECK(man["status"] == "ok");
  std::string hash = man["outputs"]["solve-malthusian-uniform-1.json"].get<std::string>();
  CHECK(hash == grtree::file_hash((w.dir / "solve-malthusian-uniform-1.json").string()));
}

TEST_CASE("grow emits a loadable tree; flag overrides the config seed") {
  Workdir w("grow");
  auto cfg = base_config("grow", w, 1);
  cfg["n"] = 2;
  auto r = run_cli("grow -c " + w.write_config(cfg).string() + " --seed 5");
  CHECK_MESSAGE(r.exit_code == 0, r.output);
  std::istringstream in(w.slurp("grow-uniform-5.tree"));
  auto t = grtree::read_tree(in);
  CHECK(t.size() == 2);
  CHECK(t.seed == 5);
}

TEST_CASE("centrality reads a tree file and reports psi rows") {
  Workdir w("centrality");
  // Hand-written three-vertex path: 1-2-3.
  const std::string model = grtree::AttachmentFunction::uniform().to_json();
  std::ofstream(w.dir / "path.tree") << "n 3 seed 1 model " << model << "\n1\n2\n";
  auto cfg = base_config("centrality", w, 1);
  cfg["tree_file"] = (w.dir / "path.tree").string();
  auto r = run_cli("centrality -c " + w.write_config(cfg).string());
  CHECK_MESSAGE(r.exit_code == 0, r.output);

  std::istringstream in(w.slurp("centrality-uniform-1.csv"));
  auto table = grtree::read_table_csv(in, "psi");
  REQUIRE(table.rows.size() == 3);
  auto pi = table.column_index("psi");
  CHECK(std::get<std::int64_t>(table.rows[0][pi]) == 2);
  CHECK(std::get<std::int64_t>(table.rows[1][pi]) == 1);
  CHECK(std::get<std::int64_t>(table.rows[2][pi]) == 2);
  // The middle vertex is the unique center.
  CHECK(r.output.find("2") != std::string::npos);
}

TEST_CASE("rootfind: full budget always succeeds and reruns are identical") {
  Workdir w1("rootfind-a");
  auto cfg = base_config("rootfind", w1, 77);
  cfg["n_list"] = {16};
  cfg["K_list"] = {16};
  cfg["replicas"] = 100;
  auto r1 = run_cli("rootfind -c " + w1.write_config(cfg).string());
  CHECK_MESSAGE(r1.exit_code == 0, r1.output);
  std::string csv1 = w1.slurp("rootfind-uniform-77.csv");

  std::istringstream in(csv1);
  auto table = grtree::read_table_csv(in, "recovery");
  REQUIRE(table.rows.size() == 1);
  // Whole-valued doubles come back from CSV as integer cells; compare as text.
  CHECK(grtree::format_cell(table.rows[0][table.column_index("success_rate")]) == "1");

  Workdir w2("rootfind-b");
  cfg["output_dir"] = w2.dir.string();
  auto r2 = run_cli("rootfind -c " + w2.write_config(cfg).string() + " --workers 4");
  CHECK_MESSAGE(r2.exit_code == 0, r2.output);
  CHECK(w2.slurp("rootfind-uniform-77.csv") == csv1);
}

TEST_CASE("ctbp-sample logs the event stream") {
  Workdir w("ctbp");
  auto cfg = base_config("ctbp-sample", w, 3);
  cfg["model"] = json::parse(grtree::AttachmentFunction::affine(0.0).to_json());
  cfg["stop_size"] = 50;
  auto r = run_cli("ctbp-sample -c " + w.write_config(cfg).string());
  CHECK_MESSAGE(r.exit_code == 0, r.output);
  std::istringstream in(w.slurp("ctbp-sample-affine0-3.csv"));
  auto table = grtree::read_table_csv(in, "events");
  CHECK(table.columns ==
        std::vector<std::string>{"event_index", "time", "parent_arrival_index"});
  CHECK(table.rows.size() == 49);
  double prev = 0.0;
  auto ti = table.column_index("time");
  for (const auto& row : table.rows) {
    double t = std::get<double>(row[ti]);
    CHECK(t >= prev);
    prev = t;
  }
}

TEST_CASE("report rewrites a table into long format") {
  Workdir w("report");
  grtree::Table t;
  t.name = "rates";
  t.meta_json = R"({"plot":{"x":"n","y":["rate"],"series":["K"]}})";
  t.columns = {"n", "K", "rate"};
  t.add_row({std::int64_t{10}, std::int64_t{1}, 0.5});
  std::ofstream raw(w.dir / "rates.csv");
  grtree::write_table_csv(t, raw);
  raw.close();

  json cfg;
  cfg["experiment"] = "report";
  cfg["table_file"] = (w.dir / "rates.csv").string();
  cfg["output_dir"] = w.dir.string();
  auto r = run_cli("report -c " + w.write_config(cfg).string());
  CHECK_MESSAGE(r.exit_code == 0, r.output);
  std::istringstream in(w.slurp("rates-long.csv"));
  auto lf = grtree::read_table_csv(in, "long");
  REQUIRE(lf.rows.size() == 1);
  CHECK(grtree::format_cell(lf.rows[0][lf.column_index("series")]) == "1");
}

TEST_CASE("validate-model verdicts map to exit codes") {
  Workdir w1("validate-ok");
  auto ok = run_cli("validate-model -c " + w1.write_config(base_config("validate-model", w1, 1)).string());
  CHECK_MESSAGE(ok.exit_code == 0, ok.output);
  CHECK(ok.output.find("passed") != std::string::npos);

  Workdir w2("validate-bad");
  auto f = grtree::AttachmentFunction::custom_table({1.0, 1.0, 1.0},
                                                    grtree::TableExtension::hold_last_value);
  // Declared floor of 2 contradicts the table of ones.
  f.declare_metadata(2.0, std::nullopt, std::nullopt, std::nullopt);
  auto cfg = base_config("validate-model", w2, 1);
  cfg["model"] = json::parse(f.to_json());
  auto bad = run_cli("validate-model -c " + w2.write_config(cfg).string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("f_star_floor") != std::string::npos);
}

TEST_CASE("config errors exit with code 2") {
  Workdir w("badcfg");
  auto cfg = base_config("solve-malthusian", w, 1);
  cfg["bogus_key"] = 1;
  auto r = run_cli("solve-malthusian -c " + w.write_config(cfg).string());
  CHECK(r.exit_code == 2);

  auto cfg2 = base_config("solve-malthusian", w, 1);
  cfg2.erase("master_seed");
  auto r2 = run_cli("solve-malthusian -c " + w.write_config(cfg2).string());
  CHECK(r2.exit_code == 2);

  auto r3 = run_cli("solve-malthusian -c " + (w.dir / "missing.json").string());
  CHECK(r3.exit_code == 2);
}

TEST_CASE("unknown subcommands are rejected") {
  auto r = run_cli("frobnicate");
  CHECK(r.exit_code != 0);
}

}  // TEST_SUITE
