#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "art/cli.hpp"
#include "art/csv.hpp"
#include "art/experiment_config.hpp"
#include "art/report.hpp"

using namespace art;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("art_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path / name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream os;
  const int rc = art::cli::run(args, os);
  if (out) *out = os.str();
  return rc;
}

}  // namespace

TEST_CASE("an empty config file yields the documented defaults") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.b == 4);
  CHECK(cfg.c == 1);
  CHECK(cfg.inner == InnerKind::finger_ring);
  CHECK(cfg.queries == 1000);
  CHECK(cfg.universe == 1'000'000'000);
  CHECK(cfg.alpha_max == 10);
  CHECK(cfg.distribution == DistKind::uniform);
  CHECK(cfg.data_multiplier == 20);
}

TEST_CASE("config rejections carry the offending key or line") {
  CHECK_THROWS_AS(parse_config("b=8\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("failure_fraction=1.5\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("alpha_max=11\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("inner=btree\n"), ValidationError);
  try {
    parse_config("# fine\nqueries=10\nnot a line\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  try {
    parse_config("unknown_key=3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 1);
  }
}

TEST_CASE("config text parses keys, comments and parameters") {
  const ExperimentConfig cfg = parse_config(
      "# benchmark cell\n"
      "n_clusters = 256\n"
      "b=16\n"
      "inner=direct-oracle\n"
      "distribution=power-law\n"
      "dist_params=2.5\n"
      "queries=50   # trailing comment\n"
      "churn_steps=0\n"
      "seed=99\n");
  CHECK(cfg.n_clusters == 256);
  CHECK(cfg.b == 16);
  CHECK(cfg.inner == InnerKind::direct_oracle);
  CHECK(cfg.distribution == DistKind::power_law);
  CHECK(cfg.dist_p1 == 2.5);
  CHECK(cfg.queries == 50);
  CHECK(cfg.churn_steps == 0);
  CHECK(cfg.seed == 99);
  CHECK(cfg.hash() == parse_config(cfg.canonical_text() == "" ? "" : "seed=99\nn_clusters=256\nb=16\ninner=direct-oracle\ndistribution=power-law\ndist_params=2.5\nqueries=50\nchurn_steps=0\n").hash());
}

TEST_CASE("csv writing and parsing round-trip") {
  MetricsRow row;
  row.experiment = "query";
  row.n_total = 4096;
  row.n_clusters = 256;
  row.b = 4;
  row.c = 1;
  row.inner = "finger-ring";
  row.distribution = "uniform";
  row.op_class = "exact";
  row.hops_mean = 4.125;
  row.hops_p50 = 4;
  row.hops_p99 = 7;
  row.hops_max = 9;
  row.skeleton_hops_mean = 3.5;
  row.success_rate = 1.0;
  row.max_routing_entries = 7;
  row.cluster_size_max = 16;
  row.violations = 0;
  row.seed = 5;
  row.config_hash = "abc123";
  const std::string text = to_csv({row});
  CHECK(text.rfind(kCsvHeader, 0) == 0);
  const std::vector<MetricsRow> rows = parse_csv(text);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].hops_mean == 4.125);
  CHECK(rows[0].config_hash == "abc123");
  CHECK(to_csv(rows) == text);

  CHECK_THROWS_AS(parse_csv("bogus header\n1,2,3\n"), SchemaMismatch);
  CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\n1,2\n"), SchemaMismatch);
}

TEST_CASE("report emits one plot per series and a growth verdict") {
  ExperimentConfig cfg;
  cfg.universe = 1 << 22;
  cfg.queries = 200;
  cfg.data_multiplier = 0;
  cfg.inner = InnerKind::direct_oracle;
  std::vector<MetricsRow> rows;
  for (const std::uint64_t n : {256ULL, 1024ULL, 4096ULL}) {
    cfg.n_clusters = n;
    ArtSkeleton skel = build_skeleton(cfg);
    for (MetricsRow& r : run_query_bench(skel, cfg).rows)
      if (r.op_class == "exact") rows.push_back(std::move(r));
  }
  const ReportOutput rep = make_report(rows);
  REQUIRE(rep.plots.size() == 1);
  CHECK(rep.plots[0].name == "plot_query_exact_uniform.dat");
  // One data line per grid point plus the column header.
  CHECK(std::count(rep.plots[0].content.begin(), rep.plots[0].content.end(), '\n') == 4);
  CHECK(rep.summary.find("sub-logarithmic: yes") != std::string::npos);

  const ReportOutput single = make_report({rows[0]});
  CHECK(std::count(single.plots[0].content.begin(), single.plots[0].content.end(), '\n') == 2);
}

TEST_CASE("bench subcommand writes reproducible csv over a grid") {
  TempDir tmp;
  const std::string config =
      tmp.file("cell.cfg", "queries=100\ndata_multiplier=0\nseed=13\n");
  const std::string out_a = (tmp.path / "a.csv").string();
  const std::string out_b = (tmp.path / "b.csv").string();

  std::string log;
  const int rc_a = run_cli({"bench-exact", "--config", config, "--grid", "64,256",
                            "--out", out_a}, &log);
  REQUIRE(rc_a == 0);
  CHECK(log.find("config_hash=") != std::string::npos);
  const int rc_b = run_cli({"bench-exact", "--config", config, "--grid", "64,256",
                            "--out", out_b});
  REQUIRE(rc_b == 0);

  const std::string a = tmp.read("a.csv");
  CHECK(a == tmp.read("b.csv"));  // byte-identical replay
  const std::vector<MetricsRow> rows = parse_csv(a);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n_clusters == 64);
  CHECK(rows[1].n_clusters == 256);  // grid order preserved
  CHECK(rows[0].op_class == "exact");
}

TEST_CASE("a one-cell single-cluster grid reports zero hops") {
  TempDir tmp;
  const std::string config = tmp.file("one.cfg", "queries=20\ndata_multiplier=0\n");
  const std::string out = (tmp.path / "one.csv").string();
  REQUIRE(run_cli({"bench-exact", "--config", config, "--grid", "1", "--out", out}) == 0);
  const std::vector<MetricsRow> rows = parse_csv(tmp.read("one.csv"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].skeleton_hops_mean == 0.0);
}

TEST_CASE("failing cells produce a trailing error row and exit code 2") {
  TempDir tmp;
  const std::string config = tmp.file("cell.cfg", "queries=10\ndata_multiplier=0\n");
  const std::string out = (tmp.path / "bad.csv").string();
  const int rc = run_cli({"bench-exact", "--config", config, "--grid", "16,0", "--out", out});
  CHECK(rc == 2);
  const std::string text = tmp.read("bad.csv");
  CHECK(text.find("# error n_clusters=0") != std::string::npos);
  const std::vector<MetricsRow> rows = parse_csv(text);  // comments are skipped
  CHECK(rows.size() == 1);
}

TEST_CASE("build subcommand emits the versioned snapshot") {
  TempDir tmp;
  const std::string config = tmp.file("cell.cfg", "n_clusters=32\n");
  const std::string out = (tmp.path / "skel.txt").string();
  REQUIRE(run_cli({"build", "--config", config, "--out", out}) == 0);
  const std::string snap = tmp.read("skel.txt");
  CHECK(snap.rfind("art-skeleton v1\n", 0) == 0);
  CHECK(snap.find("clusters 32") != std::string::npos);
}

TEST_CASE("report subcommand writes plot data into the output directory") {
  TempDir tmp;
  const std::string config = tmp.file("cell.cfg", "queries=50\ndata_multiplier=0\n");
  const std::string csv = (tmp.path / "m.csv").string();
  REQUIRE(run_cli({"bench-exact", "--config", config, "--grid", "64,256", "--out", csv}) == 0);
  REQUIRE(run_cli({"report", "--csv", csv, "--outdir", (tmp.path / "plots").string()}) == 0);
  CHECK(fs::exists(tmp.path / "plots" / "plot_query_exact_uniform.dat"));
  CHECK(fs::exists(tmp.path / "plots" / "summary.txt"));

  const std::string junk = tmp.file("junk.csv", "not,a,schema\n");
  CHECK(run_cli({"report", "--csv", junk, "--outdir", (tmp.path / "p2").string()}) == 1);
}

TEST_CASE("usage and config errors exit with code 1") {
  CHECK(run_cli({"bench-exact", "--no-such-flag"}) == 1);
  CHECK(run_cli({}) == 1);
  TempDir tmp;
  const std::string bad = tmp.file("bad.cfg", "b=8\n");
  CHECK(run_cli({"bench-exact", "--config", bad}) == 1);
}

TEST_CASE("seed override changes the run hash") {
  TempDir tmp;
  const std::string config = tmp.file("cell.cfg", "queries=10\ndata_multiplier=0\nn_clusters=16\n");
  const std::string out1 = (tmp.path / "s1.csv").string();
  const std::string out2 = (tmp.path / "s2.csv").string();
  REQUIRE(run_cli({"bench-exact", "--config", config, "--out", out1}) == 0);
  REQUIRE(run_cli({"bench-exact", "--config", config, "--seed", "77", "--out", out2}) == 0);
  const auto r1 = parse_csv(tmp.read("s1.csv"));
  const auto r2 = parse_csv(tmp.read("s2.csv"));
  CHECK(r1[0].config_hash != r2[0].config_hash);
  CHECK(r2[0].seed == 77);
}

TEST_CASE("selftest passes on a healthy build") {
  std::string log;
  CHECK(run_cli({"selftest"}, &log) == 0);
  CHECK(log.find("selftest") != std::string::npos);
}

TEST_CASE("stored golden csv replays byte for byte") {
  const fs::path golden = fs::path(__FILE__).parent_path() / "golden" / "query_small.csv";
  REQUIRE(fs::exists(golden));
  std::ifstream in(golden);
  std::ostringstream ss;
  ss << in.rdbuf();

  TempDir tmp;
  const std::string config = tmp.file(
      "golden.cfg", "n_clusters=128\nqueries=200\ndata_multiplier=0\nseed=424242\n");
  const std::string out = (tmp.path / "fresh.csv").string();
  std::string log;
  REQUIRE(run_cli({"bench-exact", "--config", config, "--grid", "64,128,256",
                   "--out", out}, &log) == 0);
  CHECK(tmp.read("fresh.csv") == ss.str());
}
