#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "art/csv.hpp"
#include "art/experiment_config.hpp"
#include "art/report.hpp"
#include "art/simulation.hpp"

// Command-line front end.  Exit codes: 0 success, 1 usage or configuration
// error, 2 experiment-cell failure, 3 selftest failure.

namespace art::cli {

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

inline std::string output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ART_BENCH_OUTDIR"); env && *env) return env;
  return ".";
}

inline std::vector<std::uint64_t> parse_grid(const std::string& grid) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stoull(item));
  }
  return out;
}

struct CellError {
  std::uint64_t n_clusters;
  std::string message;
};

// Run one experiment kind over a grid of cluster counts; row order follows
// the grid regardless of failures.
inline int run_grid(const ExperimentConfig& base, const std::vector<std::uint64_t>& grid,
                    const std::string& kind, const std::string& out_path,
                    std::ostream& log) {
  std::vector<MetricsRow> rows;
  std::vector<CellError> errors;
  for (const std::uint64_t n : grid) {
    ExperimentConfig cfg = base;
    cfg.n_clusters = n;
    try {
      cfg.validate();
      log << "# cell n_clusters=" << n << " config_hash=" << cfg.hash() << "\n";
      ArtSkeleton skel = build_skeleton(cfg);
      MetricsReport report;
      if (kind == "bench-exact" || kind == "bench-range") {
        report = run_query_bench(skel, cfg);
        const std::string keep = kind == "bench-exact" ? "exact" : "range";
        for (MetricsRow& r : report.rows)
          if (r.op_class == keep) rows.push_back(std::move(r));
      } else if (kind == "bench-churn") {
        report = run_churn_bench(skel, cfg);
        for (MetricsRow& r : report.rows) rows.push_back(std::move(r));
      } else if (kind == "bench-failure") {
        report = run_failure_bench(skel, cfg);
        for (MetricsRow& r : report.rows) rows.push_back(std::move(r));
      } else if (kind == "bench-load") {
        report = run_loadbal_bench(skel, cfg);
        for (MetricsRow& r : report.rows) rows.push_back(std::move(r));
      } else {
        throw Error("unknown benchmark kind " + kind);
      }
    } catch (const std::exception& e) {
      errors.push_back({n, e.what()});
    }
  }
  std::string csv = to_csv(rows);
  for (const CellError& e : errors)
    csv += "# error n_clusters=" + std::to_string(e.n_clusters) + ": " + e.message + "\n";
  if (out_path.empty())
    log << csv;
  else
    write_file(out_path, csv);
  return errors.empty() ? 0 : 2;
}

inline int run_selftest(std::ostream& log);

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& log = std::cout) {
  CLI::App app{"range-query overlay benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string grid_spec;
  std::string csv_path;
  std::string outdir_flag;
  std::optional<std::uint64_t> seed_override;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file (key=value lines)");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_path, "output file (stdout when omitted)");
  };

  CLI::App* cmd_build = app.add_subcommand("build", "build a skeleton and print its snapshot");
  add_common(cmd_build);

  for (const char* name : {"bench-exact", "bench-range", "bench-churn", "bench-failure",
                           "bench-load"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    add_common(sub);
    sub->add_option("--grid", grid_spec, "comma-separated cluster counts (overrides n_clusters)");
  }

  CLI::App* cmd_report = app.add_subcommand("report", "turn a metrics CSV into plot data");
  cmd_report->add_option("--csv", csv_path, "metrics CSV file")->required();
  cmd_report->add_option("--outdir", outdir_flag, "output directory (or ART_BENCH_OUTDIR)");

  app.add_subcommand("selftest", "exhaustive small-instance oracle suite");

  std::vector<const char*> argv;
  argv.push_back("art_bench");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config(detail::read_file(config_path));
    if (seed_override) cfg.seed = *seed_override;
    cfg.validate();

    if (cmd_build->parsed()) {
      log << "# config_hash=" << cfg.hash() << "\n";
      ArtSkeleton skel = build_skeleton(cfg);
      const std::string snap = skel.snapshot();
      if (out_path.empty())
        log << snap;
      else
        detail::write_file(out_path, snap);
      log << "# clusters=" << skel.cluster_count() << " peers=" << skel.initial_peer_count()
          << " levels=" << skel.geometry().height()
          << " max_routing_entries=" << skel.max_routing_entries() << "\n";
      return 0;
    }

    for (const char* name : {"bench-exact", "bench-range", "bench-churn", "bench-failure",
                             "bench-load"}) {
      CLI::App* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      std::vector<std::uint64_t> grid =
          grid_spec.empty() ? std::vector<std::uint64_t>{cfg.n_clusters}
                            : detail::parse_grid(grid_spec);
      if (grid.empty()) {
        std::cerr << "empty grid\n";
        return 1;
      }
      return detail::run_grid(cfg, grid, name, out_path, log);
    }

    if (cmd_report->parsed()) {
      const std::string dir = detail::output_dir(outdir_flag);
      std::filesystem::create_directories(dir);
      const ReportOutput rep = make_report(parse_csv(detail::read_file(csv_path)));
      for (const PlotFile& p : rep.plots)
        detail::write_file(dir + "/" + p.name, p.content);
      detail::write_file(dir + "/summary.txt", rep.summary);
      log << rep.summary;
      return 0;
    }

    if (app.get_subcommand("selftest")->parsed()) return detail::run_selftest(log);
  } catch (const SchemaMismatch& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& log = std::cout) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, log);
}

namespace detail {

// Exhaustive oracle checks at tiny scale; exit 3 on any mismatch.
inline int run_selftest(std::ostream& log) {
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  const auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      ++failures;
      log << "FAIL " << what << "\n";
    }
  };

  // Spine labels and the worked collection for b=2.
  {
    const TreeGeometry g(Fanout::validate(2), 300);
    const Label expected[] = {1, 2, 4, 8, 24};
    for (Level i = 0; i < 5; ++i)
      expect(g.level_start_label(i) == expected[i], "start label level " + std::to_string(i));
    const auto [lo, hi] = g.collection_bounds({3, 1});
    expect(lo == 8 && hi == 11, "first collection of level 3");
  }

  // Exhaustive reachability and responsible-peer equality at small scale.
  for (const std::uint64_t n : {16ULL, 64ULL}) {
    for (const std::uint64_t b : {2ULL, 4ULL}) {
      BuildConfig bc;
      bc.fanout = Fanout::validate(b);
      bc.seed = 7;
      const KeyUniverse uni(n * 16, 4);  // span 4 -> 4 peers per cluster
      ArtSkeleton skel(uni, bc);
      for (ClusterId s = 1; s <= n; ++s) {
        for (ClusterId t = 1; t <= n; ++t) {
          RouteTrace trace;
          const ClusterId reached = skel.art_lookup(s, t, trace);
          if (reached != t) {
            expect(false, "lookup " + std::to_string(s) + "->" + std::to_string(t));
          }
        }
      }
      ++checks;
      for (Key k = 0; k < uni.universe(); ++k) {
        const SearchResult res = skel.exact_search_from_cluster(1 + k % n, k);
        if (res.peer != uni.peer_for_key(k)) {
          expect(false, "responsible peer for key " + std::to_string(k));
          break;
        }
      }
      ++checks;
    }
  }

  // Range answers equal a brute-force filter.
  {
    ExperimentConfig cfg;
    cfg.n_clusters = 64;
    cfg.universe = 64 * 64;
    cfg.data_multiplier = 3;
    cfg.seed = 11;
    ArtSkeleton skel = build_skeleton(cfg);
    load_data(skel, cfg);
    std::vector<Key> all;
    for (ClusterId c = 1; c <= skel.cluster_count(); ++c) {
      const ClusterPeer& cl = skel.cluster(c);
      for (std::size_t p = 0; p < cl.peer_count(); ++p)
        cl.collect_range(p, cl.key_lo(), cl.key_hi(), all);
    }
    std::sort(all.begin(), all.end());
    for (std::uint64_t q = 0; q < 200; ++q) {
      const Key lo = stream_below(cfg.seed, Stream::range_key, 2 * q, skel.universe().universe());
      const Key w = 1 + stream_below(cfg.seed, Stream::range_key, 2 * q + 1, 64);
      const Key hi = std::min(lo + w, skel.universe().universe() - 1);
      const RangeResult res = skel.range_search_from_cluster(1 + q % 64, lo, hi);
      std::vector<Key> oracle;
      for (const Key k : all)
        if (k >= lo && k <= hi) oracle.push_back(k);
      if (res.keys != oracle) {
        expect(false, "range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        break;
      }
    }
    ++checks;
  }

  // Replay determinism.
  {
    ExperimentConfig cfg;
    cfg.n_clusters = 128;
    cfg.queries = 200;
    cfg.data_multiplier = 0;
    ArtSkeleton a = build_skeleton(cfg);
    ArtSkeleton b = build_skeleton(cfg);
    const MetricsReport ra = run_query_bench(a, cfg);
    const MetricsReport rb = run_query_bench(b, cfg);
    expect(to_csv(ra.rows) == to_csv(rb.rows), "replay determinism");
  }

  log << "selftest: " << (checks - failures) << "/" << checks << " groups passed\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace detail

}  // namespace art::cli
