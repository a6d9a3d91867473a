#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "art/csv.hpp"
#include "art/geometry.hpp"

// Plot-data emission: one whitespace-separated columnar file per
// (experiment, op_class, distribution) series, x = network size, y = mean
// hops, plus a text summary comparing measured means against the analytic
// hop budget and a flat log2(N) baseline.

namespace art {

struct PlotFile {
  std::string name;
  std::string content;
};

struct ReportOutput {
  std::vector<PlotFile> plots;
  std::string summary;
};

inline ReportOutput make_report(const std::vector<MetricsRow>& rows) {
  ReportOutput out;
  std::map<std::string, std::vector<const MetricsRow*>> series;
  for (const MetricsRow& r : rows)
    series[r.experiment + "_" + r.op_class + "_" + r.distribution].push_back(&r);

  std::ostringstream summary;
  summary << "series analysed: " << series.size() << "\n";
  for (auto& [name, members] : series) {
    std::sort(members.begin(), members.end(),
              [](const MetricsRow* a, const MetricsRow* b) {
                return a->n_total < b->n_total;
              });
    std::ostringstream plot;
    plot << "# n_total n_clusters hops_mean skeleton_hops_mean hops_p99\n";
    for (const MetricsRow* r : members)
      plot << r->n_total << ' ' << r->n_clusters << ' ' << format_real(r->hops_mean)
           << ' ' << format_real(r->skeleton_hops_mean) << ' '
           << format_real(r->hops_p99) << '\n';
    out.plots.push_back({"plot_" + name + ".dat", plot.str()});

    summary << "\n[" << name << "]\n";
    for (const MetricsRow* r : members) {
      summary << "  N=" << r->n_total << " clusters=" << r->n_clusters
              << " mean_hops=" << format_real(r->hops_mean)
              << " skeleton=" << format_real(r->skeleton_hops_mean);
      const Fanout b = Fanout::validate(r->b);
      if (r->n_clusters >= b.value()) {
        summary << " hop_budget=" << format_real(4.0 * t1_hop_bound(r->n_clusters, b))
                << " log2_baseline="
                << format_real(std::log2(static_cast<double>(r->n_clusters)));
      }
      summary << "\n";
    }
    if (members.size() >= 2) {
      const MetricsRow* lo = members.front();
      const MetricsRow* hi = members.back();
      if (lo->hops_mean > 0.0 && hi->n_clusters > lo->n_clusters) {
        const double growth = hi->hops_mean / lo->hops_mean;
        const double log_growth = std::log2(static_cast<double>(hi->n_clusters)) /
                                  std::log2(static_cast<double>(lo->n_clusters));
        summary << "  growth " << format_real(growth) << " vs log2 baseline "
                << format_real(log_growth) << " -> sub-logarithmic: "
                << (growth < log_growth ? "yes" : "no") << "\n";
      }
    }
  }
  out.summary = summary.str();
  return out;
}

}  // namespace art
