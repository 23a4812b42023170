#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gdm/common.hpp"
#include "gdm/gridsim.hpp"

namespace gdm {

struct OverheadReport {
  std::string task;
  double measured = 0.0;
  double estimated = 0.0;
  std::string unit = "seconds";
  double overhead_pct = 0.0;       // 100*(measured-estimated)/measured
  bool estimator_exceeds = false;  // diagnostic: estimated > measured
};

inline double round1(double x) { return std::round(x * 10.0) / 10.0; }

inline OverheadReport overhead(double measured, double estimated,
                               const std::string& task = "",
                               const std::string& unit = "seconds") {
  if (!(measured > 0.0)) throw ValidationError("overhead: measured must be > 0");
  OverheadReport r;
  r.task = task;
  r.measured = measured;
  r.estimated = estimated;
  r.unit = unit;
  r.overhead_pct = round1(100.0 * (measured - estimated) / measured);
  r.estimator_exceeds = estimated > measured;
  return r;
}

// 100*(a-b)/a: how much smaller b is relative to a, in percent.
inline double relative_gain(double a, double b) {
  if (!(a > 0.0)) throw ValidationError("relative_gain: a must be > 0");
  return 100.0 * (a - b) / a;
}

// Clustering estimate: max local clustering time, plus the worst stats
// transfer into the aggregation site, plus the merging time.
inline double estimate_clustering(const std::vector<double>& local_times,
                                  double merge_time,
                                  const std::vector<std::size_t>& stats_payloads,
                                  const LinkMatrix& links,
                                  std::size_t aggregation_site) {
  if (local_times.empty())
    throw ValidationError("estimate_clustering: need at least one site");
  if (stats_payloads.size() != local_times.size())
    throw ValidationError("estimate_clustering: payloads/times size mismatch");
  double local_max = 0.0;
  for (double t : local_times) local_max = std::max(local_max, t);
  double comm_max = 0.0;
  for (std::size_t i = 0; i < local_times.size(); ++i) {
    if (i == aggregation_site) continue;
    comm_max = std::max(comm_max, comm_time(stats_payloads[i], links.map_site(i),
                                            links.map_site(aggregation_site), links));
  }
  return local_max + comm_max + merge_time;
}

// Stage-max itemset estimate; the plan carries the per-stage activities
// (GFM: generation + one stage per reconciliation round; FDM: 2k+1 stages).
inline double estimate_itemsets(const StagePlan& plan, const LinkMatrix& links) {
  return run_stages(plan, links).makespan;
}

}  // namespace gdm
