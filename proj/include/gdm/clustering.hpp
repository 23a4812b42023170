#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

#include "gdm/common.hpp"
#include "gdm/datagen.hpp"

namespace gdm {

// Sufficient statistics of one local sub-cluster. `variance` is the
// un-normalized within-cluster SSE, which makes merging additive.
struct SubClusterStats {
  int site = 0;
  int index = 0;
  std::size_t size = 0;
  Vec center;
  double variance = 0.0;
};

using SubClusterId = std::pair<int, int>;  // (site, index)

struct GlobalCluster {
  int label = 0;
  std::vector<SubClusterId> members;
  SubClusterStats agg;
};

struct GlobalLabeling {
  std::vector<GlobalCluster> clusters;
  double total_variance = 0.0;
};

struct AggregationParams {
  // Merge threshold; unset means twice the highest individual input variance.
  std::optional<double> merge_threshold;
  std::size_t border_count = 0;
  std::size_t perturbation_passes = 1;
  // Multi-attributed candidates: members whose second-nearest global center is
  // within this factor of their nearest also become move candidates. <= 1
  // disables the feature.
  double multi_attributed_alpha = 1.1;
  // Border quota proportional to member point counts instead of member counts.
  bool quota_by_points = false;

  void validate() const {
    if (merge_threshold && !(*merge_threshold > 0.0))
      throw ValidationError("AggregationParams: explicit threshold must be > 0");
    if (perturbation_passes == 0)
      throw ValidationError("AggregationParams: perturbation_passes must be >= 1");
  }
};

// SSE increase from merging two summarized clusters:
// (N_a N_b / (N_a + N_b)) * ||c_a - c_b||^2.
inline double ward_increment(const SubClusterStats& a, const SubClusterStats& b) {
  const double na = static_cast<double>(a.size);
  const double nb = static_cast<double>(b.size);
  return na * nb / (na + nb) * squared_distance(a.center, b.center);
}

inline SubClusterStats merge_stats(const SubClusterStats& a, const SubClusterStats& b) {
  const double inc = ward_increment(a, b);  // also checks dims
  SubClusterStats out;
  out.site = a.site;
  out.index = a.index;
  out.size = a.size + b.size;
  const double wa = static_cast<double>(a.size) / static_cast<double>(out.size);
  const double wb = static_cast<double>(b.size) / static_cast<double>(out.size);
  out.center.resize(a.center.size());
  for (std::size_t d = 0; d < out.center.size(); ++d)
    out.center[d] = wa * a.center[d] + wb * b.center[d];
  out.variance = a.variance + b.variance + inc;
  return out;
}

// Inverse of merge_stats: peel `part` off `whole`.
inline SubClusterStats remove_stats(const SubClusterStats& whole,
                                    const SubClusterStats& part) {
  if (part.size >= whole.size)
    throw ValidationError("remove_stats: part.size must be < whole.size");
  SubClusterStats rest;
  rest.site = whole.site;
  rest.index = whole.index;
  rest.size = whole.size - part.size;
  const double nw = static_cast<double>(whole.size);
  const double np = static_cast<double>(part.size);
  const double nr = static_cast<double>(rest.size);
  rest.center.resize(whole.center.size());
  if (part.center.size() != whole.center.size())
    throw ValidationError("remove_stats: dimension mismatch");
  for (std::size_t d = 0; d < rest.center.size(); ++d)
    rest.center[d] = (nw * whole.center[d] - np * part.center[d]) / nr;
  rest.variance = whole.variance - part.variance - ward_increment(part, rest);
  const double scale = std::max(1.0, std::abs(whole.variance));
  if (rest.variance < -1e-9 * scale)
    throw InconsistencyError("remove_stats: part was not a component of whole");
  if (rest.variance < 0.0) rest.variance = 0.0;
  return rest;
}

inline double total_sse(const std::vector<Vec>& points, const Vec& center) {
  double sse = 0.0;
  for (const auto& p : points) sse += squared_distance(p, center);
  return sse;
}

// Seeded k-means (k-means++ init, max 100 iterations, relative center-shift
// tolerance 1e-6). Empty clusters are reseeded from the point farthest from
// its assigned center.
inline std::vector<SubClusterStats> local_cluster(const PointSet& points,
                                                  std::size_t k, std::uint64_t seed,
                                                  int site = 0) {
  const std::size_t n = points.points.size();
  if (n == 0) throw ValidationError("local_cluster: empty input");
  if (k == 0 || k > n)
    throw ValidationError("local_cluster: k must satisfy 1 <= k <= |points|");
  const std::size_t dims = points.dims;
  Rng rng(seed);

  // k-means++ seeding
  std::vector<Vec> centers;
  centers.reserve(k);
  centers.push_back(points.points[uniform_index(rng, n)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers)
        best = std::min(best, squared_distance(points.points[i], c));
      d2[i] = best;
      sum += best;
    }
    std::size_t pick = 0;
    if (sum > 0.0) {
      double r = uniform01(rng) * sum;
      for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0) { pick = i; break; }
        pick = i;
      }
    } else {
      pick = uniform_index(rng, n);
    }
    centers.push_back(points.points[pick]);
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points.points[i], centers[c]);
        if (d < best) { best = d; arg = c; }
      }
      assign[i] = arg;
    }

    std::vector<Vec> sums(k, Vec(dims, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dims; ++d) sums[assign[i]][d] += points.points[i][d];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // reseed from the point farthest from its current center
        double worst = -1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[assign[i]] < 2) continue;
          const double d = squared_distance(points.points[i], centers[assign[i]]);
          if (d > worst) { worst = d; arg = i; }
        }
        const std::size_t old = assign[arg];
        for (std::size_t d = 0; d < dims; ++d) {
          sums[old][d] -= points.points[arg][d];
          sums[c][d] += points.points[arg][d];
        }
        --counts[old];
        ++counts[c];
        assign[arg] = c;
      }
    }

    double shift = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      Vec updated(dims);
      for (std::size_t d = 0; d < dims; ++d)
        updated[d] = sums[c][d] / static_cast<double>(counts[c]);
      shift += squared_distance(updated, centers[c]);
      scale += squared_distance(updated, Vec(dims, 0.0)) + 1.0;
      centers[c] = std::move(updated);
    }
    if (shift <= 1e-12 * scale) break;  // (1e-6 relative shift)^2
  }

  // Final assignment and exact statistics.
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(points.points[i], centers[c]);
      if (d < best) { best = d; arg = c; }
    }
    assign[i] = arg;
  }
  std::vector<SubClusterStats> stats(k);
  std::vector<std::vector<Vec>> member_points(k);
  for (std::size_t i = 0; i < n; ++i) member_points[assign[i]].push_back(points.points[i]);
  for (std::size_t c = 0; c < k; ++c) {
    if (member_points[c].empty()) {
      // steal the globally farthest point so every sub-cluster is nonempty
      double worst = -1.0;
      std::size_t from = 0, at = 0;
      for (std::size_t m = 0; m < k; ++m) {
        if (member_points[m].size() < 2) continue;
        for (std::size_t i = 0; i < member_points[m].size(); ++i) {
          const double d = squared_distance(member_points[m][i], centers[m]);
          if (d > worst) { worst = d; from = m; at = i; }
        }
      }
      member_points[c].push_back(member_points[from][at]);
      member_points[from].erase(member_points[from].begin() +
                                static_cast<std::ptrdiff_t>(at));
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    auto& s = stats[c];
    s.site = site;
    s.index = static_cast<int>(c);
    s.size = member_points[c].size();
    s.center.assign(dims, 0.0);
    for (const auto& p : member_points[c])
      for (std::size_t d = 0; d < dims; ++d) s.center[d] += p[d];
    for (std::size_t d = 0; d < dims; ++d)
      s.center[d] /= static_cast<double>(s.size);
    s.variance = total_sse(member_points[c], s.center);
  }
  return stats;
}

// Serialized size of a stats list: (dims + 2) doubles plus an 8-byte id
// (4-byte site, 4-byte index) per sub-cluster.
inline std::size_t clustering_payload_bytes(std::size_t n_stats, std::size_t dims) {
  return n_stats * (dims + 2) * 8 + n_stats * 8;
}

inline std::size_t clustering_payload_bytes(const std::vector<SubClusterStats>& stats,
                                            std::size_t dims) {
  return clustering_payload_bytes(stats.size(), dims);
}

inline double resolve_threshold(const std::vector<SubClusterStats>& all_stats,
                                const AggregationParams& params) {
  if (params.merge_threshold) return *params.merge_threshold;
  double max_var = 0.0;
  for (const auto& s : all_stats) max_var = std::max(max_var, s.variance);
  return 2.0 * max_var;
}

inline double recompute_total_variance(GlobalLabeling& labeling) {
  labeling.total_variance = 0.0;
  for (const auto& c : labeling.clusters) labeling.total_variance += c.agg.variance;
  return labeling.total_variance;
}

// Greedy minimum-increment merging: repeatedly merge the pair of global
// clusters with the smallest ward_increment while that minimum stays below
// the threshold. Ties break on the smaller (label, label) pair.
inline GlobalLabeling merge_phase(const std::vector<SubClusterStats>& all_stats,
                                  double threshold) {
  if (all_stats.empty()) throw ValidationError("aggregate: empty input");
  const std::size_t dims = all_stats.front().center.size();
  for (const auto& s : all_stats) {
    if (s.center.size() != dims)
      throw ValidationError("aggregate: sub-clusters must share dims");
    if (s.size == 0) throw ValidationError("aggregate: zero-size sub-cluster");
  }

  GlobalLabeling lab;
  lab.clusters.reserve(all_stats.size());
  for (const auto& s : all_stats) {
    GlobalCluster c;
    c.label = static_cast<int>(lab.clusters.size());
    c.members.push_back({s.site, s.index});
    c.agg = s;
    lab.clusters.push_back(std::move(c));
  }

  while (lab.clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < lab.clusters.size(); ++i)
      for (std::size_t j = i + 1; j < lab.clusters.size(); ++j) {
        const double inc = ward_increment(lab.clusters[i].agg, lab.clusters[j].agg);
        if (inc < best) { best = inc; bi = i; bj = j; }
      }
    if (!(best < threshold)) break;
    auto& a = lab.clusters[bi];
    auto& b = lab.clusters[bj];
    a.agg = merge_stats(a.agg, b.agg);
    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
    lab.clusters.erase(lab.clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  for (std::size_t i = 0; i < lab.clusters.size(); ++i)
    lab.clusters[i].label = static_cast<int>(i);
  recompute_total_variance(lab);
  return lab;
}

// Border members of a cluster: the `quota` members farthest from the
// aggregate center, never surrendering the closest one. Tie-break (site,index).
inline std::vector<SubClusterId> find_border(
    const GlobalCluster& cluster,
    const std::vector<SubClusterStats>& stats_by_id, std::size_t quota);

namespace detail {

inline const SubClusterStats& lookup(const std::vector<SubClusterStats>& all,
                                     SubClusterId id) {
  for (const auto& s : all)
    if (s.site == id.first && s.index == id.second) return s;
  throw InconsistencyError("unknown sub-cluster id");
}

}  // namespace detail

inline std::vector<SubClusterId> find_border(
    const GlobalCluster& cluster, const std::vector<SubClusterStats>& all_stats,
    std::size_t quota) {
  if (cluster.members.size() < 2) return {};
  const std::size_t take = std::min(quota, cluster.members.size() - 1);
  std::vector<std::pair<double, SubClusterId>> dist;
  dist.reserve(cluster.members.size());
  for (const auto& id : cluster.members) {
    const auto& s = detail::lookup(all_stats, id);
    dist.push_back({euclidean_distance(s.center, cluster.agg.center), id});
  }
  std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<SubClusterId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
  return out;
}

struct PerturbMove {
  SubClusterId moved;
  int from_label = 0;
  int to_label = 0;
  double pair_variance_before = 0.0;
  double pair_variance_after = 0.0;
};

// Border-candidate relocation between global clusters whenever it lowers the
// variance sum of the two affected clusters. Aggregates are maintained
// incrementally via merge_stats/remove_stats.
inline GlobalLabeling perturb(const GlobalLabeling& labeling,
                              const std::vector<SubClusterStats>& all_stats,
                              const AggregationParams& params,
                              std::vector<PerturbMove>* moves_out = nullptr) {
  params.validate();
  GlobalLabeling lab = labeling;
  if (params.border_count == 0 || lab.clusters.size() < 2) {
    recompute_total_variance(lab);
    return lab;
  }

  std::size_t total_members = 0, total_points = 0;
  for (const auto& c : lab.clusters) {
    total_members += c.members.size();
    total_points += c.agg.size;
  }

  for (std::size_t pass = 0; pass < params.perturbation_passes; ++pass) {
    for (std::size_t ci = 0; ci < lab.clusters.size(); ++ci) {
      auto& cluster = lab.clusters[ci];
      if (cluster.members.size() < 2) continue;

      const double share =
          params.quota_by_points
              ? static_cast<double>(cluster.agg.size) / static_cast<double>(total_points)
              : static_cast<double>(cluster.members.size()) /
                    static_cast<double>(total_members);
      const std::size_t quota = std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::llround(static_cast<double>(params.border_count) * share)));

      std::vector<SubClusterId> candidates = find_border(cluster, all_stats, quota);

      if (params.multi_attributed_alpha > 1.0) {
        for (const auto& id : cluster.members) {
          if (std::find(candidates.begin(), candidates.end(), id) != candidates.end())
            continue;
          const auto& s = detail::lookup(all_stats, id);
          double nearest = std::numeric_limits<double>::infinity();
          double second = std::numeric_limits<double>::infinity();
          for (const auto& other : lab.clusters) {
            const double d = euclidean_distance(s.center, other.agg.center);
            if (d < nearest) { second = nearest; nearest = d; }
            else if (d < second) { second = d; }
          }
          if (second <= params.multi_attributed_alpha * nearest)
            candidates.push_back(id);
        }
      }

      for (const auto& id : candidates) {
        if (cluster.members.size() < 2) break;  // never empty a cluster
        const auto& x = detail::lookup(all_stats, id);

        // closest other global cluster by aggregate center
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t cj = ci;
        for (std::size_t j = 0; j < lab.clusters.size(); ++j) {
          if (j == ci) continue;
          const double d = euclidean_distance(x.center, lab.clusters[j].agg.center);
          if (d < best_d) { best_d = d; cj = j; }
        }
        if (cj == ci) continue;
        auto& target = lab.clusters[cj];

        const SubClusterStats without = remove_stats(cluster.agg, x);
        const SubClusterStats with = merge_stats(target.agg, x);
        const double before = cluster.agg.variance + target.agg.variance;
        const double after = without.variance + with.variance;
        if (after < before) {
          if (moves_out)
            moves_out->push_back({id, cluster.label, target.label, before, after});
          cluster.agg = without;
          target.agg = with;
          cluster.members.erase(
              std::find(cluster.members.begin(), cluster.members.end(), id));
          target.members.push_back(id);
        }
      }
    }
  }
  recompute_total_variance(lab);
  return lab;
}

// Full aggregation: threshold merging followed by border perturbation.
inline GlobalLabeling aggregate(const std::vector<SubClusterStats>& all_stats,
                                const AggregationParams& params,
                                std::vector<PerturbMove>* moves_out = nullptr) {
  params.validate();
  const double tau = resolve_threshold(all_stats, params);
  GlobalLabeling merged = merge_phase(all_stats, tau);
  return perturb(merged, all_stats, params, moves_out);
}

}  // namespace gdm
