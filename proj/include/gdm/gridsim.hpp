#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "gdm/common.hpp"

namespace gdm {

// Per-ordered-pair bandwidth (Mb/s, 10^6 bits/s) and latency (ms).
struct LinkMatrix {
  std::vector<std::string> sites;
  std::vector<std::vector<double>> bandwidth_mbps;
  std::vector<std::vector<double>> latency_ms;
  // Payload multiplier for protocol framing; raw payload by default.
  double overhead_factor = 1.0;

  static constexpr double kIntraBandwidthMbps = 941.0;
  static constexpr double kIntraLatencyMs = 0.07;

  void validate() const {
    const std::size_t n = sites.size();
    if (n == 0) throw ValidationError("LinkMatrix: no sites");
    if (bandwidth_mbps.size() != n || latency_ms.size() != n)
      throw ValidationError("LinkMatrix: matrix not square over sites");
    for (std::size_t i = 0; i < n; ++i) {
      if (bandwidth_mbps[i].size() != n || latency_ms[i].size() != n)
        throw ValidationError("LinkMatrix: matrix not square over sites");
      for (std::size_t j = 0; j < n; ++j) {
        if (!(bandwidth_mbps[i][j] > 0.0))
          throw ValidationError("LinkMatrix: bandwidth must be > 0");
        if (latency_ms[i][j] < 0.0)
          throw ValidationError("LinkMatrix: latency must be >= 0");
      }
    }
  }

  std::size_t site_id(const std::string& name) const {
    for (std::size_t i = 0; i < sites.size(); ++i)
      if (sites[i] == name) return i;
    throw ValidationError("LinkMatrix: unknown site " + name);
  }

  // Logical site index -> matrix site (wraps when the run has more logical
  // sites than the matrix).
  std::size_t map_site(std::size_t logical) const { return logical % sites.size(); }

  // Inter-site averages observed on the five-site testbed, plus the
  // measured intra-site defaults on the diagonal.
  static LinkMatrix table2_default() {
    LinkMatrix m;
    m.sites = {"Orsay", "Toulouse", "Rennes", "Nancy", "Sophia"};
    const double B = kIntraBandwidthMbps, L = kIntraLatencyMs;
    m.bandwidth_mbps = {
        {B, 16.15, 57.73, 90.77, 17.63},
        {38.97, B, 26.08, 28.89, 35.74},
        {66.33, 12.71, B, 44.63, 26.96},
        {106.63, 14.13, 44.54, B, 30.01},
        {21.45, 17.41, 26.93, 30.14, B},
    };
    m.latency_ms = {
        {L, 15, 8, 5, 28},
        {15, L, 19, 17, 14},
        {8, 19, L, 11, 19},
        {5, 17, 11, L, 17},
        {28, 14, 19, 17, L},
    };
    return m;
  }

  // Uniform single-site matrix (degenerate grids, unit tests).
  static LinkMatrix uniform(std::size_t n_sites, double bw_mbps, double lat_ms) {
    LinkMatrix m;
    for (std::size_t i = 0; i < n_sites; ++i)
      m.sites.push_back("site" + std::to_string(i));
    m.bandwidth_mbps.assign(n_sites, std::vector<double>(n_sites, bw_mbps));
    m.latency_ms.assign(n_sites, std::vector<double>(n_sites, lat_ms));
    for (std::size_t i = 0; i < n_sites; ++i) {
      m.bandwidth_mbps[i][i] = kIntraBandwidthMbps;
      m.latency_ms[i][i] = kIntraLatencyMs;
    }
    return m;
  }
};

inline double comm_time(std::size_t bytes, std::size_t from, std::size_t to,
                        const LinkMatrix& links) {
  if (from >= links.sites.size() || to >= links.sites.size())
    throw ValidationError("comm_time: site index out of range");
  const double payload = static_cast<double>(bytes) * links.overhead_factor;
  return links.latency_ms[from][to] / 1000.0 +
         payload * 8.0 / (links.bandwidth_mbps[from][to] * 1e6);
}

inline double comm_time(std::size_t bytes, const std::string& from,
                        const std::string& to, const LinkMatrix& links) {
  return comm_time(bytes, links.site_id(from), links.site_id(to), links);
}

struct Message {
  std::size_t to = 0;
  std::size_t bytes = 0;
};

struct Activity {
  std::size_t site = 0;
  double compute_cost = 0.0;  // seconds
  std::vector<Message> out_messages;
};

struct Stage {
  std::vector<Activity> activities;
};

struct StagePlan {
  std::vector<Stage> stages;
};

struct LogEntry {
  std::size_t round = 0;
  std::size_t stage = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t bytes = 0;
  double seconds = 0.0;
};

struct AccountingLog {
  std::size_t rounds = 0;
  std::size_t messages = 0;
  std::size_t total_bytes = 0;
  std::vector<std::vector<std::size_t>> link_bytes;  // [from][to]
  std::vector<LogEntry> entries;

  void ensure_links(std::size_t n) {
    if (link_bytes.size() < n)
      link_bytes.resize(n, std::vector<std::size_t>(n, 0));
    for (auto& row : link_bytes) row.resize(std::max(row.size(), n), 0);
  }
};

struct StageResult {
  double makespan = 0.0;
  AccountingLog log;
};

// Makespan = sum over stages of the max per-activity time, where an
// activity's time is its compute cost plus the serialized send time of its
// out-messages.
inline StageResult run_stages(const StagePlan& plan, const LinkMatrix& links) {
  if (plan.stages.empty()) throw ValidationError("run_stages: empty plan");
  StageResult r;
  std::size_t max_site = 0;
  for (const auto& st : plan.stages)
    for (const auto& a : st.activities) {
      max_site = std::max(max_site, a.site);
      for (const auto& m : a.out_messages) max_site = std::max(max_site, m.to);
    }
  r.log.ensure_links(max_site + 1);

  for (std::size_t si = 0; si < plan.stages.size(); ++si) {
    double stage_max = 0.0;
    for (const auto& a : plan.stages[si].activities) {
      if (a.compute_cost < 0.0)
        throw ValidationError("run_stages: negative compute cost");
      double t = a.compute_cost;
      for (const auto& m : a.out_messages) {
        const double ct = comm_time(m.bytes, links.map_site(a.site),
                                    links.map_site(m.to), links);
        t += ct;
        r.log.messages += 1;
        r.log.total_bytes += m.bytes;
        r.log.link_bytes[a.site][m.to] += m.bytes;
        r.log.entries.push_back({0, si, a.site, m.to, m.bytes, ct});
      }
      stage_max = std::max(stage_max, t);
    }
    r.makespan += stage_max;
  }
  return r;
}

struct Exchange {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t bytes = 0;
};

struct RoundRecord {
  std::size_t round = 0;
  std::size_t messages = 0;
  std::size_t bytes = 0;
  double seconds = 0.0;  // max over senders of their serialized send time
};

// Barrier-synchronized accounting session. Protocol modules route every
// cross-site exchange through barrier_round; the round counter is the
// synchronization-round count.
class Session {
 public:
  explicit Session(LinkMatrix links) : links_(std::move(links)) {
    links_.validate();
  }

  const LinkMatrix& links() const { return links_; }
  bool open() const { return open_; }
  void close() { open_ = false; }

  RoundRecord barrier_round(std::vector<Exchange> exchanges) {
    if (!open_) throw StateError("Session: barrier_round on closed session");
    std::stable_sort(exchanges.begin(), exchanges.end(),
                     [](const Exchange& a, const Exchange& b) {
                       return std::tie(a.from, a.to) < std::tie(b.from, b.to);
                     });
    ++log_.rounds;
    RoundRecord rec;
    rec.round = log_.rounds;
    std::size_t max_site = 0;
    for (const auto& e : exchanges)
      max_site = std::max({max_site, e.from, e.to});
    log_.ensure_links(max_site + 1);
    per_site_seconds_.assign(max_site + 1, 0.0);
    for (const auto& e : exchanges) {
      const double ct =
          comm_time(e.bytes, links_.map_site(e.from), links_.map_site(e.to), links_);
      log_.messages += 1;
      log_.total_bytes += e.bytes;
      log_.link_bytes[e.from][e.to] += e.bytes;
      log_.entries.push_back({rec.round, 0, e.from, e.to, e.bytes, ct});
      rec.messages += 1;
      rec.bytes += e.bytes;
      per_site_seconds_[e.from] += ct;
    }
    for (double s : per_site_seconds_) rec.seconds = std::max(rec.seconds, s);
    comm_makespan_ += rec.seconds;
    round_records_.push_back(rec);
    return rec;
  }

  // Adds messages to the most recent round (support-fill piggybacking);
  // does not advance the round counter.
  void piggyback(const std::vector<Exchange>& exchanges) {
    if (!open_) throw StateError("Session: piggyback on closed session");
    if (round_records_.empty())
      throw StateError("Session: piggyback before any round");
    auto& rec = round_records_.back();
    std::size_t max_site = 0;
    for (const auto& e : exchanges)
      max_site = std::max({max_site, e.from, e.to});
    log_.ensure_links(max_site + 1);
    for (const auto& e : exchanges) {
      const double ct =
          comm_time(e.bytes, links_.map_site(e.from), links_.map_site(e.to), links_);
      log_.messages += 1;
      log_.total_bytes += e.bytes;
      log_.link_bytes[e.from][e.to] += e.bytes;
      log_.entries.push_back({rec.round, 0, e.from, e.to, e.bytes, ct});
      rec.messages += 1;
      rec.bytes += e.bytes;
    }
  }

  const AccountingLog& log() const { return log_; }
  const std::vector<RoundRecord>& rounds() const { return round_records_; }
  double comm_makespan() const { return comm_makespan_; }

 private:
  LinkMatrix links_;
  AccountingLog log_;
  std::vector<RoundRecord> round_records_;
  std::vector<double> per_site_seconds_;
  double comm_makespan_ = 0.0;
  bool open_ = true;
};

}  // namespace gdm
