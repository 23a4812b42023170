#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "gdm/common.hpp"
#include "gdm/datagen.hpp"
#include "gdm/gridsim.hpp"

namespace gdm {

// Items are sorted ascending; lexicographic order on the id sequence is the
// canonical ordering everywhere (std::set/std::map defaults give it for free).
using Itemset = std::vector<int>;
using ItemsetSet = std::set<Itemset>;
using SupportMap = std::map<Itemset, long long>;

struct MiningParams {
  double minsup = 0.1;  // fraction in (0,1]
  int k = 4;            // max itemset size

  void validate() const {
    if (!(minsup > 0.0) || minsup > 1.0)
      throw ValidationError("MiningParams: minsup must be in (0,1]");
    if (k < 1) throw ValidationError("MiningParams: k must be >= 1");
  }
};

inline long long threshold_for(double minsup, std::size_t n_transactions) {
  return static_cast<long long>(
      std::ceil(minsup * static_cast<double>(n_transactions) - 1e-12));
}

struct MiningResult {
  // size -> (itemset -> exact global support)
  std::map<int, SupportMap> frequent;
  std::size_t rounds = 0;
  std::size_t messages = 0;
  std::size_t bytes = 0;

  std::size_t total_itemsets() const {
    std::size_t n = 0;
    for (const auto& [sz, m] : frequent) n += m.size();
    return n;
  }
};

inline bool contains(const std::vector<int>& transaction, const Itemset& itemset) {
  return std::includes(transaction.begin(), transaction.end(), itemset.begin(),
                       itemset.end());
}

inline SupportMap count_support(const TransactionDB& db, const ItemsetSet& itemsets) {
  SupportMap counts;
  for (const auto& is : itemsets) counts[is] = 0;
  for (const auto& tx : db.transactions)
    for (auto& [is, c] : counts)
      if (contains(tx, is)) ++c;
  return counts;
}

// Classic Apriori join + prune.
inline ItemsetSet candidate_gen(const ItemsetSet& frequent_prev) {
  if (frequent_prev.empty()) return {};
  const std::size_t len = frequent_prev.begin()->size();
  for (const auto& is : frequent_prev)
    if (is.size() != len)
      throw ValidationError("candidate_gen: mixed itemset sizes");

  ItemsetSet candidates;
  for (auto a = frequent_prev.begin(); a != frequent_prev.end(); ++a) {
    for (auto b = std::next(a); b != frequent_prev.end(); ++b) {
      // join: equal prefixes of length len-1
      if (!std::equal(a->begin(), a->end() - 1, b->begin())) continue;
      Itemset cand = *a;
      cand.push_back(b->back());
      if (cand[cand.size() - 2] > cand.back())
        std::swap(cand[cand.size() - 2], cand.back());
      // prune: every (len)-subset must be frequent
      bool ok = true;
      for (std::size_t drop = 0; drop < cand.size() && ok; ++drop) {
        Itemset sub;
        sub.reserve(cand.size() - 1);
        for (std::size_t i = 0; i < cand.size(); ++i)
          if (i != drop) sub.push_back(cand[i]);
        ok = frequent_prev.count(sub) > 0;
      }
      if (ok) candidates.insert(std::move(cand));
    }
  }
  return candidates;
}

// Levels 1..k of locally frequent itemsets with local supports; stops at the
// first empty level.
inline std::vector<SupportMap> apriori_local(const TransactionDB& db,
                                             const MiningParams& params) {
  params.validate();
  const long long local_min = threshold_for(params.minsup, db.transactions.size());
  std::vector<SupportMap> levels;
  ItemsetSet candidates;
  for (int item = 0; item < db.n_items; ++item) candidates.insert({item});
  for (int level = 1; level <= params.k; ++level) {
    if (candidates.empty()) break;
    SupportMap counts = count_support(db, candidates);
    SupportMap freq;
    for (const auto& [is, c] : counts)
      if (c >= local_min) freq[is] = c;
    if (freq.empty()) break;
    ItemsetSet freq_sets;
    for (const auto& [is, c] : freq) freq_sets.insert(is);
    levels.push_back(std::move(freq));
    if (level < params.k) candidates = candidate_gen(freq_sets);
  }
  return levels;
}

// Wire encoding per message: 4-byte site id + 4-byte count, then per itemset
// a 2-byte length, 4 bytes per item id and an 8-byte support.
inline std::size_t wire_message_bytes(const ItemsetSet& itemsets) {
  std::size_t bytes = 4 + 4;
  for (const auto& is : itemsets) bytes += 2 + 4 * is.size() + 8;
  return bytes;
}

inline ItemsetSet immediate_subsets(const Itemset& is) {
  ItemsetSet subs;
  if (is.size() < 2) return subs;
  for (std::size_t drop = 0; drop < is.size(); ++drop) {
    Itemset sub;
    sub.reserve(is.size() - 1);
    for (std::size_t i = 0; i < is.size(); ++i)
      if (i != drop) sub.push_back(is[i]);
    subs.insert(std::move(sub));
  }
  return subs;
}

inline void all_nonempty_subsets(const Itemset& is, ItemsetSet& out) {
  const std::size_t n = is.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    Itemset sub;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) sub.push_back(is[i]);
    out.insert(std::move(sub));
  }
}

namespace detail {

// Exact global supports, memoized across the whole run.
class SupportOracle {
 public:
  explicit SupportOracle(const std::vector<TransactionDB>& dbs) : dbs_(&dbs) {}

  long long global(const Itemset& is) {
    auto it = memo_.find(is);
    if (it != memo_.end()) return it->second;
    long long total = 0;
    for (const auto& db : *dbs_)
      for (const auto& tx : db.transactions)
        if (contains(tx, is)) ++total;
    memo_[is] = total;
    return total;
  }

 private:
  const std::vector<TransactionDB>* dbs_;
  SupportMap memo_;
};

}  // namespace detail

struct GfmOptions {
  // When set, failed itemsets expand only to their locally frequent
  // immediate subsets instead of all immediate undecided ones.
  bool expand_only_locally_frequent = false;
};

// Single-reconciliation grid miner: independent local Apriori runs, then a
// top-down global phase starting from each site's maximal locally frequent
// itemsets. Failed itemsets fall back to their immediate subsets; each loop
// iteration is one synchronization round.
inline MiningResult gfm_run(const std::vector<TransactionDB>& site_dbs,
                            const MiningParams& params, Session& session,
                            const GfmOptions& opts = {}) {
  params.validate();
  if (site_dbs.empty()) throw ValidationError("gfm_run: need at least one site");
  const std::size_t s = site_dbs.size();
  std::size_t total_tx = 0;
  for (const auto& db : site_dbs) total_tx += db.transactions.size();
  const long long global_min = threshold_for(params.minsup, total_tx);

  const std::size_t msgs_before = session.log().messages;
  const std::size_t bytes_before = session.log().total_bytes;
  const std::size_t rounds_before = session.log().rounds;

  // Phase 1: local generation.
  std::vector<ItemsetSet> local_frequent(s);
  for (std::size_t i = 0; i < s; ++i)
    for (const auto& level : apriori_local(site_dbs[i], params))
      for (const auto& [is, c] : level) local_frequent[i].insert(is);

  // Initial frontier: each site's maximal locally frequent itemsets.
  std::vector<ItemsetSet> frontier(s);
  for (std::size_t i = 0; i < s; ++i) {
    for (const auto& is : local_frequent[i]) {
      bool maximal = true;
      for (const auto& other : local_frequent[i]) {
        if (other.size() > is.size() &&
            std::includes(other.begin(), other.end(), is.begin(), is.end())) {
          maximal = false;
          break;
        }
      }
      if (maximal) frontier[i].insert(is);
    }
  }

  detail::SupportOracle oracle(site_dbs);
  std::vector<SupportMap> decided_frequent(s);  // per site, with global supports
  std::vector<ItemsetSet> decided_failed(s);
  std::size_t rounds = 0;

  auto any_frontier = [&] {
    for (const auto& f : frontier)
      if (!f.empty()) return true;
    return false;
  };

  while (any_frontier()) {
    // One barrier round: every site with a nonempty frontier broadcasts its
    // request and receives per-site supports back.
    std::vector<Exchange> exchanges;
    for (std::size_t i = 0; i < s; ++i) {
      if (frontier[i].empty()) continue;
      const std::size_t req = wire_message_bytes(frontier[i]);
      for (std::size_t j = 0; j < s; ++j) {
        if (j == i) continue;
        exchanges.push_back({i, j, req});       // request (supports zeroed)
        exchanges.push_back({j, i, req});       // response with counts
      }
    }
    session.barrier_round(exchanges);
    ++rounds;

    std::vector<ItemsetSet> fill(s);  // implied subsets needing exact supports
    for (std::size_t i = 0; i < s; ++i) {
      if (frontier[i].empty()) continue;
      ItemsetSet next;
      ItemsetSet failed_this_round;
      for (const auto& is : frontier[i]) {
        const long long g = oracle.global(is);
        if (g >= global_min) {
          decided_frequent[i][is] = g;
          ItemsetSet subs;
          all_nonempty_subsets(is, subs);
          for (const auto& sub : subs) {
            if (decided_frequent[i].count(sub)) continue;
            decided_frequent[i][sub] = oracle.global(sub);
            fill[i].insert(sub);
          }
        } else {
          decided_failed[i].insert(is);
          failed_this_round.insert(is);
        }
      }
      for (const auto& is : failed_this_round) {
        for (const auto& sub : immediate_subsets(is)) {
          if (decided_frequent[i].count(sub) || decided_failed[i].count(sub))
            continue;
          if (opts.expand_only_locally_frequent && !local_frequent[i].count(sub))
            continue;
          next.insert(sub);
        }
      }
      frontier[i] = std::move(next);
    }

    // Support-fill for implication-derived subsets piggybacks on this round.
    std::vector<Exchange> fills;
    for (std::size_t i = 0; i < s; ++i) {
      if (fill[i].empty()) continue;
      const std::size_t req = wire_message_bytes(fill[i]);
      for (std::size_t j = 0; j < s; ++j) {
        if (j == i) continue;
        fills.push_back({i, j, req});
        fills.push_back({j, i, req});
      }
    }
    if (!fills.empty()) session.piggyback(fills);
  }

  MiningResult result;
  for (std::size_t i = 0; i < s; ++i)
    for (const auto& [is, g] : decided_frequent[i])
      result.frequent[static_cast<int>(is.size())][is] = g;
  result.rounds = rounds;
  result.messages = session.log().messages - msgs_before;
  result.bytes = session.log().total_bytes - bytes_before;
  (void)rounds_before;
  return result;
}

// Level-wise distributed baseline: one synchronization round per level, each
// with a locally-frequent broadcast sub-stage and a support poll sub-stage.
inline MiningResult fdm_run(const std::vector<TransactionDB>& site_dbs,
                            const MiningParams& params, Session& session) {
  params.validate();
  if (site_dbs.empty()) throw ValidationError("fdm_run: need at least one site");
  const std::size_t s = site_dbs.size();
  std::size_t total_tx = 0;
  for (const auto& db : site_dbs) total_tx += db.transactions.size();
  const long long global_min = threshold_for(params.minsup, total_tx);
  std::vector<long long> local_min(s);
  for (std::size_t i = 0; i < s; ++i)
    local_min[i] = threshold_for(params.minsup, site_dbs[i].transactions.size());

  const std::size_t msgs_before = session.log().messages;
  const std::size_t bytes_before = session.log().total_bytes;

  MiningResult result;
  std::size_t rounds = 0;
  ItemsetSet prev_global;
  for (int level = 1; level <= params.k; ++level) {
    ItemsetSet candidates;
    if (level == 1) {
      int n_items = 0;
      for (const auto& db : site_dbs) n_items = std::max(n_items, db.n_items);
      for (int item = 0; item < n_items; ++item) candidates.insert({item});
    } else {
      candidates = candidate_gen(prev_global);
    }
    if (candidates.empty()) break;

    std::vector<SupportMap> site_counts(s);
    std::vector<ItemsetSet> locally_frequent(s);
    for (std::size_t i = 0; i < s; ++i) {
      site_counts[i] = count_support(site_dbs[i], candidates);
      for (const auto& [is, c] : site_counts[i])
        if (c >= local_min[i]) locally_frequent[i].insert(is);
    }
    ItemsetSet round_union;
    for (const auto& lf : locally_frequent)
      round_union.insert(lf.begin(), lf.end());
    if (round_union.empty()) break;  // empty level

    // Broadcast sub-stage: each site ships its locally frequent candidates
    // with counts; poll sub-stage: each site returns counts for the rest of
    // the round's union.
    std::vector<Exchange> exchanges;
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t bcast = wire_message_bytes(locally_frequent[i]);
      ItemsetSet poll;
      for (const auto& is : round_union)
        if (!locally_frequent[i].count(is)) poll.insert(is);
      const std::size_t poll_bytes = wire_message_bytes(poll);
      for (std::size_t j = 0; j < s; ++j) {
        if (j == i) continue;
        if (!locally_frequent[i].empty()) exchanges.push_back({i, j, bcast});
        if (!poll.empty()) exchanges.push_back({i, j, poll_bytes});
      }
    }
    session.barrier_round(exchanges);
    ++rounds;

    ItemsetSet level_global;
    for (const auto& is : round_union) {
      long long total = 0;
      for (std::size_t i = 0; i < s; ++i) total += site_counts[i][is];
      if (total >= global_min) {
        level_global.insert(is);
        result.frequent[level][is] = total;
      }
    }
    if (level_global.empty()) break;
    prev_global = std::move(level_global);
  }

  result.rounds = rounds;
  result.messages = session.log().messages - msgs_before;
  result.bytes = session.log().total_bytes - bytes_before;
  return result;
}

// Plain Apriori over the pooled database at the global threshold.
inline MiningResult centralized_apriori(const std::vector<TransactionDB>& site_dbs,
                                        const MiningParams& params) {
  params.validate();
  TransactionDB pooled;
  for (const auto& db : site_dbs) {
    pooled.n_items = std::max(pooled.n_items, db.n_items);
    pooled.transactions.insert(pooled.transactions.end(), db.transactions.begin(),
                               db.transactions.end());
  }
  MiningResult result;
  for (std::size_t level = 0;
       const auto& freq : apriori_local(pooled, params)) {
    result.frequent[static_cast<int>(++level)] = freq;
  }
  result.rounds = 0;
  return result;
}

}  // namespace gdm
