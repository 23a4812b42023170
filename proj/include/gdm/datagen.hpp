#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gdm/common.hpp"

namespace gdm {

struct MixtureComponent {
  Vec center;
  double stddev = 1.0;
  std::size_t count = 0;
};

struct MixtureSpec {
  std::size_t dims = 0;
  std::vector<MixtureComponent> components;
  std::uint64_t seed = 0;

  void validate() const {
    if (dims == 0) throw ValidationError("MixtureSpec: dims must be positive");
    if (components.empty())
      throw ValidationError("MixtureSpec: at least one component required");
    for (const auto& c : components) {
      if (c.center.size() != dims)
        throw ValidationError("MixtureSpec: component center length != dims");
      if (!(c.stddev > 0.0))
        throw ValidationError("MixtureSpec: stddev must be > 0");
      if (c.count == 0)
        throw ValidationError("MixtureSpec: component count must be >= 1");
    }
  }
};

struct Pattern {
  std::vector<int> itemset;  // strictly ascending item ids
  double prob = 0.0;
};

struct TransactionSpec {
  int n_items = 0;
  std::size_t n_transactions = 0;
  std::vector<Pattern> patterns;
  double noise_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_items <= 0) throw ValidationError("TransactionSpec: n_items must be positive");
    if (noise_prob < 0.0 || noise_prob > 1.0)
      throw ValidationError("TransactionSpec: noise_prob must be in [0,1]");
    for (const auto& p : patterns) {
      if (p.itemset.empty())
        throw ValidationError("TransactionSpec: pattern itemset must be nonempty");
      if (p.prob < 0.0 || p.prob > 1.0)
        throw ValidationError("TransactionSpec: pattern prob must be in [0,1]");
      for (std::size_t i = 0; i < p.itemset.size(); ++i) {
        if (p.itemset[i] < 0 || p.itemset[i] >= n_items)
          throw ValidationError("TransactionSpec: pattern item id out of range");
        if (i > 0 && p.itemset[i] <= p.itemset[i - 1])
          throw ValidationError("TransactionSpec: pattern itemset must be strictly ascending");
      }
    }
  }
};

struct PointSet {
  std::size_t dims = 0;
  std::vector<Vec> points;
};

struct TransactionDB {
  int n_items = 0;
  std::vector<std::vector<int>> transactions;  // each strictly ascending
};

inline PointSet gen_gaussian_mixture(const MixtureSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  PointSet out;
  out.dims = spec.dims;
  std::size_t total = 0;
  for (const auto& c : spec.components) total += c.count;
  out.points.reserve(total);
  for (const auto& c : spec.components) {
    for (std::size_t n = 0; n < c.count; ++n) {
      Vec p(spec.dims);
      for (std::size_t d = 0; d < spec.dims; ++d)
        p[d] = c.center[d] + c.stddev * normal01(rng);
      out.points.push_back(std::move(p));
    }
  }
  return out;
}

// Each transaction: every pattern itemset included independently with its
// prob, then every item not covered by an included pattern with noise_prob.
inline TransactionDB gen_transactions(const TransactionSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  TransactionDB db;
  db.n_items = spec.n_items;
  db.transactions.reserve(spec.n_transactions);
  std::vector<char> present(static_cast<std::size_t>(spec.n_items));
  for (std::size_t t = 0; t < spec.n_transactions; ++t) {
    std::fill(present.begin(), present.end(), 0);
    for (const auto& p : spec.patterns) {
      if (uniform01(rng) < p.prob)
        for (int item : p.itemset) present[static_cast<std::size_t>(item)] = 1;
    }
    if (spec.noise_prob > 0.0) {
      for (int item = 0; item < spec.n_items; ++item)
        if (!present[static_cast<std::size_t>(item)] && uniform01(rng) < spec.noise_prob)
          present[static_cast<std::size_t>(item)] = 1;
    }
    std::vector<int> tx;
    for (int item = 0; item < spec.n_items; ++item)
      if (present[static_cast<std::size_t>(item)]) tx.push_back(item);
    db.transactions.push_back(std::move(tx));
  }
  return db;
}

enum class PartitionStrategy { RoundRobin, Contiguous, Shuffled };

// Index assignment shared by PointSet and TransactionDB partitioning.
inline std::vector<std::vector<std::size_t>> partition_indices(
    std::size_t n_records, std::size_t n_sites, PartitionStrategy strategy,
    std::uint64_t shuffle_seed = 0) {
  if (n_sites == 0) throw ValidationError("partition: n_sites must be >= 1");
  if (n_sites > n_records)
    throw ValidationError("partition: n_sites exceeds record count");
  std::vector<std::vector<std::size_t>> sites(n_sites);
  switch (strategy) {
    case PartitionStrategy::RoundRobin:
      for (std::size_t r = 0; r < n_records; ++r) sites[r % n_sites].push_back(r);
      break;
    case PartitionStrategy::Contiguous: {
      const std::size_t base = n_records / n_sites;
      const std::size_t rem = n_records % n_sites;
      std::size_t next = 0;
      for (std::size_t s = 0; s < n_sites; ++s) {
        const std::size_t take = base + (s < rem ? 1 : 0);
        for (std::size_t i = 0; i < take; ++i) sites[s].push_back(next++);
      }
      break;
    }
    case PartitionStrategy::Shuffled: {
      std::vector<std::size_t> order(n_records);
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(shuffle_seed);
      for (std::size_t i = n_records; i > 1; --i)
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
      for (std::size_t r = 0; r < n_records; ++r)
        sites[r % n_sites].push_back(order[r]);
      break;
    }
  }
  return sites;
}

inline std::vector<PointSet> partition(const PointSet& data, std::size_t n_sites,
                                       PartitionStrategy strategy,
                                       std::uint64_t shuffle_seed = 0) {
  auto idx = partition_indices(data.points.size(), n_sites, strategy, shuffle_seed);
  std::vector<PointSet> out(n_sites);
  for (std::size_t s = 0; s < n_sites; ++s) {
    out[s].dims = data.dims;
    out[s].points.reserve(idx[s].size());
    for (std::size_t r : idx[s]) out[s].points.push_back(data.points[r]);
  }
  return out;
}

inline std::vector<TransactionDB> partition(const TransactionDB& data,
                                            std::size_t n_sites,
                                            PartitionStrategy strategy,
                                            std::uint64_t shuffle_seed = 0) {
  auto idx = partition_indices(data.transactions.size(), n_sites, strategy, shuffle_seed);
  std::vector<TransactionDB> out(n_sites);
  for (std::size_t s = 0; s < n_sites; ++s) {
    out[s].n_items = data.n_items;
    out[s].transactions.reserve(idx[s].size());
    for (std::size_t r : idx[s]) out[s].transactions.push_back(data.transactions[r]);
  }
  return out;
}

}  // namespace gdm
