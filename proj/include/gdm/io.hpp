#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gdm/clustering.hpp"
#include "gdm/common.hpp"
#include "gdm/datagen.hpp"
#include "gdm/gridsim.hpp"
#include "gdm/itemsets.hpp"

namespace gdm::io {

using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

// ---- point files: CSV, one point per line, no header ----

inline std::string points_to_csv(const PointSet& ps) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& p : ps.points) {
    for (std::size_t d = 0; d < p.size(); ++d) {
      if (d) out << ',';
      out << p[d];
    }
    out << '\n';
  }
  return out.str();
}

inline PointSet points_from_csv(const std::string& text) {
  PointSet ps;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Vec p;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) p.push_back(std::stod(cell));
    if (ps.points.empty()) ps.dims = p.size();
    if (p.size() != ps.dims) throw ValidationError("point CSV: ragged row");
    ps.points.push_back(std::move(p));
  }
  return ps;
}

// ---- transaction files: one transaction per line, space-separated ids ----

inline std::string transactions_to_text(const TransactionDB& db) {
  std::ostringstream out;
  for (const auto& tx : db.transactions) {
    for (std::size_t i = 0; i < tx.size(); ++i) {
      if (i) out << ' ';
      out << tx[i];
    }
    out << '\n';
  }
  return out.str();
}

inline TransactionDB transactions_from_text(const std::string& text) {
  TransactionDB db;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<int> tx;
    std::istringstream ls(line);
    int item;
    while (ls >> item) tx.push_back(item);
    for (std::size_t i = 0; i < tx.size(); ++i) {
      if (tx[i] < 0 || (i > 0 && tx[i] <= tx[i - 1]))
        throw ValidationError("transaction file: items must be strictly ascending");
      db.n_items = std::max(db.n_items, tx[i] + 1);
    }
    db.transactions.push_back(std::move(tx));
  }
  // plain-text files end with a trailing newline; the final getline miss
  // means the empty last "line" was not a transaction
  return db;
}

// ---- spec JSON ----

inline MixtureSpec mixture_spec_from_json(const json& j) {
  MixtureSpec spec;
  spec.dims = j.at("dims").get<std::size_t>();
  spec.seed = j.value("seed", std::uint64_t{0});
  for (const auto& c : j.at("components")) {
    MixtureComponent mc;
    mc.center = c.at("center").get<Vec>();
    mc.stddev = c.at("stddev").get<double>();
    mc.count = c.at("count").get<std::size_t>();
    spec.components.push_back(std::move(mc));
  }
  spec.validate();
  return spec;
}

inline TransactionSpec transaction_spec_from_json(const json& j) {
  TransactionSpec spec;
  spec.n_items = j.at("n_items").get<int>();
  spec.n_transactions = j.at("n_transactions").get<std::size_t>();
  spec.noise_prob = j.value("noise_prob", 0.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("patterns")) {
    for (const auto& p : j.at("patterns")) {
      Pattern pat;
      pat.itemset = p.at("itemset").get<std::vector<int>>();
      pat.prob = p.at("prob").get<double>();
      spec.patterns.push_back(std::move(pat));
    }
  }
  spec.validate();
  return spec;
}

// ---- link matrix JSON: {sites, bandwidth_mbps, latency_ms} ----

inline LinkMatrix link_matrix_from_json(const json& j) {
  LinkMatrix m;
  m.sites = j.at("sites").get<std::vector<std::string>>();
  m.bandwidth_mbps = j.at("bandwidth_mbps").get<std::vector<std::vector<double>>>();
  m.latency_ms = j.at("latency_ms").get<std::vector<std::vector<double>>>();
  m.overhead_factor = j.value("overhead_factor", 1.0);
  m.validate();
  return m;
}

inline json link_matrix_to_json(const LinkMatrix& m) {
  return json{{"sites", m.sites},
              {"bandwidth_mbps", m.bandwidth_mbps},
              {"latency_ms", m.latency_ms},
              {"overhead_factor", m.overhead_factor}};
}

// ---- clustering interchange ----

inline std::string stats_to_csv(const std::vector<SubClusterStats>& stats) {
  std::ostringstream out;
  out << std::setprecision(17);
  std::size_t dims = stats.empty() ? 0 : stats.front().center.size();
  out << "site,index,size";
  for (std::size_t d = 0; d < dims; ++d) out << ",center_" << d;
  out << ",variance\n";
  for (const auto& s : stats) {
    out << s.site << ',' << s.index << ',' << s.size;
    for (double c : s.center) out << ',' << c;
    out << ',' << s.variance << '\n';
  }
  return out.str();
}

inline std::vector<SubClusterStats> stats_from_csv(const std::string& text) {
  std::vector<SubClusterStats> stats;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return stats;  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) throw ValidationError("stats CSV: short row");
    SubClusterStats s;
    s.site = std::stoi(cells[0]);
    s.index = std::stoi(cells[1]);
    s.size = std::stoul(cells[2]);
    for (std::size_t i = 3; i + 1 < cells.size(); ++i)
      s.center.push_back(std::stod(cells[i]));
    s.variance = std::stod(cells.back());
    stats.push_back(std::move(s));
  }
  return stats;
}

inline json labeling_to_json(const GlobalLabeling& lab) {
  json clusters = json::array();
  for (const auto& c : lab.clusters) {
    json members = json::array();
    for (const auto& [site, index] : c.members)
      members.push_back({{"site", site}, {"index", index}});
    clusters.push_back({{"label", c.label},
                        {"members", members},
                        {"size", c.agg.size},
                        {"center", c.agg.center},
                        {"variance", c.agg.variance}});
  }
  return json{{"clusters", clusters}, {"total_variance", lab.total_variance}};
}

// ---- mining result JSON ----

inline json mining_result_to_json(const MiningResult& r) {
  json by_size = json::object();
  for (const auto& [size, m] : r.frequent) {
    json arr = json::array();
    for (const auto& [items, support] : m)
      arr.push_back({{"items", items}, {"support", support}});
    by_size[std::to_string(size)] = std::move(arr);
  }
  return json{{"frequent", by_size},
              {"rounds", r.rounds},
              {"messages", r.messages},
              {"bytes", r.bytes}};
}

// ---- accounting log CSV ----

inline std::string log_to_csv(const AccountingLog& log) {
  std::ostringstream out;
  out << "round,stage,from,to,bytes,seconds\n";
  out << std::setprecision(17);
  for (const auto& e : log.entries)
    out << e.round << ',' << e.stage << ',' << e.from << ',' << e.to << ','
        << e.bytes << ',' << e.seconds << '\n';
  return out.str();
}

}  // namespace gdm::io
