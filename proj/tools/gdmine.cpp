// gdmine: experiment runner for the distributed clustering and frequent
// itemset protocols over the simulated grid.
//
// Subcommands:
//   gen       write per-site dataset files from a spec
//   mine      run gfm/fdm/both/centralized mining and emit a RunReport
//   cluster   run local clustering + global aggregation and emit a RunReport
//   estimate  overhead arithmetic (incl. the --paper-preset self-check)
//   report    pretty-print a RunReport JSON file
//
// Exit codes: 0 ok, 2 validation error, 3 equivalence violation, 4 I/O error.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdm/clustering.hpp"
#include "gdm/common.hpp"
#include "gdm/datagen.hpp"
#include "gdm/estimator.hpp"
#include "gdm/gridsim.hpp"
#include "gdm/io.hpp"
#include "gdm/itemsets.hpp"

using json = nlohmann::json;
using namespace gdm;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr const char* kSchemaVersion = "1";

constexpr int kExitValidation = 2;
constexpr int kExitEquivalence = 3;
constexpr int kExitIo = 4;

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

// Resolved options; config file first, flags win.
struct Options {
  std::string config_path;
  std::optional<std::size_t> sites;
  std::optional<double> minsup;
  std::optional<int> k;
  std::optional<std::size_t> ki;
  std::optional<std::string> tau;  // "auto" or a number
  std::optional<std::size_t> border;
  std::optional<std::string> algo;
  std::optional<std::string> links;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> dump_log;
  json config = json::object();

  void load() {
    if (!config_path.empty())
      config = json::parse(io::read_file(config_path));
    if (sites) config["sites"] = *sites;
    if (minsup) config["minsup"] = *minsup;
    if (k) config["k"] = *k;
    if (ki) config["ki"] = *ki;
    if (tau) config["tau"] = *tau;
    if (border) config["border"] = *border;
    if (algo) config["algo"] = *algo;
    if (links) config["links"] = *links;
    if (seed) config["seed"] = *seed;
    if (out) config["out"] = *out;
    if (dump_log) config["dump_log"] = *dump_log;
  }

  std::size_t n_sites() const { return config.value("sites", std::size_t{1}); }
  std::uint64_t run_seed() const { return config.value("seed", std::uint64_t{0}); }

  LinkMatrix link_matrix() const {
    const std::string spec = config.value("links", std::string("table2"));
    if (spec == "table2" || spec == "table2-default")
      return LinkMatrix::table2_default();
    return io::link_matrix_from_json(json::parse(io::read_file(spec)));
  }

  PartitionStrategy partition_strategy() const {
    const std::string s = config.value("partition", std::string("round_robin"));
    if (s == "round_robin") return PartitionStrategy::RoundRobin;
    if (s == "contiguous") return PartitionStrategy::Contiguous;
    if (s == "shuffled") return PartitionStrategy::Shuffled;
    throw ValidationError("unknown partition strategy: " + s);
  }
};

void add_common_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--sites", opt.sites, "number of sites");
  cmd->add_option("--minsup", opt.minsup, "minimum support fraction");
  cmd->add_option("--k", opt.k, "maximum itemset size");
  cmd->add_option("--ki", opt.ki, "sub-clusters per site");
  cmd->add_option("--tau", opt.tau, "merge threshold (number or 'auto')");
  cmd->add_option("--border", opt.border, "border candidate count");
  cmd->add_option("--algo", opt.algo, "gfm|fdm|both|centralized");
  cmd->add_option("--links", opt.links, "link matrix path or 'table2'");
  cmd->add_option("--seed", opt.seed, "run seed");
  cmd->add_option("--out", opt.out, "output path");
  cmd->add_option("--dump-log", opt.dump_log, "accounting log CSV path");
}

json report_skeleton(const Options& opt, const std::string& task) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["tool_version"] = kToolVersion;
  r["timestamp"] = now_iso8601();
  r["task"] = task;
  r["seed"] = opt.run_seed();
  json echo = opt.config;
  echo.erase("out");
  echo.erase("dump_log");
  r["config"] = echo;
  return r;
}

void emit_report(const Options& opt, const json& report) {
  const std::string text = report.dump(2) + "\n";
  if (opt.config.contains("out"))
    io::write_file(opt.config["out"].get<std::string>(), text);
  else
    std::cout << text;
}

std::vector<TransactionDB> load_site_dbs(const Options& opt) {
  const json& data = opt.config.at("data");
  if (data.contains("transaction_files")) {
    std::vector<TransactionDB> dbs;
    for (const auto& path : data.at("transaction_files"))
      dbs.push_back(io::transactions_from_text(io::read_file(path.get<std::string>())));
    int n_items = 0;
    for (const auto& db : dbs) n_items = std::max(n_items, db.n_items);
    for (auto& db : dbs) db.n_items = n_items;
    return dbs;
  }
  TransactionSpec spec = io::transaction_spec_from_json(data.at("transaction_spec"));
  if (opt.config.contains("seed")) spec.seed = opt.run_seed();
  TransactionDB all = gen_transactions(spec);
  return partition(all, opt.n_sites(), opt.partition_strategy(), opt.run_seed());
}

std::vector<PointSet> load_site_points(const Options& opt) {
  const json& data = opt.config.at("data");
  if (data.contains("point_files")) {
    std::vector<PointSet> sets;
    for (const auto& path : data.at("point_files"))
      sets.push_back(io::points_from_csv(io::read_file(path.get<std::string>())));
    return sets;
  }
  MixtureSpec spec = io::mixture_spec_from_json(data.at("mixture_spec"));
  if (opt.config.contains("seed")) spec.seed = opt.run_seed();
  PointSet all = gen_gaussian_mixture(spec);
  return partition(all, opt.n_sites(), opt.partition_strategy(), opt.run_seed());
}

int cmd_gen(Options& opt) {
  opt.load();
  const std::string prefix = opt.config.value("out", std::string("data"));
  const json& data = opt.config.at("data");
  if (data.contains("transaction_spec")) {
    auto dbs = load_site_dbs(opt);
    for (std::size_t i = 0; i < dbs.size(); ++i) {
      const std::string path = prefix + "_site" + std::to_string(i) + ".txt";
      io::write_file(path, io::transactions_to_text(dbs[i]));
      std::cout << path << ": " << dbs[i].transactions.size() << " transactions\n";
    }
  } else if (data.contains("mixture_spec")) {
    auto sets = load_site_points(opt);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string path = prefix + "_site" + std::to_string(i) + ".csv";
      io::write_file(path, io::points_to_csv(sets[i]));
      std::cout << path << ": " << sets[i].points.size() << " points\n";
    }
  } else {
    throw ValidationError("gen: config.data needs transaction_spec or mixture_spec");
  }
  return 0;
}

int cmd_mine(Options& opt) {
  opt.load();
  auto dbs = load_site_dbs(opt);
  MiningParams params;
  params.minsup = opt.config.value("minsup", 0.1);
  params.k = opt.config.value("k", 4);
  params.validate();
  const std::string algo = opt.config.value("algo", std::string("gfm"));

  json report = report_skeleton(opt, "mine");
  json site_sizes = json::array();
  for (const auto& db : dbs) site_sizes.push_back(db.transactions.size());
  report["site_transactions"] = site_sizes;

  Session session(opt.link_matrix());

  auto summarize = [](const MiningResult& r) {
    json counts = json::object();
    for (const auto& [size, sets] : r.frequent)
      counts[std::to_string(size)] = sets.size();
    json j = io::mining_result_to_json(r);
    j["counts_per_size"] = counts;
    return j;
  };

  if (algo == "gfm") {
    MiningResult r = gfm_run(dbs, params, session);
    report["gfm"] = summarize(r);
    report["makespan_s"] = session.comm_makespan();
  } else if (algo == "fdm") {
    MiningResult r = fdm_run(dbs, params, session);
    report["fdm"] = summarize(r);
    report["makespan_s"] = session.comm_makespan();
  } else if (algo == "centralized") {
    MiningResult r = centralized_apriori(dbs, params);
    report["centralized"] = summarize(r);
    report["makespan_s"] = 0.0;
  } else if (algo == "both") {
    MiningResult g = gfm_run(dbs, params, session);
    const double gfm_makespan = session.comm_makespan();
    Session fdm_session(opt.link_matrix());
    MiningResult f = fdm_run(dbs, params, fdm_session);
    if (g.frequent != f.frequent) {
      std::cerr << "equivalence violation: gfm and fdm disagree\n";
      return kExitEquivalence;
    }
    report["gfm"] = summarize(g);
    report["fdm"] = summarize(f);
    report["makespan_s"] = gfm_makespan;
    report["fdm_makespan_s"] = fdm_session.comm_makespan();
  } else {
    throw ValidationError("mine: unknown algo " + algo);
  }

  if (opt.config.contains("measured_s") && report.contains("makespan_s")) {
    OverheadReport oh = overhead(opt.config["measured_s"].get<double>(),
                                 report["makespan_s"].get<double>(), "mine");
    report["overhead"] = {{"measured", oh.measured},
                          {"estimated", oh.estimated},
                          {"unit", oh.unit},
                          {"overhead_pct", oh.overhead_pct},
                          {"estimator_exceeds", oh.estimator_exceeds}};
  }
  if (opt.config.contains("dump_log"))
    io::write_file(opt.config["dump_log"].get<std::string>(),
                   io::log_to_csv(session.log()));
  emit_report(opt, report);
  return 0;
}

int cmd_cluster(Options& opt) {
  opt.load();
  auto sites = load_site_points(opt);
  const std::size_t s = sites.size();
  const std::size_t ki = opt.config.value("ki", std::size_t{20});

  AggregationParams params;
  const std::string tau = opt.config.value("tau", std::string("auto"));
  if (tau != "auto") params.merge_threshold = std::stod(tau);
  params.border_count = opt.config.value("border", std::size_t{0});
  if (opt.config.contains("perturbation_passes"))
    params.perturbation_passes = opt.config["perturbation_passes"].get<std::size_t>();
  params.validate();

  std::vector<SubClusterStats> all_stats;
  std::vector<double> payloads;
  std::size_t dims = sites.empty() ? 0 : sites[0].dims;
  for (std::size_t i = 0; i < s; ++i) {
    auto stats = local_cluster(sites[i], ki, opt.run_seed() + i, static_cast<int>(i));
    payloads.push_back(static_cast<double>(clustering_payload_bytes(stats, dims)));
    all_stats.insert(all_stats.end(), stats.begin(), stats.end());
  }

  // ship stats to the aggregation site (site 0) in one barrier round
  Session session(opt.link_matrix());
  std::vector<Exchange> exchanges;
  std::size_t payload_total = 0;
  for (std::size_t i = 0; i < s; ++i) {
    payload_total += static_cast<std::size_t>(payloads[i]);
    if (i != 0)
      exchanges.push_back({i, 0, static_cast<std::size_t>(payloads[i])});
  }
  session.barrier_round(exchanges);

  std::vector<PerturbMove> moves;
  GlobalLabeling lab = aggregate(all_stats, params, &moves);

  json report = report_skeleton(opt, "cluster");
  report["k_g"] = lab.clusters.size();
  report["total_variance"] = lab.total_variance;
  report["labeling"] = io::labeling_to_json(lab);
  report["payload_bytes"] = payload_total;
  report["perturb_moves"] = moves.size();
  report["accounting"] = {{"rounds", session.log().rounds},
                          {"messages", session.log().messages},
                          {"bytes", session.log().total_bytes}};
  report["makespan_s"] = session.comm_makespan();
  if (opt.config.contains("dump_log"))
    io::write_file(opt.config["dump_log"].get<std::string>(),
                   io::log_to_csv(session.log()));
  emit_report(opt, report);
  return 0;
}

struct EstimateArgs {
  bool paper_preset = false;
  std::optional<double> measured;
  std::optional<double> estimated;
  std::string unit = "seconds";
  std::string measured_unit, estimated_unit;
  std::string plan_path;
};

json overhead_to_json(const OverheadReport& r) {
  return {{"task", r.task},
          {"measured", r.measured},
          {"estimated", r.estimated},
          {"unit", r.unit},
          {"overhead_pct", r.overhead_pct},
          {"estimator_exceeds", r.estimator_exceeds}};
}

int cmd_estimate(Options& opt, const EstimateArgs& args) {
  opt.load();
  json report = report_skeleton(opt, "estimate");
  json rows = json::array();

  if (args.paper_preset) {
    rows.push_back(overhead_to_json(overhead(1050.0, 19.52, "V-Clustering", "seconds")));
    rows.push_back(overhead_to_json(overhead(521.0, 424.0, "GFM", "minutes")));
    rows.push_back(overhead_to_json(overhead(687.0, 518.0, "FDM", "minutes")));
    report["relative_gain_measured_pct"] = round1(relative_gain(687.0, 521.0));
    report["relative_gain_estimated_pct"] = round1(relative_gain(518.0, 424.0));
  } else if (args.measured && args.estimated) {
    const std::string mu = args.measured_unit.empty() ? args.unit : args.measured_unit;
    const std::string eu = args.estimated_unit.empty() ? args.unit : args.estimated_unit;
    if (mu != eu)
      throw ValidationError("estimate: measured/estimated unit mismatch (" + mu +
                            " vs " + eu + ")");
    rows.push_back(overhead_to_json(overhead(*args.measured, *args.estimated, "", mu)));
  } else if (!args.plan_path.empty()) {
    const json plan_json = json::parse(io::read_file(args.plan_path));
    StagePlan plan;
    for (const auto& stage_costs : plan_json.at("stage_costs")) {
      Stage st;
      std::size_t site = 0;
      for (const auto& c : stage_costs)
        st.activities.push_back({site++, c.get<double>(), {}});
      plan.stages.push_back(std::move(st));
    }
    report["estimated"] = estimate_itemsets(plan, opt.link_matrix());
    if (args.measured)
      rows.push_back(overhead_to_json(
          overhead(*args.measured, report["estimated"].get<double>(), "", args.unit)));
  } else {
    throw ValidationError(
        "estimate: need --paper-preset, --measured/--estimated, or --plan");
  }

  report["overheads"] = rows;
  emit_report(opt, report);
  for (const auto& row : rows)
    std::cout << (row["task"].get<std::string>().empty()
                      ? std::string("overhead")
                      : row["task"].get<std::string>())
              << ": measured " << row["measured"].get<double>() << " "
              << row["unit"].get<std::string>() << ", estimated "
              << row["estimated"].get<double>() << ", overhead "
              << row["overhead_pct"].get<double>() << "%\n";
  return 0;
}

int cmd_report(const std::string& path) {
  const json r = json::parse(io::read_file(path));
  std::cout << "RunReport (" << r.value("task", "?") << ") tool "
            << r.value("tool_version", "?") << " seed " << r.value("seed", 0)
            << "\n";
  if (r.contains("k_g"))
    std::cout << "  k_g: " << r["k_g"] << "  total_variance: " << r["total_variance"]
              << "\n";
  for (const char* algo : {"gfm", "fdm", "centralized"}) {
    if (!r.contains(algo)) continue;
    const json& a = r[algo];
    std::cout << "  " << algo << ": rounds " << a.value("rounds", 0) << ", messages "
              << a.value("messages", 0) << ", bytes " << a.value("bytes", 0) << "\n";
    if (a.contains("counts_per_size"))
      for (const auto& [size, count] : a["counts_per_size"].items())
        std::cout << "    size " << size << ": " << count << " itemsets\n";
  }
  if (r.contains("accounting"))
    std::cout << "  rounds " << r["accounting"].value("rounds", 0) << ", bytes "
              << r["accounting"].value("bytes", 0) << "\n";
  if (r.contains("makespan_s"))
    std::cout << "  modeled makespan: " << r["makespan_s"].get<double>() << " s\n";
  for (const auto& row : r.value("overheads", json::array()))
    std::cout << "  overhead " << row.value("task", "") << ": "
              << row.value("overhead_pct", 0.0) << "%\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid data mining experiment runner"};
  app.require_subcommand(1);

  Options gen_opt, mine_opt, cluster_opt, est_opt;
  EstimateArgs est_args;
  std::string report_path;

  CLI::App* gen = app.add_subcommand("gen", "write per-site dataset files");
  add_common_flags(gen, gen_opt);
  CLI::App* mine = app.add_subcommand("mine", "run frequent itemset mining");
  add_common_flags(mine, mine_opt);
  CLI::App* cluster = app.add_subcommand("cluster", "run distributed clustering");
  add_common_flags(cluster, cluster_opt);
  CLI::App* estimate = app.add_subcommand("estimate", "overhead arithmetic");
  add_common_flags(estimate, est_opt);
  estimate->add_flag("--paper-preset", est_args.paper_preset,
                     "run the published results-summary rows");
  estimate->add_option("--measured", est_args.measured, "measured duration");
  estimate->add_option("--estimated", est_args.estimated, "estimated duration");
  estimate->add_option("--unit", est_args.unit, "duration unit");
  estimate->add_option("--measured-unit", est_args.measured_unit, "");
  estimate->add_option("--estimated-unit", est_args.estimated_unit, "");
  estimate->add_option("--plan", est_args.plan_path, "stage-cost plan JSON");
  CLI::App* report = app.add_subcommand("report", "pretty-print a RunReport");
  report->add_option("file", report_path, "RunReport JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_opt);
    if (mine->parsed()) return cmd_mine(mine_opt);
    if (cluster->parsed()) return cmd_cluster(cluster_opt);
    if (estimate->parsed()) return cmd_estimate(est_opt, est_args);
    if (report->parsed()) return cmd_report(report_path);
  } catch (const io::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
