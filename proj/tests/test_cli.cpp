#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include <json.hpp>

#include "gdm/io.hpp"
#include "instances.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = GDM_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gdmine_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string strip_timestamp(std::string text) {
  static const std::regex ts("\"timestamp\": \"[^\"]*\"");
  return std::regex_replace(text, ts, "\"timestamp\": \"X\"");
}

json load_json(const std::string& path) {
  return json::parse(gdm::io::read_file(path));
}

std::string showcase_config(const TempDir& dir) {
  // write the showcase instance to per-site transaction files
  auto sites = instances::gfm_vs_fdm_showcase();
  json files = json::array();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const std::string path = dir.file("site" + std::to_string(i) + ".txt");
    write(path, gdm::io::transactions_to_text(sites[i]));
    files.push_back(path);
  }
  json config = {{"sites", 4},
                 {"minsup", 0.5},
                 {"k", 4},
                 {"seed", 1},
                 {"data", {{"transaction_files", files}}}};
  const std::string path = dir.file("mine.json");
  write(path, config.dump());
  return path;
}

}  // namespace

TEST_CASE("gen writes deterministic per-site files") {
  TempDir dir;
  json config = {
      {"sites", 4},
      {"seed", 11},
      {"data",
       {{"transaction_spec",
         {{"n_items", 10},
          {"n_transactions", 800},
          {"noise_prob", 0.1},
          {"patterns", json::array({{{"itemset", {0, 1}}, {"prob", 0.6}}})}}}}}};
  write(dir.file("gen.json"), config.dump());

  REQUIRE(run("gen --config " + dir.file("gen.json") + " --out " + dir.file("a")) == 0);
  for (int i = 0; i < 4; ++i) {
    const std::string text = gdm::io::read_file(dir.file("a_site" + std::to_string(i) + ".txt"));
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 200);
  }
  REQUIRE(run("gen --config " + dir.file("gen.json") + " --out " + dir.file("b")) == 0);
  for (int i = 0; i < 4; ++i)
    REQUIRE(gdm::io::read_file(dir.file("a_site" + std::to_string(i) + ".txt")) ==
            gdm::io::read_file(dir.file("b_site" + std::to_string(i) + ".txt")));
}

TEST_CASE("gen rejects an invalid spec with exit 2") {
  TempDir dir;
  json config = {{"sites", 1},
                 {"data", {{"transaction_spec", {{"n_items", 0}, {"n_transactions", 5}}}}}};
  write(dir.file("bad.json"), config.dump());
  REQUIRE(run("gen --config " + dir.file("bad.json") + " --out " + dir.file("x")) == 2);
}

TEST_CASE("mine both reproduces the 2-vs-4 round contrast") {
  TempDir dir;
  const std::string config = showcase_config(dir);
  REQUIRE(run("mine --config " + config + " --algo both --out " + dir.file("r.json")) == 0);
  json r = load_json(dir.file("r.json"));
  REQUIRE(r["gfm"]["rounds"] == 2);
  REQUIRE(r["fdm"]["rounds"] == 4);
  REQUIRE(r["gfm"]["counts_per_size"] == r["fdm"]["counts_per_size"]);
  REQUIRE(r["gfm"]["bytes"].get<std::size_t>() < r["fdm"]["bytes"].get<std::size_t>());
}

TEST_CASE("single-site gfm equals centralized counts") {
  TempDir dir;
  json config = {{"sites", 1},
                 {"minsup", 0.2},
                 {"k", 3},
                 {"seed", 5},
                 {"data",
                  {{"transaction_spec",
                    {{"n_items", 12},
                     {"n_transactions", 300},
                     {"noise_prob", 0.15},
                     {"patterns",
                      json::array({{{"itemset", {1, 4, 7}}, {"prob", 0.4}}})}}}}}};
  write(dir.file("c.json"), config.dump());
  REQUIRE(run("mine --config " + dir.file("c.json") + " --algo gfm --out " +
              dir.file("g.json")) == 0);
  REQUIRE(run("mine --config " + dir.file("c.json") + " --algo centralized --out " +
              dir.file("z.json")) == 0);
  json g = load_json(dir.file("g.json"));
  json z = load_json(dir.file("z.json"));
  REQUIRE(g["gfm"]["frequent"] == z["centralized"]["frequent"]);
}

TEST_CASE("cluster recovers four separated blobs and accounts payload") {
  TempDir dir;
  json components = json::array();
  for (double x : {-20.0, 20.0})
    for (double y : {-20.0, 20.0})
      components.push_back({{"center", {x, y}}, {"stddev", 1.0}, {"count", 500}});
  json config = {{"sites", 4},
                 {"ki", 10},
                 {"tau", "auto"},
                 {"border", 4},
                 {"seed", 3},
                 {"data", {{"mixture_spec", {{"dims", 2}, {"components", components}}}}}};
  write(dir.file("cl.json"), config.dump());
  REQUIRE(run("cluster --config " + dir.file("cl.json") + " --out " +
              dir.file("cl_r.json")) == 0);
  json r = load_json(dir.file("cl_r.json"));
  REQUIRE(r["k_g"] == 4);
  // payload identity: sum of k_i * ((dims+2)*8 + 8)
  REQUIRE(r["payload_bytes"] == 4 * 10 * ((2 + 2) * 8 + 8));
  REQUIRE(r["accounting"]["rounds"] == 1);
}

TEST_CASE("cluster rejects oversized ki with exit 2") {
  TempDir dir;
  json config = {{"sites", 2},
                 {"ki", 50},
                 {"data",
                  {{"mixture_spec",
                    {{"dims", 1},
                     {"components",
                      json::array({{{"center", {0.0}}, {"stddev", 1.0}, {"count", 20}}})}}}}}};
  write(dir.file("cl.json"), config.dump());
  REQUIRE(run("cluster --config " + dir.file("cl.json")) == 2);
}

TEST_CASE("estimate paper preset emits the summary rows") {
  TempDir dir;
  REQUIRE(run("estimate --paper-preset --out " + dir.file("e.json")) == 0);
  json r = load_json(dir.file("e.json"));
  REQUIRE(r["overheads"].size() == 3);
  REQUIRE(r["overheads"][0]["overhead_pct"] == 98.1);
  REQUIRE(r["overheads"][1]["overhead_pct"] == 18.6);
  REQUIRE(r["overheads"][2]["overhead_pct"] == 24.6);
  REQUIRE(r["relative_gain_measured_pct"] == 24.2);
  REQUIRE(r["relative_gain_estimated_pct"] == 18.1);
}

TEST_CASE("estimate flags estimator-exceeds without failing") {
  TempDir dir;
  REQUIRE(run("estimate --measured 10 --estimated 12 --out " + dir.file("e.json")) == 0);
  json r = load_json(dir.file("e.json"));
  REQUIRE(r["overheads"][0]["estimator_exceeds"] == true);
}

TEST_CASE("estimate rejects mismatched units with exit 2") {
  REQUIRE(run("estimate --measured 10 --estimated 5 --measured-unit seconds "
              "--estimated-unit minutes") == 2);
}

TEST_CASE("repeated runs give byte-identical reports modulo timestamp") {
  TempDir dir;
  const std::string config = showcase_config(dir);
  REQUIRE(run("mine --config " + config + " --algo both --out " + dir.file("r1.json")) == 0);
  REQUIRE(run("mine --config " + config + " --algo both --out " + dir.file("r2.json")) == 0);
  REQUIRE(strip_timestamp(gdm::io::read_file(dir.file("r1.json"))) ==
          strip_timestamp(gdm::io::read_file(dir.file("r2.json"))));

  json components = json::array({{{"center", {0.0, 0.0}}, {"stddev", 1.0}, {"count", 200}},
                                 {{"center", {9.0, 9.0}}, {"stddev", 1.0}, {"count", 200}}});
  json cl = {{"sites", 2},
             {"ki", 5},
             {"border", 2},
             {"seed", 8},
             {"data", {{"mixture_spec", {{"dims", 2}, {"components", components}}}}}};
  write(dir.file("cl.json"), cl.dump());
  REQUIRE(run("cluster --config " + dir.file("cl.json") + " --out " + dir.file("c1.json")) == 0);
  REQUIRE(run("cluster --config " + dir.file("cl.json") + " --out " + dir.file("c2.json")) == 0);
  REQUIRE(strip_timestamp(gdm::io::read_file(dir.file("c1.json"))) ==
          strip_timestamp(gdm::io::read_file(dir.file("c2.json"))));
}

TEST_CASE("report pretty-prints a run report") {
  TempDir dir;
  REQUIRE(run("estimate --paper-preset --out " + dir.file("e.json")) == 0);
  REQUIRE(run("report " + dir.file("e.json")) == 0);
  REQUIRE(run("report " + dir.file("missing.json")) == 4);
}

TEST_CASE("mine dumps the accounting log as CSV") {
  TempDir dir;
  const std::string config = showcase_config(dir);
  REQUIRE(run("mine --config " + config + " --algo gfm --out " + dir.file("r.json") +
              " --dump-log " + dir.file("log.csv")) == 0);
  const std::string csv = gdm::io::read_file(dir.file("log.csv"));
  REQUIRE(csv.rfind("round,stage,from,to,bytes,seconds\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') > 2);
}
