#include <catch2/catch_amalgamated.hpp>

#include "gdm/io.hpp"
#include "oracles.hpp"

using namespace gdm;

TEST_CASE("points survive a CSV round trip") {
  Rng rng(1);
  PointSet ps;
  ps.dims = 3;
  ps.points = oracle::random_points(rng, 40, 3);
  PointSet back = io::points_from_csv(io::points_to_csv(ps));
  REQUIRE(back.dims == 3);
  REQUIRE(back.points == ps.points);
}

TEST_CASE("transactions survive a text round trip, empty lines included") {
  TransactionDB db;
  db.n_items = 7;
  db.transactions = {{0, 3, 6}, {}, {1}, {2, 4}};
  TransactionDB back = io::transactions_from_text(io::transactions_to_text(db));
  REQUIRE(back.transactions == db.transactions);
  REQUIRE(back.n_items == 7);
}

TEST_CASE("malformed transaction lines are rejected") {
  REQUIRE_THROWS_AS(io::transactions_from_text("3 1 2\n"), ValidationError);
  REQUIRE_THROWS_AS(io::transactions_from_text("1 1\n"), ValidationError);
}

TEST_CASE("mixture spec JSON parsing") {
  auto j = io::json::parse(R"({
    "dims": 2, "seed": 9,
    "components": [{"center": [0.0, 1.0], "stddev": 0.5, "count": 10}]
  })");
  MixtureSpec spec = io::mixture_spec_from_json(j);
  REQUIRE(spec.dims == 2);
  REQUIRE(spec.seed == 9);
  REQUIRE(spec.components.size() == 1);
  REQUIRE(spec.components[0].stddev == 0.5);

  j["components"][0]["stddev"] = -1.0;
  REQUIRE_THROWS_AS(io::mixture_spec_from_json(j), ValidationError);
}

TEST_CASE("transaction spec JSON parsing") {
  auto j = io::json::parse(R"({
    "n_items": 6, "n_transactions": 100, "noise_prob": 0.1, "seed": 4,
    "patterns": [{"itemset": [0, 2, 5], "prob": 0.7}]
  })");
  TransactionSpec spec = io::transaction_spec_from_json(j);
  REQUIRE(spec.n_items == 6);
  REQUIRE(spec.patterns.size() == 1);
  REQUIRE((spec.patterns[0].itemset == std::vector<int>{0, 2, 5}));

  j["patterns"][0]["itemset"] = {5, 2};
  REQUIRE_THROWS_AS(io::transaction_spec_from_json(j), ValidationError);
}

TEST_CASE("sub-cluster stats survive a CSV round trip") {
  std::vector<SubClusterStats> stats = {
      {0, 0, 12, {1.5, -2.25}, 3.75}, {1, 4, 3, {0.0, 9.5}, 0.125}};
  auto back = io::stats_from_csv(io::stats_to_csv(stats));
  REQUIRE(back.size() == 2);
  REQUIRE(back[0].site == 0);
  REQUIRE(back[1].index == 4);
  REQUIRE(back[0].center == stats[0].center);
  REQUIRE(back[1].variance == stats[1].variance);
  REQUIRE(back[0].size == 12);
}

TEST_CASE("labeling JSON has clusters and total variance") {
  GlobalLabeling lab;
  GlobalCluster c;
  c.label = 0;
  c.members = {{0, 1}, {2, 0}};
  c.agg = {0, 1, 20, {1.0}, 5.0};
  lab.clusters.push_back(c);
  lab.total_variance = 5.0;
  auto j = io::labeling_to_json(lab);
  REQUIRE(j["total_variance"] == 5.0);
  REQUIRE(j["clusters"][0]["members"].size() == 2);
  REQUIRE(j["clusters"][0]["size"] == 20);
}

TEST_CASE("mining result JSON groups itemsets by size") {
  MiningResult r;
  r.frequent[1][{2}] = 10;
  r.frequent[2][{2, 5}] = 7;
  r.rounds = 2;
  r.bytes = 123;
  auto j = io::mining_result_to_json(r);
  REQUIRE(j["rounds"] == 2);
  REQUIRE((j["frequent"]["2"][0]["items"] == std::vector<int>{2, 5}));
  REQUIRE(j["frequent"]["2"][0]["support"] == 7);
}

TEST_CASE("log CSV has a header and one line per message") {
  Session session(LinkMatrix::uniform(2, 100.0, 1.0));
  session.barrier_round({{0, 1, 10}, {1, 0, 20}});
  std::string csv = io::log_to_csv(session.log());
  REQUIRE(csv.rfind("round,stage,from,to,bytes,seconds\n", 0) == 0);
  REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 3);
}
