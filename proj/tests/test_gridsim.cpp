#include <catch2/catch_amalgamated.hpp>

#include "gdm/gridsim.hpp"
#include "gdm/io.hpp"

using namespace gdm;

TEST_CASE("comm_time with zero bytes is latency only") {
  LinkMatrix m = LinkMatrix::table2_default();
  REQUIRE_THAT(comm_time(0, "Orsay", "Sophia", m),
               Catch::Matchers::WithinAbs(0.028, 1e-12));
}

TEST_CASE("comm_time reproduces the Orsay->Nancy transfer") {
  LinkMatrix m = LinkMatrix::table2_default();
  // 0.005 + 8e6 / 90.77e6
  REQUIRE_THAT(comm_time(1000000, "Orsay", "Nancy", m),
               Catch::Matchers::WithinAbs(0.0931, 1e-4));
}

TEST_CASE("comm_time on the intra-site link") {
  LinkMatrix m = LinkMatrix::table2_default();
  const double expect = 0.00007 + 8e6 / 9.41e8;
  REQUIRE_THAT(comm_time(1000000, "Rennes", "Rennes", m),
               Catch::Matchers::WithinAbs(expect, 1e-9));
}

TEST_CASE("comm_time is monotone in bytes and bandwidth") {
  LinkMatrix fast = LinkMatrix::uniform(2, 200.0, 1.0);
  LinkMatrix slow = LinkMatrix::uniform(2, 50.0, 1.0);
  REQUIRE(comm_time(2000, 0, 1, fast) > comm_time(1000, 0, 1, fast));
  REQUIRE(comm_time(1000, 0, 1, slow) > comm_time(1000, 0, 1, fast));
}

TEST_CASE("unknown sites are rejected") {
  LinkMatrix m = LinkMatrix::table2_default();
  REQUIRE_THROWS_AS(comm_time(1, "Orsay", "Dublin", m), ValidationError);
  REQUIRE_THROWS_AS(comm_time(1, 7, 0, m), ValidationError);
}

TEST_CASE("link matrix validation") {
  LinkMatrix m;
  REQUIRE_THROWS_AS(m.validate(), ValidationError);
  m = LinkMatrix::uniform(2, 10.0, 1.0);
  m.bandwidth_mbps[0][1] = 0.0;
  REQUIRE_THROWS_AS(m.validate(), ValidationError);
  m = LinkMatrix::uniform(3, 10.0, 1.0);
  m.latency_ms[1].pop_back();
  REQUIRE_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("run_stages takes the max within a stage") {
  StagePlan plan;
  plan.stages.push_back({{{0, 2.0, {}}, {1, 5.0, {}}, {2, 3.0, {}}}});
  LinkMatrix m = LinkMatrix::uniform(3, 100.0, 1.0);
  REQUIRE(run_stages(plan, m).makespan == 5.0);
}

TEST_CASE("run_stages sums stage maxima") {
  StagePlan plan;
  plan.stages.push_back({{{0, 2.0, {}}, {1, 5.0, {}}}});
  plan.stages.push_back({{{0, 7.0, {}}, {1, 1.0, {}}}});
  LinkMatrix m = LinkMatrix::uniform(2, 100.0, 1.0);
  REQUIRE(run_stages(plan, m).makespan == 12.0);
}

TEST_CASE("run_stages adds message time and logs every message") {
  StagePlan plan;
  Activity a;
  a.site = 0;
  a.compute_cost = 1.0;
  a.out_messages = {{1, 1000}, {2, 500}};
  plan.stages.push_back({{a, {1, 0.5, {}}}});
  LinkMatrix m = LinkMatrix::uniform(3, 100.0, 2.0);
  StageResult r = run_stages(plan, m);
  const double send = comm_time(1000, 0, 1, m) + comm_time(500, 0, 2, m);
  REQUIRE_THAT(r.makespan, Catch::Matchers::WithinRel(1.0 + send, 1e-12));
  REQUIRE(r.log.messages == 2);
  REQUIRE(r.log.total_bytes == 1500);
  REQUIRE(r.log.link_bytes[0][1] == 1000);
  REQUIRE(r.log.link_bytes[0][2] == 500);
}

TEST_CASE("adding an activity never decreases makespan") {
  LinkMatrix m = LinkMatrix::uniform(3, 100.0, 1.0);
  StagePlan plan;
  plan.stages.push_back({{{0, 2.0, {}}}});
  const double base = run_stages(plan, m).makespan;
  plan.stages[0].activities.push_back({1, 4.0, {}});
  REQUIRE(run_stages(plan, m).makespan >= base);
}

TEST_CASE("barrier rounds count and accumulate canonically") {
  Session session(LinkMatrix::uniform(3, 100.0, 1.0));
  RoundRecord r1 = session.barrier_round({});
  REQUIRE(r1.round == 1);
  REQUIRE(r1.bytes == 0);

  // all-to-all of m bytes: s(s-1) messages
  std::vector<Exchange> all;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) all.push_back({i, j, 100});
  RoundRecord r2 = session.barrier_round(all);
  REQUIRE(r2.round == 2);
  REQUIRE(r2.messages == 6);
  REQUIRE(r2.bytes == 600);
  REQUIRE(session.log().rounds == 2);
  REQUIRE(session.log().messages == 6);

  // ordering is canonical by (from, to)
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (const auto& e : session.log().entries) order.push_back({e.from, e.to});
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(order == sorted);
}

TEST_CASE("closed session rejects rounds") {
  Session session(LinkMatrix::uniform(2, 100.0, 1.0));
  session.close();
  REQUIRE_THROWS_AS(session.barrier_round({}), StateError);
}

TEST_CASE("identical plans give byte-identical logs") {
  auto run = [] {
    Session session(LinkMatrix::table2_default());
    session.barrier_round({{0, 1, 500}, {1, 0, 300}, {2, 4, 999}});
    session.barrier_round({{3, 2, 42}});
    return gdm::io::log_to_csv(session.log());
  };
  REQUIRE(run() == run());
}

TEST_CASE("link matrix JSON round-trips") {
  LinkMatrix m = LinkMatrix::table2_default();
  LinkMatrix back = io::link_matrix_from_json(io::link_matrix_to_json(m));
  REQUIRE(back.sites == m.sites);
  REQUIRE(back.bandwidth_mbps == m.bandwidth_mbps);
  REQUIRE(back.latency_ms == m.latency_ms);
}
