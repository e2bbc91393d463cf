// Fat-tree construction, shortest paths against a BFS oracle, proximity
// ranking, and the flow table's partition/liveness rules.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "firm/rng.hpp"
#include "firm/topology.hpp"
#include "support.hpp"

using namespace firm;

TEST_CASE("fat-tree node counts follow the arity") {
  for (int k : {2, 4, 6, 8, 16}) {
    const Topology topo = Topology::fat_tree(k);
    CHECK(topo.host_count() == k * k * k / 4);
    CHECK(topo.switch_count() == 5 * k * k / 4);
    CHECK(static_cast<int>(topo.nodes().size()) == topo.host_count() + topo.switch_count());
    // Recount tiers off the exported node list.
    int hosts = 0, edges = 0, aggs = 0, cores = 0;
    for (const auto& node : topo.nodes()) {
      switch (node.tier) {
        case NodeTier::host: ++hosts; break;
        case NodeTier::edge: ++edges; break;
        case NodeTier::aggregation: ++aggs; break;
        case NodeTier::core: ++cores; break;
      }
    }
    CHECK(hosts == k * k * k / 4);
    CHECK(edges == k * k / 2);
    CHECK(aggs == k * k / 2);
    CHECK(cores == k * k / 4);
  }
  CHECK(Topology::fat_tree(4).host_count() == 16);
  CHECK(Topology::fat_tree(4).switch_count() == 20);
  CHECK(Topology::fat_tree(16).host_count() == 1024);
}

TEST_CASE("odd or tiny arities are rejected") {
  CHECK_THROWS_AS(Topology::fat_tree(3), ValidationError);
  CHECK_THROWS_AS(Topology::fat_tree(0), ValidationError);
  CHECK_THROWS_AS(Topology::fat_tree(-4), ValidationError);
}

TEST_CASE("closed-form paths match breadth-first search exhaustively at k=4") {
  const Topology topo = Topology::fat_tree(4);
  std::set<int> seen;
  for (int a = 0; a < topo.host_count(); ++a)
    for (int b = 0; b < topo.host_count(); ++b) {
      const PathMetric metric = topo.shortest_path(a, b);
      CHECK(metric.hop_count == support::bfs_hops(topo, a, b));
      seen.insert(metric.hop_count);
      // Symmetry and the triangle inequality through every waypoint would be
      // quadratic on top of quadratic; symmetry alone is cheap and telling.
      CHECK(topo.shortest_path(b, a).hop_count == metric.hop_count);
      CHECK(metric.inter_rack == (metric.hop_count >= 4));
      CHECK(metric.inter_pod == (metric.hop_count == 6));
    }
  CHECK(seen == std::set<int>{0, 2, 4, 6});
}

TEST_CASE("triangle inequality holds on sampled host triples") {
  const Topology topo = Topology::fat_tree(4);
  RandomStream rng(99);
  for (int i = 0; i < 500; ++i) {
    const int a = static_cast<int>(rng.uniform_below(16));
    const int b = static_cast<int>(rng.uniform_below(16));
    const int c = static_cast<int>(rng.uniform_below(16));
    CHECK(topo.shortest_path(a, c).hop_count <=
          topo.shortest_path(a, b).hop_count + topo.shortest_path(b, c).hop_count);
  }
}

TEST_CASE("path queries validate host ids") {
  const Topology topo = Topology::fat_tree(4);
  CHECK_THROWS_AS(topo.shortest_path(0, 16), ValidationError);
  CHECK_THROWS_AS(topo.shortest_path(-1, 3), ValidationError);
  CHECK_THROWS_AS(topo.proximity_rank({17}, {0}), ValidationError);
  CHECK_THROWS_AS(topo.proximity_rank({0}, {99}), ValidationError);
}

TEST_CASE("graph is connected at every tested arity") {
  for (int k : {2, 4, 8}) {
    const Topology topo = Topology::fat_tree(k);
    // BFS from node 0 must reach every node.
    std::set<int> reached;
    std::vector<int> frontier{0};
    std::map<int, std::vector<int>> adjacency;
    for (const auto& link : topo.links()) {
      adjacency[link.a].push_back(link.b);
      adjacency[link.b].push_back(link.a);
    }
    reached.insert(0);
    while (!frontier.empty()) {
      const int node = frontier.back();
      frontier.pop_back();
      for (int next : adjacency[node])
        if (reached.insert(next).second) frontier.push_back(next);
    }
    CHECK(static_cast<int>(reached.size()) == topo.host_count() + topo.switch_count());
  }
}

TEST_CASE("proximity ranking prefers rack mates, then pod mates") {
  const Topology topo = Topology::fat_tree(4);
  // Hosts 0,1 share an edge switch; 2,3 are the other rack of pod 0; 4.. are
  // pod 1 and beyond.
  SUBCASE("single anchor picks its rack mate first") {
    const auto ranked = topo.proximity_rank({0}, {5, 2, 1});
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0] == 1);
    CHECK(ranked[1] == 2);
    CHECK(ranked[2] == 5);
  }
  SUBCASE("two anchors in one pod outweigh a single rack mate") {
    // Candidate 2 is 4 hops from both anchors (8 total); candidate 4 is 6
    // from each (12); candidate 1 is 2 from anchor 0 and 4 from anchor 3.
    const auto ranked = topo.proximity_rank({0, 3}, {4, 2, 1});
    CHECK(ranked[0] == 1);
    CHECK(ranked[1] == 2);
    CHECK(ranked[2] == 4);
  }
  SUBCASE("empty anchors fall back to the (pod, host) tie-break") {
    const auto ranked = topo.proximity_rank({}, {9, 4, 12, 1});
    CHECK(ranked == std::vector<int>{1, 4, 9, 12});
  }
  SUBCASE("duplicates are preserved") {
    const auto ranked = topo.proximity_rank({0}, {5, 5, 1});
    CHECK(ranked == std::vector<int>{1, 5, 5});
  }
  SUBCASE("output is a permutation of the input") {
    RandomStream rng(7);
    for (int round = 0; round < 50; ++round) {
      std::vector<int> anchors, candidates;
      for (int i = 0; i < 3; ++i) anchors.push_back(static_cast<int>(rng.uniform_below(16)));
      for (int i = 0; i < 6; ++i)
        candidates.push_back(static_cast<int>(rng.uniform_below(16)));
      auto ranked = topo.proximity_rank(anchors, candidates);
      auto sorted_in = candidates, sorted_out = ranked;
      std::sort(sorted_in.begin(), sorted_in.end());
      std::sort(sorted_out.begin(), sorted_out.end());
      CHECK(sorted_in == sorted_out);
      // Brute-force oracle: the winner has the minimal anchor distance sum.
      long long best = -1;
      for (int c : candidates) {
        long long sum = 0;
        for (int a : anchors) sum += topo.shortest_path(c, a).hop_count;
        if (best < 0 || sum < best) best = sum;
      }
      long long winner = 0;
      for (int a : anchors) winner += topo.shortest_path(ranked[0], a).hop_count;
      CHECK(winner == best);
    }
  }
}

TEST_CASE("topology export lists every node and link") {
  const Topology topo = Topology::fat_tree(2);
  const std::string csv = topo.export_csv();
  std::size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 1 + topo.nodes().size() + topo.links().size());
  CHECK(csv.find("node,0,host,0,0") != std::string::npos);
}

TEST_CASE("flow table demotion and promotion") {
  FlowTable table;
  table.add_service("svc", {"d0", "d1", "d2"});

  SUBCASE("unknown service and duplicate registration") {
    CHECK_THROWS_AS(table.active("ghost"), ValidationError);
    CHECK_THROWS_AS(table.demote("ghost", {"d0"}, 0.0), ValidationError);
    CHECK_THROWS_AS(table.add_service("svc", {"x"}), ValidationError);
    CHECK_THROWS_AS(table.add_service("empty", {}), ValidationError);
  }

  SUBCASE("demotion moves offenders to the blacklist") {
    const auto blacklisted = table.demote("svc", {"d1"}, 3.5);
    CHECK(blacklisted == std::vector<std::string>{"d1"});
    CHECK(table.active("svc") == std::vector<std::string>{"d0", "d2"});
    REQUIRE(table.blacklist().size() == 1);
    CHECK(table.blacklist()[0].service == "svc");
    CHECK(table.blacklist()[0].deployment == "d1");
    CHECK(table.blacklist()[0].demoted_at == 3.5);
    CHECK(table.is_blacklisted("svc", "d1"));
    CHECK_FALSE(table.is_active("svc", "d1"));
  }

  SUBCASE("empty offender list changes nothing") {
    const auto before = table.active("svc");
    CHECK(table.demote("svc", {}, 0.0).empty());
    CHECK(table.active("svc") == before);
    CHECK(table.blacklist().empty());
  }

  SUBCASE("the last active deployment survives demotion") {
    table.demote("svc", {"d0", "d1"}, 1.0);
    REQUIRE(table.active("svc") == std::vector<std::string>{"d2"});
    const auto blacklisted = table.demote("svc", {"d2"}, 2.0);
    CHECK(blacklisted.empty());
    CHECK(table.active("svc") == std::vector<std::string>{"d2"});
    CHECK(table.blacklist().size() == 2);
  }

  SUBCASE("offenders processed in order against the shrinking list") {
    table.demote("svc", {"d2", "d0", "d1"}, 0.0);
    // d2 and d0 leave; d1 is then the last one standing.
    CHECK(table.active("svc") == std::vector<std::string>{"d1"});
    CHECK(table.blacklist().size() == 2);
  }

  SUBCASE("already-blacklisted offenders are skipped quietly") {
    table.demote("svc", {"d1"}, 0.0);
    CHECK(table.demote("svc", {"d1"}, 1.0).empty());
    CHECK(table.blacklist().size() == 1);
  }

  SUBCASE("unknown offender is rejected") {
    CHECK_THROWS_AS(table.demote("svc", {"ghost"}, 0.0), ValidationError);
  }

  SUBCASE("promotion re-enters at the lowest preference") {
    table.demote("svc", {"d0"}, 1.0);
    table.promote("svc", "d0");
    CHECK(table.active("svc") == std::vector<std::string>{"d1", "d2", "d0"});
    CHECK(table.blacklist().empty());
  }

  SUBCASE("promoting a non-blacklisted deployment fails and changes nothing") {
    CHECK_THROWS_AS(table.promote("svc", "d0"), ValidationError);
    CHECK(table.active("svc") == std::vector<std::string>{"d0", "d1", "d2"});
  }
}

TEST_CASE("flow table keeps the active/blacklist partition under random churn") {
  RandomStream rng(4242);
  for (int round = 0; round < 30; ++round) {
    FlowTable table;
    const std::vector<std::string> all = {"d0", "d1", "d2", "d3", "d4"};
    table.add_service("svc", all);
    for (int step = 0; step < 200; ++step) {
      if (rng.coin()) {
        const auto& active = table.active("svc");
        const auto offender =
            active[static_cast<std::size_t>(rng.uniform_below(active.size()))];
        table.demote("svc", {offender}, static_cast<double>(step));
      } else if (!table.blacklist().empty()) {
        const auto& entry =
            table.blacklist()[static_cast<std::size_t>(rng.uniform_below(table.blacklist().size()))];
        table.promote(entry.service, entry.deployment);
      }
      // Partition: every deployment is active or blacklisted, never both,
      // never neither; liveness: at least one stays active.
      std::set<std::string> seen;
      for (const auto& d : table.active("svc")) CHECK(seen.insert(d).second);
      for (const auto& e : table.blacklist()) CHECK(seen.insert(e.deployment).second);
      CHECK(seen.size() == all.size());
      CHECK(!table.active("svc").empty());
    }
  }
}
