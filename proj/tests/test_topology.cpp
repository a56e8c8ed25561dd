#include "noclat/topology.hpp"

#include <set>
#include <stdexcept>

#include "doctest.h"

using namespace noclat;

TEST_CASE("row-major node numbering from the top-left") {
  const NocTopology t = NocTopology::mesh(4, 4);
  CHECK(t.node_id(0, 0) == 1);
  CHECK(t.node_id(0, 3) == 4);
  CHECK(t.node_id(2, 1) == 10);
  CHECK(t.row_of(10) == 2);
  CHECK(t.col_of(10) == 1);
  CHECK(t.node_count() == 16);
  CHECK_FALSE(t.valid_node(0));
  CHECK_FALSE(t.valid_node(17));
}

TEST_CASE("column-first routing turns at the junction") {
  const NocTopology t = NocTopology::mesh(4, 4);
  SUBCASE("turning route") {
    const TrafficClassSpec spec = route_yx(t, 2, 12);
    CHECK(spec.junction == 10);
    CHECK(spec.column_hops == 2);
    CHECK(spec.row_hops == 2);
    CHECK(spec.static_latency == 4);
  }
  SUBCASE("same row starts on the row segment") {
    const TrafficClassSpec spec = route_yx(t, 5, 8);
    CHECK(spec.junction == 5);
    CHECK(spec.column_hops == 0);
    CHECK(spec.row_hops == 3);
  }
  SUBCASE("pure column ends at the destination") {
    const TrafficClassSpec spec = route_yx(t, 2, 14);
    CHECK(spec.junction == 14);
    CHECK(spec.column_hops == 3);
    CHECK(spec.row_hops == 0);
  }
  SUBCASE("per-hop latency scales the static part") {
    const NocTopology t2 = NocTopology::mesh(4, 4, 2);
    CHECK(route_yx(t2, 2, 12).static_latency == 8);
  }
  SUBCASE("invalid endpoints are rejected") {
    CHECK_THROWS_AS(route_yx(t, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(route_yx(t, 3, 3), std::invalid_argument);
  }
}

TEST_CASE("ring routes walk one way around") {
  const NocTopology t = NocTopology::ring(6);
  const TrafficClassSpec forward = route_yx(t, 2, 5);
  CHECK(forward.row_hops == 3);
  CHECK(forward.junction == 5);
  const TrafficClassSpec wrap = route_yx(t, 5, 2);
  CHECK(wrap.row_hops == 3);
  CHECK(wrap.static_latency == 3);
}

TEST_CASE("class enumeration is dense and ordered") {
  const NocTopology t = NocTopology::mesh(6, 6);
  SUBCASE("all-zero matrix") {
    const std::vector<std::vector<double>> zero(36, std::vector<double>(36, 0.0));
    CHECK(enumerate_classes(t, zero).empty());
  }
  SUBCASE("uniform all-to-all") {
    std::vector<std::vector<double>> m(36, std::vector<double>(36, 0.001));
    for (int i = 0; i < 36; ++i) m[i][i] = 0.0;
    const auto classes = enumerate_classes(t, m);
    REQUIRE(classes.size() == 1260);
    CHECK(classes[0].source == 1);
    CHECK(classes[0].destination == 2);
    CHECK(classes[1].destination == 3);
    for (size_t i = 0; i < classes.size(); ++i) {
      CHECK(classes[i].id == static_cast<int>(i));
    }
  }
  SUBCASE("single entry matches the route") {
    const NocTopology t4 = NocTopology::mesh(4, 4);
    std::vector<std::vector<double>> m(16, std::vector<double>(16, 0.0));
    m[1][11] = 0.2;  // node 2 -> node 12
    const auto classes = enumerate_classes(t4, m);
    REQUIRE(classes.size() == 1);
    CHECK(classes[0].junction == 10);
    CHECK(classes[0].rate == 0.2);
  }
  SUBCASE("bad matrices are rejected") {
    std::vector<std::vector<double>> m(36, std::vector<double>(35, 0.0));
    CHECK_THROWS_AS(enumerate_classes(t, m), std::invalid_argument);
    std::vector<std::vector<double>> diag(36, std::vector<double>(36, 0.0));
    diag[3][3] = 0.1;
    CHECK_THROWS_AS(enumerate_classes(t, diag), std::invalid_argument);
  }
}

TEST_CASE("deflection loops cover rows then columns") {
  DeflectConfig cfg;
  cfg.p_sink = 0.3;
  SUBCASE("ring") {
    const auto loops = loops_of(NocTopology::ring(6), cfg);
    REQUIRE(loops.size() == 1);
    CHECK(loops[0].members.size() == 6);
    CHECK(loops[0].loop_time == 6);
  }
  SUBCASE("mesh") {
    const auto loops = loops_of(NocTopology::mesh(6, 6), cfg);
    REQUIRE(loops.size() == 12);
    CHECK(loops[0].orientation == LoopOrientation::Row);
    CHECK(loops[6].orientation == LoopOrientation::Column);
    CHECK(loops[6].index == 0);
    CHECK(loops[3].loop_time == 6);
    for (const auto& loop : loops) {
      for (double p : loop.sink_p_d) CHECK(p == 0.3);
    }
  }
  SUBCASE("folded circulation lengthens the loop") {
    cfg.bidirectional_fold = true;
    const auto loops = loops_of(NocTopology::mesh(6, 6), cfg);
    CHECK(loops[0].loop_time == 10);
  }
  SUBCASE("per-hop latency scales loop time") {
    const auto loops = loops_of(NocTopology::mesh(6, 6, 2), cfg);
    CHECK(loops[0].loop_time == 12);
  }
  SUBCASE("per-sink override lands on the member") {
    cfg.per_sink[8] = 0.45;
    const auto loops = loops_of(NocTopology::mesh(6, 6), cfg);
    CHECK(loops[1].sink_p_d[1] == 0.45);  // node 8 = row 1, col 1
    CHECK(loops[7].sink_p_d[1] == 0.45);  // column loop c=1, row 1
    CHECK(loops[1].sink_p_d[0] == 0.3);
  }
}

TEST_CASE("link table enumerates every directed channel once") {
  SUBCASE("mesh") {
    const LinkTable links = build_links(NocTopology::mesh(4, 4));
    CHECK(links.count() == 48);
    std::set<std::pair<int, int>> seen;
    for (int i = 0; i < links.count(); ++i) {
      seen.insert({links.from[i], links.to[i]});
    }
    CHECK(seen.size() == 48);
    CHECK(seen.count({1, 2}) == 1);
    CHECK(seen.count({2, 1}) == 1);
    CHECK(seen.count({2, 6}) == 1);
    CHECK(seen.count({6, 2}) == 1);
    CHECK(seen.count({1, 6}) == 0);
  }
  SUBCASE("ring") {
    const LinkTable links = build_links(NocTopology::ring(6));
    CHECK(links.count() == 6);
    CHECK(links.from[5] == 6);
    CHECK(links.to[5] == 1);
    CHECK(links.name(0) == "link 1->2");
  }
}

TEST_CASE("routes expand into per-link stages") {
  DeflectConfig cfg;
  cfg.p_sink = 0.3;
  cfg.p_junction = 0.2;
  SUBCASE("mesh turning route") {
    const NocTopology t = NocTopology::mesh(4, 4);
    const auto loops = loops_of(t, cfg);
    const LinkTable links = build_links(t);
    std::vector<TrafficClassSpec> specs{route_yx(t, 2, 12)};
    const auto routes = build_routes(t, specs, loops, cfg);
    REQUIRE(routes.size() == 1);
    REQUIRE(routes[0].stages.size() == 2);
    const RouteStage& col = routes[0].stages[0];
    const RouteStage& row = routes[0].stages[1];
    CHECK(col.hops() == 2);
    CHECK(links.from[col.links[0]] == 2);
    CHECK(links.to[col.links[0]] == 6);
    CHECK(links.to[col.links[1]] == 10);
    CHECK(col.loop_id == 4 + 1);
    CHECK(col.deflect_prob == 0.2);
    CHECK(row.hops() == 2);
    CHECK(links.from[row.links[0]] == 10);
    CHECK(links.to[row.links[1]] == 12);
    CHECK(row.loop_id == 2);
    CHECK(row.deflect_prob == 0.3);
  }
  SUBCASE("ring wrap route") {
    const NocTopology t = NocTopology::ring(6);
    const auto loops = loops_of(t, cfg);
    const LinkTable links = build_links(t);
    std::vector<TrafficClassSpec> specs{route_yx(t, 5, 2)};
    const auto routes = build_routes(t, specs, loops, cfg);
    REQUIRE(routes[0].stages.size() == 1);
    const RouteStage& st = routes[0].stages[0];
    REQUIRE(st.hops() == 3);
    CHECK(links.from[st.links[0]] == 5);
    CHECK(links.to[st.links[0]] == 6);
    CHECK(links.to[st.links[1]] == 1);
    CHECK(links.to[st.links[2]] == 2);
    CHECK(st.deflect_prob == 0.3);
  }
  SUBCASE("junction probability defaults to the sink value") {
    DeflectConfig plain;
    plain.p_sink = 0.25;
    CHECK(junction_prob(plain) == 0.25);
    CHECK(sink_prob(plain, 3) == 0.25);
    plain.per_sink[3] = 0.4;
    CHECK(sink_prob(plain, 3) == 0.4);
  }
}
