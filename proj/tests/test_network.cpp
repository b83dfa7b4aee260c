#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "support.hpp"

using namespace mfgnet;
using namespace mfgnet::testing;

namespace {

NetworkSpec single_edge(bool identified) {
  NetworkSpec s;
  s.vertices = {{"a", {0, 0}}, {"b", {1, 0}}};
  s.edges = {{"e", "a", "b", 1.0, 0.1}};
  if (identified) s.identify = {{"a", "b"}};
  return s;
}

}  // namespace

TEST_CASE("tripod preset") {
  const auto net = preset_tripod();
  CHECK(net.num_vertices() == 2);
  CHECK(net.num_edges() == 3);
  for (const auto& e : net.edges()) {
    CHECK(e.length == 1.0);
    CHECK(e.nu == doctest::Approx(0.1));
  }
  CHECK(net.total_length() == 3.0);

  const auto centre = net.incidence("c");
  CHECK(centre.outgoing.size() == 3);
  CHECK(centre.incoming.empty());
  const auto rim = net.incidence("p1");
  CHECK(rim.outgoing.empty());
  CHECK(rim.incoming.size() == 3);
  CHECK(net.vertex_index("p0") == net.vertex_index("p2"));
}

TEST_CASE("self-loop from identification") {
  const auto net = build_network(single_edge(true));
  CHECK(net.num_vertices() == 1);
  const auto& inc = net.incidence(0);
  CHECK(inc.outgoing == std::vector<std::size_t>{0});
  CHECK(inc.incoming == std::vector<std::size_t>{0});

  const auto grid = build_grid_uniform(net, 4);
  CHECK(grid.num_dofs() == 1 + 3);
  CHECK(grid.dof(0, 0) == grid.dof(0, 4));
  CHECK(grid.vertex_weight(0) == doctest::Approx(0.25));
}

TEST_CASE("incidence at a junction with one outgoing and two incoming edges") {
  NetworkSpec s;
  s.vertices = {{"i", {}}, {"a", {}}, {"b", {}}, {"c", {}}};
  s.edges = {{"j", "i", "a", 1, 1}, {"k", "b", "i", 1, 1}, {"l", "c", "i", 1, 1}};
  const auto net = build_network(s);
  const auto inc = net.incidence("i");
  CHECK(inc.outgoing == std::vector<std::size_t>{net.edge_index("j")});
  CHECK(inc.incoming == std::vector<std::size_t>{net.edge_index("k"), net.edge_index("l")});

  const auto leaf = net.incidence("a");
  CHECK(leaf.outgoing.empty());
  CHECK(leaf.incoming.size() == 1);
  const auto tail_leaf = net.incidence("b");
  CHECK(tail_leaf.outgoing == std::vector<std::size_t>{net.edge_index("k")});
  CHECK(tail_leaf.incoming.empty());
}

TEST_CASE("network validation errors") {
  auto dangling = single_edge(false);
  dangling.edges[0].head = "zz";
  CHECK_THROWS_AS(build_network(dangling), NetworkError);

  auto negative = single_edge(false);
  negative.edges[0].length = 0.0;
  CHECK_THROWS_AS(build_network(negative), NetworkError);

  auto no_diffusion = single_edge(false);
  no_diffusion.edges[0].nu = -1.0;
  CHECK_THROWS_AS(build_network(no_diffusion), NetworkError);

  auto split = single_edge(false);
  split.vertices.push_back({"lonely", {}});
  CHECK_THROWS_AS(build_network(split), NetworkError);

  auto dup = single_edge(false);
  dup.vertices.push_back({"a", {}});
  CHECK_THROWS_AS(build_network(dup), NetworkError);

  CHECK_THROWS_AS(preset_tripod().incidence("nope"), NetworkError);
  CHECK_THROWS_AS(preset_tripod().incidence(7), NetworkError);
}

TEST_CASE("network JSON") {
  const std::string text = R"({
    "vertices": [{"id": "c", "xy": [0, 0]}, {"id": "a", "xy": [1, 0]}, {"id": "b", "xy": [-1, 0]}],
    "edges": [{"id": "ca", "tail": "c", "head": "a", "length": 2.0, "nu": 0.3},
              {"id": "cb", "tail": "c", "head": "b", "length": 1.0, "nu": 0.2}],
    "identify": [["a", "b"]]
  })";
  const auto net = build_network(parse_network_json(text));
  CHECK(net.num_vertices() == 2);
  CHECK(net.edge(0).length == 2.0);
  CHECK(net.edge(1).nu == 0.2);
  CHECK(net.raw_vertices()[2].xy[0] == -1.0);

  const auto dir = std::filesystem::temp_directory_path() / "mfgnet_network_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "net.json") << text;
  CHECK(load_network(dir / "net.json").num_edges() == 2);
  CHECK_THROWS_AS(load_network(dir / "missing.json"), NetworkError);

  CHECK_THROWS_AS(parse_network_json("{"), NetworkError);
  CHECK_THROWS_AS(parse_network_json(R"({"vertices": []})"), NetworkError);
  CHECK_THROWS_AS(parse_network_json(R"({"vertices": [{"id": "a", "xy": [1]}], "edges": []})"), NetworkError);
  CHECK_THROWS_AS(
      parse_network_json(R"({"vertices": [{"id": "a"}], "edges": [{"id": "e", "tail": "a", "head": "a", "length": "x", "nu": 1}]})"),
      NetworkError);
  CHECK_THROWS_AS(build_network(parse_network_json(
                      R"({"vertices": [{"id": "a"}], "edges": [{"id": "e", "tail": "a", "head": "a", "length": 1, "nu": 1}],
                          "identify": [["a", "q"]]})")),
                  NetworkError);
}

TEST_CASE("grid dof counts") {
  const auto tripod = preset_tripod();
  CHECK(build_grid_uniform(tripod, 250).num_dofs() == 749);
  CHECK(2 * build_grid_uniform(tripod, 250).num_dofs() + 1 == 1499);
  CHECK(2 * build_grid_uniform(tripod, 100).num_dofs() + 1 == 599);
  CHECK(build_grid_uniform(build_network(single_edge(false)), 4).num_dofs() == 5);

  const auto g = build_grid(tripod, 0.25);
  CHECK(g.intervals(0) == 4);
  CHECK(g.step(2) == 0.25);
  CHECK_THROWS_AS(build_grid(tripod, 0.3), NetworkError);
  CHECK_THROWS_AS(build_grid_uniform(tripod, 2), NetworkError);
  CHECK_THROWS_AS(build_grid(tripod, std::vector<int>{4, 4}), NetworkError);
}

TEST_CASE("grid index order") {
  const auto g = build_grid_uniform(preset_tripod(), 4);
  CHECK(g.dof(0, 0) == 0);
  CHECK(g.dof(1, 4) == 1);
  CHECK(g.dof(0, 1) == 2);
  CHECK(g.dof(0, 3) == 4);
  CHECK(g.dof(1, 1) == 5);
  CHECK(g.dof(2, 3) == 10);
  CHECK(g.vertex_weight(0) == doctest::Approx(3 * 0.125));
  CHECK_THROWS_AS(g.dof(0, 5), NetworkError);
  CHECK_THROWS_AS(g.resolve(11), NetworkError);
}

TEST_CASE("self-similar preset") {
  const auto one = preset_self_similar(1);
  CHECK(one.num_edges() == 3);
  for (const auto& e : one.edges()) CHECK(e.length == 1.0);

  const auto two = preset_self_similar(2);
  std::set<double> lengths;
  for (const auto& e : two.edges()) lengths.insert(e.length);
  CHECK(lengths == std::set<double>{0.5, 1.0});
  CHECK(two.num_edges() == 9);
  CHECK(two.num_vertices() == 5);
  CHECK(two.total_length() == 6.0);
  CHECK_THROWS_AS(preset_self_similar(0), NetworkError);

  const auto three = preset_self_similar(3);
  CHECK(three.num_edges() == 21);
  CHECK(three.total_length() == 9.0);
}

TEST_CASE("random networks: incidence, dof formula and index bijection") {
  Rng rng(20261015);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = build_network(random_network_spec(rng));
    const auto grid = random_grid(rng, net);

    std::size_t ends = 0;
    for (std::size_t i = 0; i < net.num_vertices(); ++i) {
      const auto& inc = net.incidence(i);
      ends += inc.outgoing.size() + inc.incoming.size();
      for (auto j : inc.outgoing) CHECK(net.edge(j).tail == i);
      for (auto j : inc.incoming) CHECK(net.edge(j).head == i);
    }
    CHECK(ends == 2 * net.num_edges());

    std::size_t expected = net.num_vertices();
    for (std::size_t j = 0; j < net.num_edges(); ++j) expected += grid->intervals(j) - 1;
    CHECK(grid->num_dofs() == expected);

    std::vector<int> hits(grid->num_dofs(), 0);
    for (std::size_t j = 0; j < net.num_edges(); ++j) {
      const int n = grid->intervals(j);
      CHECK(grid->dof(j, 0) == net.edge(j).tail);
      CHECK(grid->dof(j, n) == net.edge(j).head);
      for (int k = 1; k < n; ++k) {
        const auto d = grid->dof(j, k);
        ++hits[d];
        const auto ref = grid->resolve(d);
        CHECK_FALSE(ref.is_vertex);
        CHECK(ref.edge == j);
        CHECK(ref.k == k);
      }
    }
    for (std::size_t d = 0; d < grid->num_dofs(); ++d) {
      const auto ref = grid->resolve(d);
      if (ref.is_vertex) {
        CHECK(ref.vertex == d);
      } else {
        CHECK(hits[d] == 1);
        CHECK(grid->dof(ref.edge, ref.k) == d);
      }
    }

    double weights = 0.0;
    for (std::size_t d = 0; d < grid->num_dofs(); ++d) weights += grid->weight(d);
    CHECK(weights == doctest::Approx(net.total_length()).epsilon(1e-12));
  }
}
