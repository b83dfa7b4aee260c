#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support.hpp"

using namespace mfgnet;
using namespace mfgnet::testing;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mfgnet_harness_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ExperimentConfig small_config(int n) {
  auto cfg = preset_configs(PresetId::test1).front();
  cfg.nodes_per_edge = n;
  cfg.solver.epsilon = 1e-10;
  return cfg;
}

}  // namespace

TEST_CASE("preset configurations") {
  CHECK(parse_preset("test3") == PresetId::test3);
  CHECK(to_string(PresetId::test4) == "test4");
  CHECK_THROWS(parse_preset("test9"));

  const auto t1 = preset_configs(PresetId::test1);
  REQUIRE(t1.size() == 3);
  CHECK(t1[0].label == "test1-111");
  CHECK(t1[2].cost_switches == std::vector<double>{1, 0, 0});
  CHECK(*t1[0].nu == 0.1);
  CHECK(t1[0].coupling == "power:2");
  CHECK(t1[0].nodes_per_edge == 250);

  const auto t2 = preset_configs(PresetId::test2);
  CHECK(*t2[0].nu == 1e-4);

  const auto t3 = preset_configs(PresetId::test3);
  REQUIRE(t3.size() == 2);
  CHECK(t3[0].coupling == "arctan");
  CHECK(*t3[1].nu == 1e-3);

  const auto t4 = preset_configs(PresetId::test4);
  REQUIRE(t4.size() == 1);
  CHECK(build_experiment_network(t4[0]).num_edges() == 9);
}

TEST_CASE("build_problem options") {
  ExperimentConfig cfg;
  cfg.nodes_per_edge = 10;
  cfg.beta = 3.0;
  cfg.nu = 0.25;
  cfg.cost_switches = {1, 0, 1};
  const auto p = build_problem(cfg);
  CHECK(p.num_dofs() == 2 + 27);
  CHECK(p.hamiltonian.beta == 3.0);
  CHECK(p.grid->network().edge(1).nu == 0.25);
  CHECK(p.vertex_source);

  cfg.step = 0.5;
  CHECK_THROWS(build_problem(cfg));
  cfg.step = 0.2;
  CHECK(build_problem(cfg).grid->intervals(2) == 5);
  cfg.step.reset();
  cfg.cost_switches = {1, 0};
  CHECK_THROWS(build_problem(cfg));
  cfg.cost_switches.clear();
  cfg.coupling = "bogus";
  CHECK_THROWS(build_problem(cfg));
}

TEST_CASE("interpolation of nested and non-nested grids") {
  auto fine_cfg = small_config(12);
  auto coarse_cfg = small_config(4);
  const auto fine = build_problem(fine_cfg);
  const auto coarse = build_problem(coarse_cfg);

  // Piecewise-linear data is reproduced exactly on any grid.
  std::vector<double> x(fine.num_unknowns());
  for (std::size_t d = 0; d < fine.num_dofs(); ++d) {
    const auto ref = fine.grid->resolve(d);
    const double t = ref.is_vertex ? (ref.vertex == 0 ? 0.0 : 1.0) : ref.k / 12.0;
    x[fine.u_index(d)] = 2.0 * t;
    x[fine.m_index(d)] = 1.0 - t;
  }
  x[fine.lambda_index()] = -0.75;
  const auto y = interpolate_solution(fine, x, coarse);
  REQUIRE(y.size() == coarse.num_unknowns());
  for (std::size_t d = 0; d < coarse.num_dofs(); ++d) {
    const auto ref = coarse.grid->resolve(d);
    const double t = ref.is_vertex ? (ref.vertex == 0 ? 0.0 : 1.0) : ref.k / 4.0;
    CHECK(y[coarse.u_index(d)] == doctest::Approx(2.0 * t).epsilon(1e-14));
    CHECK(y[coarse.m_index(d)] == doctest::Approx(1.0 - t).epsilon(1e-14));
  }
  CHECK(y[coarse.lambda_index()] == -0.75);

  // Nested nodes are sampled, not averaged.
  Rng rng(3);
  for (auto& v : x) v = uniform(rng, -1, 1);
  const auto z = interpolate_solution(fine, x, coarse);
  for (std::size_t j = 0; j < 3; ++j)
    for (int k = 1; k < 4; ++k) {
      CHECK(z[coarse.u_index(coarse.grid->dof(j, k))] == x[fine.u_index(fine.grid->dof(j, 3 * k))]);
    }

  // Non-nested: 5 coarse intervals from 12 fine ones.
  const auto odd = build_problem(small_config(5));
  const auto w = interpolate_solution(fine, x, odd);
  const double pos = 12.0 * 2 / 5;  // node k=2 sits at fine position 4.8
  const double expect =
      0.2 * x[fine.u_index(fine.grid->dof(1, 4))] + 0.8 * x[fine.u_index(fine.grid->dof(1, 5))];
  CHECK(pos == doctest::Approx(4.8));
  CHECK(w[odd.u_index(odd.grid->dof(1, 2))] == doctest::Approx(expect).epsilon(1e-14));

  CHECK_THROWS(interpolate_solution(fine, std::vector<double>(3), coarse));
}

TEST_CASE("error metrics") {
  const auto p = build_problem(small_config(8));
  Rng rng(5);
  std::vector<double> x(p.num_unknowns());
  for (auto& v : x) v = uniform(rng, -1, 1);
  const auto zero = error_parts(p, x, x);
  CHECK(zero.u == 0.0);
  CHECK(zero.m == 0.0);
  CHECK(zero.lambda == 0.0);
  CHECK(error_weighted(p, zero) == 0.0);
  CHECK(error_mean(p, zero) == 0.0);

  auto y = x;
  for (std::size_t d = 0; d < p.num_dofs(); ++d) y[p.u_index(d)] += 0.5;
  y[p.m_index(0)] -= 2.0;
  y[p.lambda_index()] += 0.125;
  const auto parts = error_parts(p, y, x);
  CHECK(parts.u == doctest::Approx(0.5 * p.num_dofs()));
  CHECK(parts.m == doctest::Approx(2.0));
  CHECK(parts.lambda == 0.125);
  CHECK(error_weighted(p, parts) == doctest::Approx(0.125 * (parts.u + parts.m) + 0.125));
  CHECK(error_mean(p, parts) == doctest::Approx((parts.u + parts.m) / p.num_dofs() + 0.125));

  CHECK(order_of_convergence(0.04, 0.2, 0.01, 0.1) == doctest::Approx(2.0));
  CHECK(order_of_convergence(0.01159, 0.01, 0.00544, 0.005) == doctest::Approx(1.09).epsilon(0.01));
}

TEST_CASE("small error study") {
  auto cfg = small_config(0);
  cfg.solver.epsilon = 1e-9;
  const auto study = error_study(cfg, {40, 20, 20}, 160);
  CHECK(study.ref_converged);
  REQUIRE(study.rows.size() == 2);
  CHECK(study.rows[0].n == 20);
  CHECK(study.rows[1].n == 40);
  CHECK(study.rows[0].dofs == 2 * (2 + 3 * 19));
  CHECK_FALSE(study.rows[0].eoc.has_value());
  REQUIRE(study.rows[1].eoc.has_value());
  CHECK(study.rows[1].error < study.rows[0].error);
  CHECK(*study.rows[1].eoc > 0.5);
  CHECK_THROWS(error_study(cfg, {40, 80}, 80));

  const auto path = scratch("study.csv");
  write_study_csv(path, study);
  std::ifstream in(path);
  std::string header;
  while (std::getline(in, header) && header.starts_with('#')) {
  }
  CHECK(header.starts_with("N,dofs,"));
}

TEST_CASE("export round trip") {
  auto cfg = small_config(6);
  const auto run = run_experiment(cfg);
  CHECK(run.summary.converged);
  CHECK(run.summary.min_m > 0.0);
  CHECK(run.summary.max_m >= run.summary.min_m);

  for (auto format : {ExportFormat::csv, ExportFormat::json}) {
    const auto path = scratch(format == ExportFormat::csv ? "sol.csv" : "sol.json");
    export_solution(path, run.problem, run.solve.x, format);
    const auto back = read_solution(path);
    const auto direct = make_export(run.problem, run.solve.x);
    REQUIRE(back.nodes.size() == run.problem.num_dofs());
    CHECK(back.header == direct.header);
    CHECK(std::stod(back.header.at("lambda")) == extract_lambda(run.problem, run.solve.x));
    for (std::size_t i = 0; i < back.nodes.size(); ++i) {
      CHECK(back.nodes[i].kind == direct.nodes[i].kind);
      CHECK(back.nodes[i].id == direct.nodes[i].id);
      CHECK(back.nodes[i].k == direct.nodes[i].k);
      CHECK(back.nodes[i].t == direct.nodes[i].t);
      CHECK(back.nodes[i].x == direct.nodes[i].x);
      CHECK(back.nodes[i].y == direct.nodes[i].y);
      CHECK(back.nodes[i].u == direct.nodes[i].u);
      CHECK(back.nodes[i].m == direct.nodes[i].m);
    }
  }

  const auto uniform_export = make_export(run.problem, initial_guess(run.problem));
  for (const auto& n : uniform_export.nodes) CHECK(n.m == doctest::Approx(1.0 / 3.0));
  CHECK(uniform_export.nodes.front().kind == "vertex");
  CHECK(uniform_export.nodes.back().kind == "edge");
  CHECK(uniform_export.nodes[2].id == "e0");
  CHECK(uniform_export.nodes[2].t == doctest::Approx(1.0 / 6.0));
  CHECK(uniform_export.nodes[2].x == doctest::Approx(1.0 / 6.0));

  const auto log = scratch("log.json");
  write_convergence_log(log, run.solve.report);
  std::ifstream in(log);
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc.at("iterations").get<int>() == run.solve.report.iterations);
  CHECK(doc.at("history").size() == static_cast<std::size_t>(run.solve.report.iterations));

  CHECK_THROWS(parse_export_format("xml"));
  CHECK_THROWS(read_solution(scratch("does-not-exist.csv")));
}

TEST_CASE("arctan runs carry a uniqueness note") {
  auto cfg = preset_configs(PresetId::test3).front();
  cfg.nodes_per_edge = 20;
  const auto run = run_experiment(cfg);
  CHECK(run.summary.note.find("uniqueness") != std::string::npos);
  CHECK(run_experiment(small_config(20)).summary.note.empty());
}
