#include "mfgnet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mfgnet {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig reference_base(PresetId id) {
  ExperimentConfig c;
  c.preset = id;
  c.nodes_per_edge = 250;
  c.hamiltonian_scale = 0.5;
  c.vertex_source = false;
  c.coupling = "power:2";
  c.nu = 0.1;
  c.solver.epsilon = 1e-4;
  c.solver.alpha = 0.9;
  return c;
}

std::string switch_label(const std::vector<double>& s) {
  std::string out;
  for (double v : s) out += v != 0.0 ? '1' : '0';
  return out;
}

}  // namespace

PresetId parse_preset(const std::string& name) {
  if (name == "test1") return PresetId::test1;
  if (name == "test2") return PresetId::test2;
  if (name == "test3") return PresetId::test3;
  if (name == "test4") return PresetId::test4;
  if (name == "custom") return PresetId::custom;
  throw std::invalid_argument("unknown preset '" + name + "' (expected test1|test2|test3|test4|custom)");
}

std::string to_string(PresetId id) {
  switch (id) {
    case PresetId::test1: return "test1";
    case PresetId::test2: return "test2";
    case PresetId::test3: return "test3";
    case PresetId::test4: return "test4";
    case PresetId::custom: return "custom";
  }
  return "custom";
}

std::vector<ExperimentConfig> preset_configs(PresetId id) {
  std::vector<ExperimentConfig> out;
  const std::vector<std::vector<double>> panels = {{1, 1, 1}, {1, 1, 0}, {1, 0, 0}};
  switch (id) {
    case PresetId::test1:
    case PresetId::test2:
      for (const auto& s : panels) {
        auto c = reference_base(id);
        if (id == PresetId::test2) {
          c.nu = 1e-4;
          c.solver.alpha = 0.2;
        }
        c.cost_switches = s;
        c.label = to_string(id) + "-" + switch_label(s);
        out.push_back(c);
      }
      break;
    case PresetId::test3:
      for (double nu : {0.1, 1e-3}) {
        auto c = reference_base(id);
        c.coupling = "arctan";
        c.nu = nu;
        c.label = nu == 0.1 ? "test3-nu0.1" : "test3-nu0.001";
        out.push_back(c);
      }
      break;
    case PresetId::test4: {
      auto c = reference_base(id);
      c.network_preset = "self-similar";
      c.levels = 2;
      c.label = "test4";
      out.push_back(c);
      break;
    }
    case PresetId::custom:
      out.push_back(ExperimentConfig{});
      out.back().label = "custom";
      break;
  }
  return out;
}

Network build_experiment_network(const ExperimentConfig& config) {
  Network net = [&] {
    if (config.network_file) return load_network(*config.network_file);
    if (config.network_preset == "tripod") return preset_tripod();
    if (config.network_preset == "self-similar") return preset_self_similar(config.levels);
    throw std::invalid_argument("unknown network preset '" + config.network_preset +
                                "' (expected tripod|self-similar)");
  }();
  if (config.nu) {
    if (!(*config.nu > 0.0)) throw std::invalid_argument("diffusion nu must be positive");
    net = net.with_uniform_nu(*config.nu);
  }
  return net;
}

Problem build_problem(const ExperimentConfig& config) {
  const Network net = build_experiment_network(config);
  auto grid = std::make_shared<const Grid>(config.step ? build_grid(net, *config.step)
                                                       : build_grid_uniform(net, config.nodes_per_edge));
  HamiltonianSpec ham;
  ham.beta = config.beta;
  ham.scale = config.hamiltonian_scale;
  if (config.cost_file) {
    ham.cost = load_cost_csv(*config.cost_file, *grid);
  } else if (config.cost_switches.empty()) {
    ham.cost = CostField::uniform(net.num_edges(), 1.0);
  } else {
    if (config.cost_switches.size() != net.num_edges())
      throw std::invalid_argument("got " + std::to_string(config.cost_switches.size()) + " cost switches for " +
                                  std::to_string(net.num_edges()) + " edges");
    ham.cost = CostField(config.cost_switches);
  }
  Problem problem{std::move(grid), std::move(ham), CouplingOperator::parse(config.coupling), config.vertex_source};
  problem.validate();
  return problem;
}

RunSummary summarize(const Problem& problem, const SolveResult& solve) {
  const auto mass = extract_m(problem, solve.x);
  const auto m = mass.values();
  RunSummary s;
  s.min_m = *std::min_element(m.begin(), m.end());
  s.max_m = *std::max_element(m.begin(), m.end());
  s.lambda = extract_lambda(problem, solve.x);
  s.converged = solve.report.converged;
  s.iterations = solve.report.iterations;
  if (!problem.coupling.nondecreasing()) s.note = "uniqueness not guaranteed: coupling is decreasing";
  return s;
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult out{config, build_problem(config), {}, {}};
  out.solve = gauss_newton(out.problem, config.solver);
  out.summary = summarize(out.problem, out.solve);
  return out;
}

std::vector<double> interpolate_solution(const Problem& fine, std::span<const double> x_fine, const Problem& coarse) {
  const auto& gf = *fine.grid;
  const auto& gc = *coarse.grid;
  const auto& nf = gf.network();
  const auto& nc = gc.network();
  if (x_fine.size() != fine.num_unknowns()) throw std::invalid_argument("reference vector has the wrong length");
  if (nf.num_edges() != nc.num_edges() || nf.num_vertices() != nc.num_vertices())
    throw std::invalid_argument("reference and target grids live on different networks");
  for (std::size_t j = 0; j < nf.num_edges(); ++j) {
    if (nf.edge(j).id != nc.edge(j).id || nf.edge(j).length != nc.edge(j).length)
      throw std::invalid_argument("reference and target grids live on different networks");
  }

  std::vector<double> out(coarse.num_unknowns(), 0.0);
  const auto nd_f = fine.num_dofs();
  const auto nd_c = coarse.num_dofs();
  for (std::size_t d = 0; d < nd_c; ++d) {
    const auto node = gc.resolve(d);
    if (node.is_vertex) {
      out[d] = x_fine[node.vertex];
      out[nd_c + d] = x_fine[nd_f + node.vertex];
      continue;
    }
    const auto j = node.edge;
    const long n_f = gf.intervals(j);
    const long n_c = gc.intervals(j);
    // fine position k * n_f / n_c, split into integer part and remainder
    const long scaled = static_cast<long>(node.k) * n_f;
    const int left = static_cast<int>(std::min(scaled / n_c, n_f - 1));
    const double w = static_cast<double>(scaled - left * n_c) / static_cast<double>(n_c);
    const auto a = gf.dof(j, left);
    const auto b = gf.dof(j, left + 1);
    out[d] = (1.0 - w) * x_fine[a] + w * x_fine[b];
    out[nd_c + d] = (1.0 - w) * x_fine[nd_f + a] + w * x_fine[nd_f + b];
  }
  out[coarse.lambda_index()] = x_fine[fine.lambda_index()];
  return out;
}

ErrorParts error_parts(const Problem& problem, std::span<const double> x, std::span<const double> x_ref) {
  if (x.size() != problem.num_unknowns() || x_ref.size() != problem.num_unknowns())
    throw std::invalid_argument("error_parts: vectors do not match the problem");
  const auto nd = problem.num_dofs();
  ErrorParts e;
  for (std::size_t d = 0; d < nd; ++d) {
    e.u += std::abs(x[d] - x_ref[d]);
    e.m += std::abs(x[nd + d] - x_ref[nd + d]);
  }
  e.lambda = std::abs(x[problem.lambda_index()] - x_ref[problem.lambda_index()]);
  return e;
}

double error_weighted(const Problem& problem, const ErrorParts& parts) {
  const double h = problem.grid->max_step();
  return h * parts.u + h * parts.m + parts.lambda;
}

double error_mean(const Problem& problem, const ErrorParts& parts) {
  const auto n = static_cast<double>(problem.num_dofs());
  return (parts.u + parts.m) / n + parts.lambda;
}

double order_of_convergence(double e1, double h1, double e2, double h2) {
  return std::log(e1 / e2) / std::log(h1 / h2);
}

ErrorStudy error_study(const ExperimentConfig& config, std::vector<int> n_list, int n_ref) {
  if (n_list.empty()) throw std::invalid_argument("error study needs at least one N");
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  if (n_ref <= n_list.back()) throw std::invalid_argument("reference N must exceed every N of the study");

  auto solve_at = [&config](int n) {
    ExperimentConfig c = config;
    c.step.reset();
    c.nodes_per_edge = n;
    return run_experiment(c);
  };

  ErrorStudy study;
  study.n_ref = n_ref;
  const auto ref = solve_at(n_ref);
  study.lambda_ref = ref.summary.lambda;
  study.ref_iterations = ref.summary.iterations;
  study.ref_converged = ref.summary.converged;
  study.ref_seconds = ref.solve.report.wall_seconds;

  for (int n : n_list) {
    const auto run = solve_at(n);
    const auto projected = interpolate_solution(ref.problem, ref.solve.x, run.problem);
    const auto parts = error_parts(run.problem, run.solve.x, projected);
    ErrorStudyRow row;
    row.n = n;
    row.dofs = 2 * run.problem.num_dofs();
    row.h = run.problem.grid->max_step();
    row.error = error_weighted(run.problem, parts);
    row.error_mean = error_mean(run.problem, parts);
    row.lambda = run.summary.lambda;
    row.lambda_error = parts.lambda;
    row.iterations = run.summary.iterations;
    row.converged = run.summary.converged;
    row.seconds = run.solve.report.wall_seconds;
    if (!study.rows.empty()) {
      const auto& prev = study.rows.back();
      row.eoc = order_of_convergence(prev.error, prev.h, row.error, row.h);
      row.eoc_mean = order_of_convergence(prev.error_mean, prev.h, row.error_mean, row.h);
    }
    study.rows.push_back(row);
  }
  return study;
}

void write_study_csv(const std::filesystem::path& path, const ErrorStudy& study) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# n_ref=" << study.n_ref << "\n# lambda_ref=" << fmt(study.lambda_ref) << '\n';
  out << "N,dofs,h,E_h,E_h_mean,lambda,lambda_error,iterations,converged,eoc,eoc_mean,seconds\n";
  for (const auto& r : study.rows) {
    out << r.n << ',' << r.dofs << ',' << fmt(r.h) << ',' << fmt(r.error) << ',' << fmt(r.error_mean) << ','
        << fmt(r.lambda) << ',' << fmt(r.lambda_error) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << (r.eoc ? fmt(*r.eoc) : "") << ',' << (r.eoc_mean ? fmt(*r.eoc_mean) : "") << ',' << fmt(r.seconds)
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ExportFormat parse_export_format(const std::string& name) {
  if (name == "csv") return ExportFormat::csv;
  if (name == "json") return ExportFormat::json;
  throw std::invalid_argument("unknown export format '" + name + "' (expected csv|json)");
}

ExportedSolution make_export(const Problem& problem, std::span<const double> x) {
  if (x.size() != problem.num_unknowns()) throw std::invalid_argument("solution vector has the wrong length");
  const auto& grid = *problem.grid;
  const auto& net = grid.network();
  const auto nd = problem.num_dofs();

  ExportedSolution out;
  out.header["lambda"] = fmt(extract_lambda(problem, x));
  const double nu0 = net.edge(0).nu;
  const bool uniform = std::all_of(net.edges().begin(), net.edges().end(), [nu0](const Edge& e) { return e.nu == nu0; });
  out.header["nu"] = uniform ? fmt(nu0) : "per-edge";
  out.header["beta"] = fmt(problem.hamiltonian.beta);
  out.header["kappa"] = fmt(problem.hamiltonian.scale);
  out.header["coupling"] = problem.coupling.describe();
  out.header["vertex_source"] = problem.vertex_source ? "on" : "off";

  const auto& raw = net.raw_vertices();
  for (std::size_t i = 0; i < net.num_vertices(); ++i) {
    const auto& cls = net.vertices()[i];
    const auto& xy = raw[cls.raw.front()].xy;
    out.nodes.push_back({"vertex", cls.id, 0, 0.0, xy[0], xy[1], x[i], x[nd + i]});
  }
  for (std::size_t j = 0; j < net.num_edges(); ++j) {
    const auto& e = net.edge(j);
    const auto& a = raw[e.tail_raw].xy;
    const auto& b = raw[e.head_raw].xy;
    const int n = grid.intervals(j);
    for (int k = 1; k < n; ++k) {
      const double t = static_cast<double>(k) / n;
      const auto d = grid.dof(j, k);
      out.nodes.push_back(
          {"edge", e.id, k, t, (1.0 - t) * a[0] + t * b[0], (1.0 - t) * a[1] + t * b[1], x[d], x[nd + d]});
    }
  }
  return out;
}

void export_solution(const std::filesystem::path& path, const Problem& problem, std::span<const double> x,
                     ExportFormat format) {
  const auto data = make_export(problem, x);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (format == ExportFormat::csv) {
    for (const char* key : {"lambda", "nu", "beta", "kappa", "coupling", "vertex_source"})
      out << "# " << key << '=' << data.header.at(key) << '\n';
    out << "kind,id,k,t,x,y,U,M\n";
    for (const auto& r : data.nodes) {
      out << r.kind << ',' << r.id << ',' << r.k << ',' << fmt(r.t) << ',' << fmt(r.x) << ',' << fmt(r.y) << ','
          << fmt(r.u) << ',' << fmt(r.m) << '\n';
    }
  } else {
    nlohmann::ordered_json doc;
    for (const char* key : {"lambda", "nu", "beta", "kappa", "coupling", "vertex_source"})
      doc["header"][key] = data.header.at(key);
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& r : data.nodes) {
      doc["nodes"].push_back(
          {{"kind", r.kind}, {"id", r.id}, {"k", r.k}, {"t", r.t}, {"x", r.x}, {"y", r.y}, {"U", r.u}, {"M", r.m}});
    }
    out << doc.dump(1) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ExportedSolution read_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  ExportedSolution out;

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& [key, value] : doc.at("header").items()) out.header[key] = value.get<std::string>();
    for (const auto& n : doc.at("nodes")) {
      out.nodes.push_back({n.at("kind").get<std::string>(), n.at("id").get<std::string>(), n.at("k").get<int>(),
                           n.at("t").get<double>(), n.at("x").get<double>(), n.at("y").get<double>(),
                           n.at("U").get<double>(), n.at("M").get<double>()});
    }
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  bool seen_columns = false;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) out.header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!seen_columns) {
      if (line != "kind,id,k,t,x,y,U,M") throw std::runtime_error("unexpected column header: " + line);
      seen_columns = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error("malformed solution row: " + line);
    out.nodes.push_back({f[0], f[1], std::stoi(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                         std::stod(f[6]), std::stod(f[7])});
  }
  return out;
}

void write_convergence_log(const std::filesystem::path& path, const SolveReport& report) {
  nlohmann::ordered_json doc;
  doc["iterations"] = report.iterations;
  doc["converged"] = report.converged;
  doc["wall_seconds"] = report.wall_seconds;
  doc["initial_residual_norm"] = report.initial_residual_norm;
  doc["final_residual_norm"] = report.final_residual_norm;
  doc["history"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.residual_norms.size(); ++i) {
    doc["history"].push_back({{"iteration", i + 1},
                              {"residual_norm", report.residual_norms[i]},
                              {"step_norm", report.step_norms[i]},
                              {"lambda", report.lambdas[i]}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace mfgnet
