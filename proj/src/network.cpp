#include "mfgnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace mfgnet {

namespace {

// Union-find over vertex classes, used for the connectivity check.
struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

Network::Network(const NetworkSpec& spec) : spec_(spec), raw_(spec.vertices) {
  if (raw_.empty()) throw NetworkError("network has no vertices");
  if (spec.edges.empty()) throw NetworkError("network has no edges");

  std::unordered_map<std::string, std::size_t> raw_index;
  for (std::size_t v = 0; v < raw_.size(); ++v) {
    if (!raw_index.emplace(raw_[v].id, v).second)
      throw NetworkError("duplicate vertex id '" + raw_[v].id + "'");
  }

  // Group label per raw vertex: identify groups first, singletons otherwise.
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> group(raw_.size(), none);
  for (std::size_t g = 0; g < spec.identify.size(); ++g) {
    for (const auto& id : spec.identify[g]) {
      auto it = raw_index.find(id);
      if (it == raw_index.end()) throw NetworkError("identify group references unknown vertex '" + id + "'");
      if (group[it->second] != none && group[it->second] != g)
        throw NetworkError("vertex '" + id + "' appears in two identify groups");
      group[it->second] = g;
    }
  }

  // Classes are numbered by first appearance in the raw vertex list.
  raw_to_class_.assign(raw_.size(), none);
  std::unordered_map<std::size_t, std::size_t> group_to_class;
  for (std::size_t v = 0; v < raw_.size(); ++v) {
    if (group[v] != none) {
      auto [it, inserted] = group_to_class.emplace(group[v], classes_.size());
      if (inserted) classes_.push_back(VertexClass{raw_[v].id, {}});
      raw_to_class_[v] = it->second;
    } else {
      raw_to_class_[v] = classes_.size();
      classes_.push_back(VertexClass{raw_[v].id, {}});
    }
    classes_[raw_to_class_[v]].raw.push_back(v);
  }

  std::unordered_map<std::string, std::size_t> edge_ids;
  for (const auto& e : spec.edges) {
    if (!edge_ids.emplace(e.id, edges_.size()).second) throw NetworkError("duplicate edge id '" + e.id + "'");
    auto tail = raw_index.find(e.tail);
    auto head = raw_index.find(e.head);
    if (tail == raw_index.end()) throw NetworkError("edge '" + e.id + "' has dangling tail '" + e.tail + "'");
    if (head == raw_index.end()) throw NetworkError("edge '" + e.id + "' has dangling head '" + e.head + "'");
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw NetworkError("edge '" + e.id + "' has nonpositive length");
    if (!(e.nu > 0.0) || !std::isfinite(e.nu)) throw NetworkError("edge '" + e.id + "' has nonpositive diffusion");
    edges_.push_back(Edge{e.id, raw_to_class_[tail->second], raw_to_class_[head->second], tail->second,
                          head->second, e.length, e.nu});
  }

  DisjointSet components(classes_.size());
  for (const auto& e : edges_) components.unite(e.tail, e.head);
  for (std::size_t i = 1; i < classes_.size(); ++i) {
    if (components.find(i) != components.find(0))
      throw NetworkError("network is disconnected: vertex '" + classes_[i].id + "' is unreachable");
  }

  incidence_.resize(classes_.size());
  for (std::size_t j = 0; j < edges_.size(); ++j) {
    incidence_[edges_[j].tail].outgoing.push_back(j);
    incidence_[edges_[j].head].incoming.push_back(j);
  }
}

std::size_t Network::vertex_index(const std::string& raw_id) const {
  for (std::size_t v = 0; v < raw_.size(); ++v) {
    if (raw_[v].id == raw_id) return raw_to_class_[v];
  }
  throw NetworkError("unknown vertex '" + raw_id + "'");
}

std::size_t Network::edge_index(const std::string& id) const {
  for (std::size_t j = 0; j < edges_.size(); ++j) {
    if (edges_[j].id == id) return j;
  }
  throw NetworkError("unknown edge '" + id + "'");
}

const Incidence& Network::incidence(std::size_t vertex) const {
  if (vertex >= incidence_.size()) throw NetworkError("unknown vertex index " + std::to_string(vertex));
  return incidence_[vertex];
}

double Network::total_length() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.length;
  return total;
}

Network Network::with_uniform_nu(double nu) const {
  NetworkSpec spec = spec_;
  for (auto& e : spec.edges) e.nu = nu;
  return Network(spec);
}

Network build_network(const NetworkSpec& spec) { return Network(spec); }

NetworkSpec parse_network_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError(std::string("network JSON: ") + e.what());
  }
  NetworkSpec spec;
  try {
    for (const auto& v : doc.at("vertices")) {
      RawVertex raw;
      raw.id = v.at("id").get<std::string>();
      if (v.contains("xy")) {
        const auto& xy = v.at("xy");
        if (!xy.is_array() || xy.size() != 2) throw NetworkError("vertex '" + raw.id + "': xy must have 2 entries");
        raw.xy = {xy[0].get<double>(), xy[1].get<double>()};
      }
      spec.vertices.push_back(std::move(raw));
    }
    for (const auto& e : doc.at("edges")) {
      EdgeSpec edge;
      edge.id = e.at("id").get<std::string>();
      edge.tail = e.at("tail").get<std::string>();
      edge.head = e.at("head").get<std::string>();
      edge.length = e.at("length").get<double>();
      edge.nu = e.at("nu").get<double>();
      spec.edges.push_back(std::move(edge));
    }
    if (doc.contains("identify")) {
      for (const auto& group : doc.at("identify")) spec.identify.push_back(group.get<std::vector<std::string>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("network JSON: ") + e.what());
  }
  return spec;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Network(parse_network_json(buf.str()));
}

Network preset_tripod(double nu) { return preset_self_similar(1, nu); }

Network preset_self_similar(int levels, double nu) {
  if (levels < 1) throw NetworkError("self-similar network needs levels >= 1");
  NetworkSpec spec;
  spec.vertices.push_back({"c", {0.0, 0.0}});

  struct Leaf {
    std::string vertex;
    std::string name;
    std::array<double, 2> xy;
    double angle;
  };
  std::vector<Leaf> leaves;
  for (int j = 0; j < 3; ++j) {
    const double angle = 2.0 * std::numbers::pi * j / 3.0;
    const std::string name = std::to_string(j);
    Leaf leaf{"p" + name, name, {std::cos(angle), std::sin(angle)}, angle};
    spec.vertices.push_back({leaf.vertex, leaf.xy});
    spec.edges.push_back({"e" + name, "c", leaf.vertex, 1.0, nu});
    leaves.push_back(std::move(leaf));
  }

  double length = 1.0;
  for (int level = 2; level <= levels; ++level) {
    length *= 0.5;
    std::vector<Leaf> next;
    for (const auto& parent : leaves) {
      for (int side = 0; side < 2; ++side) {
        const double angle = parent.angle + (side == 0 ? 1.0 : -1.0) * std::numbers::pi / 3.0;
        const std::string name = parent.name + "." + std::to_string(side);
        Leaf child{"p" + name,
                   name,
                   {parent.xy[0] + length * std::cos(angle), parent.xy[1] + length * std::sin(angle)},
                   angle};
        spec.vertices.push_back({child.vertex, child.xy});
        spec.edges.push_back({"e" + name, parent.vertex, child.vertex, length, nu});
        next.push_back(std::move(child));
      }
    }
    leaves = std::move(next);
  }

  std::vector<std::string> extremal;
  for (const auto& leaf : leaves) extremal.push_back(leaf.vertex);
  spec.identify.push_back(std::move(extremal));
  return Network(spec);
}

Grid::Grid(Network network, std::vector<int> nodes_per_edge)
    : network_(std::move(network)), intervals_(std::move(nodes_per_edge)) {
  if (intervals_.size() != network_.num_edges())
    throw NetworkError("grid needs one interval count per edge (" + std::to_string(network_.num_edges()) +
                       "), got " + std::to_string(intervals_.size()));
  num_dofs_ = network_.num_vertices();
  vertex_weight_.assign(network_.num_vertices(), 0.0);
  for (std::size_t j = 0; j < intervals_.size(); ++j) {
    if (intervals_[j] < 3)
      throw NetworkError("edge '" + network_.edge(j).id + "' needs at least 3 intervals, got " +
                         std::to_string(intervals_[j]));
    const auto& e = network_.edge(j);
    step_.push_back(e.length / intervals_[j]);
    offset_.push_back(num_dofs_);
    num_dofs_ += static_cast<std::size_t>(intervals_[j] - 1);
    vertex_weight_[e.tail] += 0.5 * step_[j];
    vertex_weight_[e.head] += 0.5 * step_[j];
  }
}

double Grid::max_step() const { return *std::max_element(step_.begin(), step_.end()); }

std::size_t Grid::dof(std::size_t j, int k) const {
  const int n = intervals_.at(j);
  if (k < 0 || k > n)
    throw NetworkError("node index " + std::to_string(k) + " out of range on edge '" + network_.edge(j).id + "'");
  if (k == 0) return network_.edge(j).tail;
  if (k == n) return network_.edge(j).head;
  return offset_[j] + static_cast<std::size_t>(k - 1);
}

Grid::NodeRef Grid::resolve(std::size_t dof) const {
  if (dof >= num_dofs_) throw NetworkError("dof " + std::to_string(dof) + " out of range");
  if (dof < network_.num_vertices()) return NodeRef{true, dof, 0, 0};
  // offsets are increasing; find the last edge whose block starts at or before dof
  auto it = std::upper_bound(offset_.begin(), offset_.end(), dof);
  const auto j = static_cast<std::size_t>(std::distance(offset_.begin(), it)) - 1;
  return NodeRef{false, 0, j, static_cast<int>(dof - offset_[j]) + 1};
}

double Grid::weight(std::size_t dof) const {
  const auto node = resolve(dof);
  return node.is_vertex ? vertex_weight_[node.vertex] : step_[node.edge];
}

Grid build_grid(const Network& network, const std::vector<int>& nodes_per_edge) {
  return Grid(network, nodes_per_edge);
}

Grid build_grid(const Network& network, double h) {
  if (!(h > 0.0)) throw NetworkError("grid step must be positive");
  std::vector<int> counts;
  for (const auto& e : network.edges()) {
    const double ratio = e.length / h;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
      throw NetworkError("edge '" + e.id + "': length / h is not an integer");
    counts.push_back(static_cast<int>(rounded));
  }
  return Grid(network, counts);
}

Grid build_grid_uniform(const Network& network, int nodes_per_edge) {
  return Grid(network, std::vector<int>(network.num_edges(), nodes_per_edge));
}

}  // namespace mfgnet
