#pragma once

// Metric networks (multigraphs with arc-length parametrized edges) and the
// uniform per-edge grids built on them.
//
// Vertex identification: raw vertices listed in an "identify" group collapse
// into one vertex class. Everything downstream (incidence, dofs, operators)
// works on vertex classes; raw vertices only carry planar coordinates for
// export.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfgnet {

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RawVertex {
  std::string id;
  std::array<double, 2> xy{0.0, 0.0};
};

struct EdgeSpec {
  std::string id;
  std::string tail;  // pi_j(0)
  std::string head;  // pi_j(l_j)
  double length = 1.0;
  double nu = 1.0;
};

/// Plain description of a network, mirroring the JSON schema.
struct NetworkSpec {
  std::vector<RawVertex> vertices;
  std::vector<EdgeSpec> edges;
  std::vector<std::vector<std::string>> identify;
};

struct Edge {
  std::string id;
  std::size_t tail = 0;  // vertex class of pi_j(0)
  std::size_t head = 0;  // vertex class of pi_j(l_j)
  std::size_t tail_raw = 0;
  std::size_t head_raw = 0;
  double length = 1.0;
  double nu = 1.0;
};

struct VertexClass {
  std::string id;                 // id of the first member in spec order
  std::vector<std::size_t> raw;   // members (indices into raw_vertices)
};

struct Incidence {
  std::vector<std::size_t> outgoing;  // Inc^+: edges whose tail is the vertex
  std::vector<std::size_t> incoming;  // Inc^-: edges whose head is the vertex
};

/// Validated, immutable network on identified vertex classes.
class Network {
public:
  explicit Network(const NetworkSpec& spec);

  std::size_t num_vertices() const { return classes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t j) const { return edges_.at(j); }
  const std::vector<VertexClass>& vertices() const { return classes_; }
  const std::vector<RawVertex>& raw_vertices() const { return raw_; }

  /// Vertex class containing the raw vertex with this id.
  std::size_t vertex_index(const std::string& raw_id) const;
  std::size_t edge_index(const std::string& id) const;

  const Incidence& incidence(std::size_t vertex) const;
  Incidence incidence(const std::string& raw_id) const { return incidence(vertex_index(raw_id)); }

  double total_length() const;
  /// Overwrite every edge's diffusion coefficient.
  Network with_uniform_nu(double nu) const;

  const NetworkSpec& spec() const { return spec_; }

private:
  NetworkSpec spec_;
  std::vector<RawVertex> raw_;
  std::vector<VertexClass> classes_;
  std::vector<std::size_t> raw_to_class_;
  std::vector<Edge> edges_;
  std::vector<Incidence> incidence_;
};

Network build_network(const NetworkSpec& spec);
NetworkSpec parse_network_json(const std::string& text);
Network load_network(const std::filesystem::path& path);

/// Two vertex classes joined by three unit edges. The centre sits at the
/// origin and the edges end on the third roots of unity, which are
/// identified into a single class.
Network preset_tripod(double nu = 0.1);

/// Self-similar tree: three unit edges leave the centre, and every leaf
/// sprouts two children of half the parent's length until `levels` edge
/// generations exist. All leaves of the last generation are identified
/// into one vertex class.
Network preset_self_similar(int levels, double nu = 0.1);

/// Uniform grid with one dof per vertex class and one per interior node.
///
/// Dof order: vertex classes first (spec order), then interior nodes edge by
/// edge with k ascending. Boundary indices (j,0) and (j,N_j) resolve to the
/// dof of the tail/head vertex class, so continuity never needs an equation.
class Grid {
public:
  Grid(Network network, std::vector<int> nodes_per_edge);

  const Network& network() const { return network_; }

  std::size_t num_dofs() const { return num_dofs_; }
  std::size_t num_edges() const { return intervals_.size(); }
  int intervals(std::size_t j) const { return intervals_.at(j); }
  double step(std::size_t j) const { return step_.at(j); }
  double max_step() const;
  /// h_{v_i}: half steps of all incident edge ends (self-loops count twice).
  double vertex_weight(std::size_t vertex) const { return vertex_weight_.at(vertex); }

  /// Dof of node (j,k), k in [0, N_j].
  std::size_t dof(std::size_t j, int k) const;
  std::size_t interior_offset(std::size_t j) const { return offset_.at(j); }

  struct NodeRef {
    bool is_vertex = false;
    std::size_t vertex = 0;  // valid when is_vertex
    std::size_t edge = 0;    // valid when !is_vertex
    int k = 0;
  };
  NodeRef resolve(std::size_t dof) const;

  /// Integration weight of a dof in the discrete L2 product.
  double weight(std::size_t dof) const;

private:
  Network network_;
  std::vector<int> intervals_;
  std::vector<double> step_;
  std::vector<std::size_t> offset_;
  std::vector<double> vertex_weight_;
  std::size_t num_dofs_ = 0;
};

/// Build a grid from per-edge interval counts (each >= 3).
Grid build_grid(const Network& network, const std::vector<int>& nodes_per_edge);
/// Build a grid from a global step h; every l_j / h must be an integer.
Grid build_grid(const Network& network, double h);
/// Same interval count on every edge.
Grid build_grid_uniform(const Network& network, int nodes_per_edge);

}  // namespace mfgnet
