#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cohortlens/arm.hpp"

namespace cohortlens::graph {

enum class NodeKind { Symptom, Rule };

struct Node {
  std::string id;  // "s:<symptom>" or "r:<rule_id>"
  NodeKind kind = NodeKind::Symptom;
  std::size_t symptom = 0;  // manifest index, symptom nodes
  int rule_id = 0;          // rule nodes
  double support = 0.0;     // rule nodes
  double lift = 0.0;        // rule nodes
};

/// Directed edge between node indices: symptom -> rule for antecedent
/// members, rule -> symptom for consequent members.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  bool operator==(const Edge&) const = default;
};

/// Symptom nodes first (manifest order), then rule nodes (rule order).
struct RuleGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::size_t size() const { return nodes.size(); }
  std::vector<std::size_t> degrees() const;
  /// Undirected adjacency lists, neighbors ascending.
  std::vector<std::vector<std::size_t>> adjacency() const;
};

/// Throws Error(EmptyRuleList).
RuleGraph build_graph(const std::vector<arm::AssociationRule>& rules);

/// Reads (antecedent, consequent) back off the edges, in rule node order.
std::vector<std::pair<arm::ItemMask, arm::ItemMask>> rules_from_graph(const RuleGraph& g);

/// Unweighted, undirected all-pairs shortest paths; -1 where unreachable.
std::vector<std::vector<int>> graph_distances(const RuleGraph& g);

/// Mean graph distance from each node to every other node. Unreachable pairs
/// count as distance size(), so nodes in small components are not favoured.
std::vector<double> mean_graph_distance(const RuleGraph& g);

struct LayoutOptions {
  std::size_t iterations = 300;
  double initial_step = 0.1;
  double component_gap = 2.0;
  double min_separation = 1e-3;
};

struct LayoutResult {
  std::vector<std::array<double, 2>> positions;  // indexed like g.nodes
  std::vector<std::array<double, 2>> mds_positions;  // before refinement, per component origin
  std::uint64_t seed = 0;
  std::array<double, 4> bbox{};  // min_x, min_y, max_x, max_y
  double mds_stress = 0.0;       // Kruskal stress-1 of the MDS embedding
};

/// Classical MDS on graph distances per connected component, then a fixed
/// schedule of stress-gradient refinement steps; components tiled left to
/// right. Fully determined by (g, seed, options).
LayoutResult layout(const RuleGraph& g, std::uint64_t seed, const LayoutOptions& options = {});

/// Classical (Torgerson) MDS of a distance matrix into 2-D. Each axis is
/// oriented so its largest-magnitude coordinate is positive.
std::vector<std::array<double, 2>> classical_mds(const std::vector<std::vector<double>>& dist);

/// Kruskal stress-1: sqrt(sum (|xi-xj| - dij)^2 / sum dij^2).
double kruskal_stress(const std::vector<std::array<double, 2>>& pos,
                      const std::vector<std::vector<double>>& dist);

struct VisualParams {
  double radius_min = 6.0;
  double radius_max = 18.0;
};

struct NodeVisual {
  double radius = 0.0;
  double shade = 0.0;  // 0 lightest, 1 deepest
};

/// Radius linear in support over [radius_min, radius_max]; shade linear in
/// lift over [0, 1]. A degenerate range maps to the midpoint.
NodeVisual node_visuals(double support, double lift, std::pair<double, double> support_range,
                        std::pair<double, double> lift_range, const VisualParams& params = {});

}  // namespace cohortlens::graph
