#pragma once

#include "quadcarve/tlayout.hpp"

#include <functional>

namespace quadcarve {

// Mutable node/edge soup used to construct and rewrite layouts. Removed
// entities are tombstoned until finish() compacts and rebuilds the topology.
class LayoutEditor {
 public:
  LayoutEditor(std::vector<LayoutNode> nodes, std::vector<LayoutEdge> edges, int euler_characteristic,
               int boundary_loops);
  explicit LayoutEditor(const TLayout& layout);

  int add_node(const LayoutNode& n);
  int add_edge(LayoutEdge e);
  void remove_edge(int e);
  bool alive_edge(int e) const { return !dead_edge_[e]; }
  bool alive_node(int v) const { return !dead_node_[v]; }
  LayoutNode& node(int v) { return nodes_[v]; }
  const LayoutEdge& edge(int e) const { return edges_[e]; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  // Live edges touching v; a self-loop appears twice.
  std::vector<int> incident(int v) const;
  int degree(int v) const { return static_cast<int>(incident(v).size()); }

  // Splits edge e at the polyline location closest to `point`; returns the new node.
  int split_edge(int e, const Vec3& point, const LayoutNode& node);
  // Joins the two distinct edges at a degree-2 node. Returns false if not possible.
  bool dissolve(int v);
  // Dissolves every degree-2 node that is not a singularity, boundary corner or
  // the last node of a boundary loop.
  void dissolve_regular();
  // Re-derives T-junction / crossing / boundary-exit kinds from degrees.
  void refresh_kinds();

  // Compacts live entities. The optional maps receive, for every node/edge of
  // the result, its index in this editor.
  TLayout finish(std::vector<int>* node_map = nullptr, std::vector<int>* edge_map = nullptr) const;

 private:
  std::vector<LayoutNode> nodes_;
  std::vector<LayoutEdge> edges_;
  std::vector<char> dead_edge_;
  std::vector<char> dead_node_;
  int chi_;
  int loops_;
};

// Closest point on a polyline: returns (segment index, fraction).
std::pair<int, double> closest_on_polyline(const std::vector<Vec3>& polyline, const Vec3& p);
double polyline_length(const std::vector<Vec3>& polyline);

}  // namespace quadcarve
