#pragma once

#include <map>
#include <string>
#include <vector>

#include "artic/kinfit.hpp"

namespace artic {

struct KinematicEdge {
  int i = 0;
  int j = 0;
  ModelParams params;
  ModelType type() const { return model_type_of(params); }
};

/// Articulated-object graph: vertices are parts, edges are linkages. Used
/// both for estimates and for ground truth.
struct KinematicGraph {
  std::vector<int> parts;
  std::vector<KinematicEdge> edges;
  /// Optional semantic type per part.
  std::map<int, std::string> labels;
  /// Optional track id -> part id assignment (segmentation output or the
  /// generating part for synthetic data).
  std::map<int, int> track_parts;

  bool has_part(int id) const;
  /// Edges index by unordered (min, max) pair; returns nullptr when absent.
  const KinematicEdge* find_edge(int a, int b) const;
  /// |edges| == |parts| - 1, every endpoint is a part, connected and acyclic.
  bool is_spanning_tree() const;
};

using GroundTruthGraph = KinematicGraph;

}  // namespace artic
