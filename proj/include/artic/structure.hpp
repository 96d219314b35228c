#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artic/graph.hpp"
#include "artic/grounding.hpp"
#include "artic/kinfit.hpp"
#include "artic/posegraph.hpp"
#include "artic/segmentation.hpp"
#include "artic/trackio.hpp"

namespace artic {

/// Vision hypothesis with the language term folded into its BIC.
struct FusedHypothesis {
  ModelHypothesis vision;
  double lang_log_lik = 0.0;
  std::size_t n = 0;  // deltas + utterances mentioning the pair
  double bic = 0.0;   // -2 (vision + language) + k ln n
};

struct EdgeCandidate {
  int i = 0;
  int j = 0;
  /// Indexed by ModelType (rigid, prismatic, rotational).
  std::array<FusedHypothesis, 3> hypotheses;
  std::size_t selected = 0;
  double cost = 0.0;
  std::size_t n_deltas = 0;
  std::size_t n_utterances = 0;

  const FusedHypothesis& best() const { return hypotheses[selected]; }
};

/// Folds per-model language log-likelihoods (indexed by ModelType) into the
/// vision hypotheses and picks the minimum fused BIC; ties prefer the
/// simpler model. With n_utterances = 0 and zero language terms this is
/// exactly the vision-only selection.
EdgeCandidate fuse_hypotheses(int i, int j, std::span<const ModelHypothesis> vision,
                              const std::array<double, 3>& lang_log_lik,
                              std::size_t n_utterances);

/// Fits all three models to `deltas` and fuses the language evidence for
/// the part types of i and j (no evidence when either is unlabeled).
EdgeCandidate fuse_edge(int i, int j, std::span<const RelativeTransform> deltas,
                        std::span<const LanguageObservation> lang,
                        const std::optional<std::string>& i_type,
                        const std::optional<std::string>& j_type,
                        const NoiseModel& noise = {}, const ParamCounts& counts = {});

/// Kruskal MST over candidate costs, ties broken by (cost, i, j). Throws
/// DisconnectedGraph naming the parts not reachable from the first part.
KinematicGraph select_structure(std::span<const EdgeCandidate> candidates,
                                std::span<const int> parts);

/// Total cost of the edges of `g` under `candidates`.
double tree_cost(const KinematicGraph& g, std::span<const EdgeCandidate> candidates);

struct InferConfig {
  SegmentationConfig segmentation;
  PoseGraphConfig posegraph;
  NoiseModel noise;
  ParamCounts counts;
  bool refine = true;
};

struct InferInput {
  std::optional<std::vector<FeatureTrack>> tracks;
  std::optional<std::vector<PartTrajectory>> poses;
  PartLabelMap labels;
  std::optional<GroundingModel> grounding;
  std::vector<AnnotatedSentence> utterances;
};

struct InferResult {
  int n_clusters = 0;
  std::vector<PartTrajectory> part_trajectories;
  std::vector<EdgeCandidate> candidates;
  KinematicGraph graph;
  std::vector<int> unlabeled_parts;
  Json report() const;
};

/// Part trajectories from tracks: segmentation, per-cluster pose chains,
/// optional refinement, re-anchoring at the cluster centroid.
std::vector<PartTrajectory> estimate_parts(std::span<const FeatureTrack> tracks,
                                           const InferConfig& cfg,
                                           ClusterAssignment* assignment = nullptr);

/// Fits every part pair that shares at least 2 frames. Pairs are fitted in
/// parallel; output order is (i, j) ascending regardless of thread count.
std::vector<EdgeCandidate> fit_edges(std::span<const PartTrajectory> parts,
                                     std::span<const LanguageObservation> lang,
                                     const PartLabelMap& labels, const InferConfig& cfg);
/// Single-threaded reference for fit_edges.
std::vector<EdgeCandidate> fit_edges_serial(std::span<const PartTrajectory> parts,
                                            std::span<const LanguageObservation> lang,
                                            const PartLabelMap& labels,
                                            const InferConfig& cfg);

/// End-to-end: tracks or poses -> edge hypotheses -> spanning tree.
/// Errors carry the stage they came from.
InferResult infer(const InferInput& input, const InferConfig& cfg = {});

Json hypothesis_to_json(const FusedHypothesis& h);

}  // namespace artic
