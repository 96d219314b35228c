#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "artic/geometry.hpp"
#include "artic/graph.hpp"

namespace artic {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

struct TrackFrame {
  int t = 0;
  Vec3 point = Vec3::Zero();
  std::optional<Vec3> normal;
};

struct FeatureTrack {
  int track_id = 0;
  std::vector<TrackFrame> frames;
};

struct TimedPose {
  int t = 0;
  Pose pose;
};

/// Pose sequence of one object part (or cluster).
struct PartTrajectory {
  int part_id = 0;
  std::vector<TimedPose> poses;
};

/// cluster id -> object type
using PartLabelMap = std::map<int, std::string>;

enum class GraphFormat { Json, Dot };

// Tracks: JSON Lines, one {"track_id", "frames": [{"t","p","n"?}]} per line.
std::vector<FeatureTrack> parse_tracks(const std::string& text);
std::string dump_tracks(const std::vector<FeatureTrack>& tracks);
std::vector<FeatureTrack> load_tracks(const std::filesystem::path& path);
void save_tracks(const std::vector<FeatureTrack>& tracks,
                 const std::filesystem::path& path);

// Poses: {"format_version":1, "parts": [{"part_id", "poses": [{"t","q","p"}]}]}
std::vector<PartTrajectory> parse_pose_trajectories(const std::string& text);
std::string dump_pose_trajectories(const std::vector<PartTrajectory>& parts);
std::vector<PartTrajectory> load_pose_trajectories(
    const std::filesystem::path& path);
void save_pose_trajectories(const std::vector<PartTrajectory>& parts,
                            const std::filesystem::path& path);

// Graphs (ground truth and results).
Json params_to_json(const ModelParams& p);
ModelParams params_from_json(ModelType type, const Json& j);
Json graph_to_json(const KinematicGraph& g);
/// Validates the spanning-tree invariant.
KinematicGraph graph_from_json(const Json& j);
std::string graph_to_dot(const KinematicGraph& g);
KinematicGraph load_graph(const std::filesystem::path& path);
void save_graph(const KinematicGraph& g, const std::filesystem::path& path,
                GraphFormat format = GraphFormat::Json);

// Labels: {"format_version":1, "cluster_labels": {"<id>": "<type>"}}
PartLabelMap labels_from_json(const Json& j);
Json labels_to_json(const PartLabelMap& labels);
PartLabelMap load_labels(const std::filesystem::path& path);
void save_labels(const PartLabelMap& labels, const std::filesystem::path& path);

// Shared helpers for the other JSON formats.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);
/// Parses a JSON document, mapping syntax errors to ParseError with a line.
Json parse_json_document(const std::string& text);
void check_format_version(const Json& j);
Json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const Json& j, const std::string& field);
Json quat_to_json(const Quat& q);
/// Rejects quaternions whose norm is off by more than 1e-3.
Quat quat_from_json(const Json& j, const std::string& field);

}  // namespace artic
