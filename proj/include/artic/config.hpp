#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "artic/grounding.hpp"
#include "artic/structure.hpp"
#include "artic/trackio.hpp"

namespace artic {

/// Every tunable of the command line tool. JSON config files use these
/// field names; unknown keys are rejected.
struct RunConfig {
  // observation noise
  double sigma_pos = 0.01;
  double sigma_rot = 0.02;
  // segmentation
  double sigma_d = 0.005;
  double sigma_n = 0.1;
  double epsilon = 0.6;
  int min_pts = 3;
  // pose estimation
  int ransac_iterations = 100;
  double ransac_threshold = 0.02;
  bool refine = true;
  int refine_iterations = 50;
  // model complexity
  int k_rigid = 6;
  int k_prismatic = 8;
  int k_rotational = 9;
  // grounding training
  double l2 = 0.01;
  int epochs = 300;
  double step = 0.5;
  // synthetic scenes
  std::string scene = "door";
  int frames = 100;
  double sigma_track = 0.0;
  // run
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = OpenMP default
  std::string format = "json";
  // paths
  std::string tracks, poses, labels, lang_model, utterances, corpus, out, report;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;

  InferConfig infer_config() const;
  TrainConfig train_config() const;
};

/// Overlays the keys present in `j` onto `cfg`.
void apply_config_json(RunConfig& cfg, const Json& j);
Json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace artic
