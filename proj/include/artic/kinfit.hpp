#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "artic/geometry.hpp"

namespace artic {

enum class ModelType { Rigid = 0, Prismatic = 1, Rotational = 2 };

inline constexpr std::array<ModelType, 3> kModelTypes = {
    ModelType::Rigid, ModelType::Prismatic, ModelType::Rotational};

std::string to_string(ModelType m);
/// Accepts "rigid", "prismatic", "rotational" (and "revolute").
ModelType model_type_from_string(const std::string& s);

struct RigidParams {
  Pose fixed;
};

struct PrismaticParams {
  Pose origin;
  Vec3 axis = Vec3::UnitX();
  double q_min = 0.0, q_max = 0.0;  // meters
};

struct RotationalParams {
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double radius = 0.0;
  Pose phase;
  double q_min = 0.0, q_max = 0.0;  // radians
};

using ModelParams = std::variant<RigidParams, PrismaticParams, RotationalParams>;

ModelType model_type_of(const ModelParams& p);
/// Joint axis for prismatic/rotational params, nullopt for rigid.
std::optional<Vec3> joint_axis(const ModelParams& p);
/// Predicted relative transform at configuration q (ignored for rigid).
Pose predict(const ModelParams& p, double q);

struct NoiseModel {
  double sigma_pos = 0.01;  // meters
  double sigma_rot = 0.02;  // radians
};

/// Free-parameter counts used in the complexity penalty.
struct ParamCounts {
  int rigid = 6;
  int prismatic = 8;
  int rotational = 9;
  int operator()(ModelType m) const;
};

struct ModelHypothesis {
  ModelType type = ModelType::Rigid;
  ModelParams params;
  double log_lik = 0.0;  // nats
  int k = 0;
  std::size_t n = 0;
  double bic = 0.0;
  bool degenerate = false;
  std::string note;  // reason when degenerate
};

/// -2 log_lik + k ln n. Throws InvalidCount for n == 0.
double bic(double log_lik, int k, std::size_t n);

/// Log density of a zero-mean scalar Gaussian.
double log_normal(double residual, double sigma);

ModelHypothesis fit_rigid(std::span<const RelativeTransform> deltas,
                          const NoiseModel& noise = {},
                          const ParamCounts& counts = {});
/// Throws DegenerateMotion when the translations do not spread at all.
ModelHypothesis fit_prismatic(std::span<const RelativeTransform> deltas,
                              const NoiseModel& noise = {},
                              const ParamCounts& counts = {});
/// Throws DegenerateMotion when no delta rotates relative to the first by
/// more than 1e-6 rad.
ModelHypothesis fit_rotational(std::span<const RelativeTransform> deltas,
                               const NoiseModel& noise = {},
                               const ParamCounts& counts = {});

/// All three hypotheses sorted by ascending BIC; ties keep the
/// Rigid < Prismatic < Rotational order. Degenerate fits carry
/// log_lik = -inf.
std::vector<ModelHypothesis> fit_all(std::span<const RelativeTransform> deltas,
                                     const NoiseModel& noise = {},
                                     const ParamCounts& counts = {});

/// Per-frame configuration of `p` for each delta (0 for rigid).
std::vector<double> configurations(const ModelParams& p,
                                   std::span<const RelativeTransform> deltas);

struct CircleFit {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

/// Algebraic (Kasa) circle fit refined by geometric Gauss-Newton.
CircleFit fit_circle(std::span<const Eigen::Vector2d> pts);

}  // namespace artic
