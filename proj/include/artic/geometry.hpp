#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Geometry>

namespace artic {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rigid-body transform in SE(3). The rotation is kept as a unit quaternion
/// with w >= 0 so that equal rotations compare equal.
class Pose {
 public:
  Pose() : q_(Quat::Identity()), t_(Vec3::Zero()) {}
  Pose(const Quat& q, const Vec3& t);
  Pose(const Mat3& r, const Vec3& t) : Pose(Quat(r), t) {}

  static Pose identity() { return {}; }
  static Pose translation(const Vec3& t) { return {Quat::Identity(), t}; }
  static Pose rotation(const Quat& q) { return {q, Vec3::Zero()}; }
  /// Rotation by `angle` radians about the line through `point` along `axis`.
  static Pose about_axis(const Vec3& point, const Vec3& axis, double angle);

  const Quat& quat() const { return q_; }
  const Vec3& trans() const { return t_; }
  Mat3 rot() const { return q_.toRotationMatrix(); }

  Vec3 apply(const Vec3& p) const { return q_ * p + t_; }
  Pose inverse() const;

  bool operator==(const Pose& o) const {
    return q_.coeffs() == o.q_.coeffs() && t_ == o.t_;
  }

 private:
  Quat q_;
  Vec3 t_;
};

Pose compose(const Pose& a, const Pose& b);
inline Pose inverse(const Pose& p) { return p.inverse(); }

/// Rotation angle of a quaternion in [0, pi].
double rotation_angle(const Quat& q);
/// Geodesic distance between two rotations, angle of Ra^T Rb.
double rotation_distance(const Quat& a, const Quat& b);
/// Rotation vector (axis * angle) with angle in [0, pi].
Vec3 rotation_vector(const Quat& q);
Quat quat_from_rotation_vector(const Vec3& v);

/// Flips `v` so that its first nonzero component is positive.
Vec3 canonical_sign(const Vec3& v);

/// Chordal L2 mean of rotations (dominant eigenvector of sum q q^T).
Quat chordal_mean(std::span<const Quat> qs);

struct RelativeTransform {
  Pose delta;
  int t = 0;
};

/// Least-squares rigid alignment dst ~ R*src + t with det(R) = +1.
/// Throws DegenerateGeometry for fewer than 3 points or collinear src.
Pose align_point_sets(std::span<const Vec3> src, std::span<const Vec3> dst);

/// RMS of ||dst_k - pose(src_k)||.
double alignment_rms(const Pose& pose, std::span<const Vec3> src,
                     std::span<const Vec3> dst);

struct RansacConfig {
  int iterations = 100;
  double inlier_threshold = 0.02;  // meters
  std::uint64_t seed = 0;
};

struct RansacResult {
  Pose pose;
  std::vector<bool> inliers;
  std::size_t inlier_count() const;
};

/// Minimal-sample (3 point) RANSAC around align_point_sets. The model is
/// refit on the whole consensus set at every improvement.
RansacResult ransac_align(std::span<const Vec3> src, std::span<const Vec3> dst,
                          const RansacConfig& cfg);

}  // namespace artic
