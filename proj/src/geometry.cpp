#include "artic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "artic/error.hpp"

namespace artic {

namespace {

// Idempotent: an already-unit quaternion keeps its exact bits.
Quat canonical(Quat q) {
  if (std::abs(q.squaredNorm() - 1.0) > 1e-14) q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Pose::Pose(const Quat& q, const Vec3& t) : q_(canonical(q)), t_(t) {}

Pose Pose::about_axis(const Vec3& point, const Vec3& axis, double angle) {
  const Quat q(Eigen::AngleAxisd(angle, axis.normalized()));
  return {q, point - q * point};
}

Pose Pose::inverse() const {
  const Quat qi = q_.conjugate();
  return {qi, -(qi * t_)};
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.quat() * b.quat(), a.quat() * b.trans() + a.trans()};
}

double rotation_angle(const Quat& q) {
  const double v = q.vec().norm();
  return 2.0 * std::atan2(v, std::abs(q.w()));
}

double rotation_distance(const Quat& a, const Quat& b) {
  return rotation_angle(a.conjugate() * b);
}

Vec3 rotation_vector(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double v = q.vec().norm();
  if (v < 1e-300) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(v, q.w());
  return q.vec() * (angle / v);
}

Quat quat_from_rotation_vector(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, v / angle));
}

Vec3 canonical_sign(const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (v[i] > 0.0) return v;
    if (v[i] < 0.0) return -v;
  }
  return v;
}

Quat chordal_mean(std::span<const Quat> qs) {
  if (qs.empty()) return Quat::Identity();
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (const auto& q : qs) {
    const Eigen::Vector4d c = q.coeffs();
    m += c * c.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  const Eigen::Vector4d best = es.eigenvectors().col(3);
  Quat out;
  out.coeffs() = best;
  return canonical(out);
}

Pose align_point_sets(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size())
    throw DegenerateGeometry("point set sizes differ");
  const std::size_t n = src.size();
  if (n < 3)
    throw DegenerateGeometry("need at least 3 correspondences, got " +
                             std::to_string(n));

  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    cs += src[k];
    cd += dst[k];
  }
  cs /= double(n);
  cd /= double(n);

  Mat3 h = Mat3::Zero();
  Mat3 ss = Mat3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 a = src[k] - cs;
    h += a * (dst[k] - cd).transpose();
    ss += a * a.transpose();
  }

  // Collinear (or coincident) sources leave rotation about the line free.
  Eigen::SelfAdjointEigenSolver<Mat3> spread(ss);
  const double lmax = spread.eigenvalues()(2);
  const double lmid = spread.eigenvalues()(1);
  if (!(lmax > 0.0) || lmid <= 1e-12 * lmax)
    throw DegenerateGeometry("source points are collinear");

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Mat3 r = v * d * u.transpose();
  return {r, cd - r * cs};
}

double alignment_rms(const Pose& pose, std::span<const Vec3> src,
                     std::span<const Vec3> dst) {
  if (src.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < src.size(); ++k)
    acc += (dst[k] - pose.apply(src[k])).squaredNorm();
  return std::sqrt(acc / double(src.size()));
}

std::size_t RansacResult::inlier_count() const {
  return std::size_t(std::count(inliers.begin(), inliers.end(), true));
}

namespace {

std::vector<bool> consensus(const Pose& pose, std::span<const Vec3> src,
                            std::span<const Vec3> dst, double thresh) {
  std::vector<bool> mask(src.size());
  for (std::size_t k = 0; k < src.size(); ++k)
    mask[k] = (dst[k] - pose.apply(src[k])).norm() < thresh;
  return mask;
}

double inlier_sse(const Pose& pose, std::span<const Vec3> src,
                  std::span<const Vec3> dst, const std::vector<bool>& mask) {
  double acc = 0.0;
  for (std::size_t k = 0; k < src.size(); ++k)
    if (mask[k]) acc += (dst[k] - pose.apply(src[k])).squaredNorm();
  return acc;
}

// Refits on the masked subset; returns false when the subset is degenerate.
bool refit(std::span<const Vec3> src, std::span<const Vec3> dst,
           const std::vector<bool>& mask, Pose& out) {
  std::vector<Vec3> s, d;
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (!mask[k]) continue;
    s.push_back(src[k]);
    d.push_back(dst[k]);
  }
  try {
    out = align_point_sets(s, d);
    return true;
  } catch (const DegenerateGeometry&) {
    return false;
  }
}

}  // namespace

RansacResult ransac_align(std::span<const Vec3> src, std::span<const Vec3> dst,
                          const RansacConfig& cfg) {
  const std::size_t n = src.size();
  if (n != dst.size()) throw DegenerateGeometry("point set sizes differ");
  if (n < 3)
    throw NoConsensus("need at least 3 correspondences, got " +
                      std::to_string(n));

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  RansacResult best{Pose::identity(), std::vector<bool>(n, false)};
  std::size_t best_count = 0;
  double best_sse = 0.0;

  for (int it = 0; it < cfg.iterations && best_count < n; ++it) {
    std::size_t i0 = pick(rng), i1 = pick(rng), i2 = pick(rng);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    const Vec3 s3[3] = {src[i0], src[i1], src[i2]};
    const Vec3 d3[3] = {dst[i0], dst[i1], dst[i2]};
    Pose candidate;
    try {
      candidate = align_point_sets(s3, d3);
    } catch (const DegenerateGeometry&) {
      continue;
    }
    auto mask = consensus(candidate, src, dst, cfg.inlier_threshold);
    const std::size_t count = std::size_t(std::count(mask.begin(), mask.end(), true));
    if (count < 3 || count < best_count) continue;

    Pose fitted = candidate;
    if (refit(src, dst, mask, fitted)) {
      auto refined = consensus(fitted, src, dst, cfg.inlier_threshold);
      const std::size_t rc = std::size_t(std::count(refined.begin(), refined.end(), true));
      if (rc >= count) {
        mask = std::move(refined);
      } else {
        fitted = candidate;
      }
    } else {
      fitted = candidate;
    }
    const std::size_t final_count = std::size_t(std::count(mask.begin(), mask.end(), true));
    const double sse = inlier_sse(fitted, src, dst, mask);
    if (final_count > best_count ||
        (final_count == best_count && sse < best_sse)) {
      best.pose = fitted;
      best.inliers = std::move(mask);
      best_count = final_count;
      best_sse = sse;
    }
  }

  // Exhaustive fallback for tiny problems where random sampling may miss.
  if (best_count < 3 && n <= 6) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c) {
          const Vec3 s3[3] = {src[a], src[b], src[c]};
          const Vec3 d3[3] = {dst[a], dst[b], dst[c]};
          try {
            Pose p = align_point_sets(s3, d3);
            auto mask = consensus(p, src, dst, cfg.inlier_threshold);
            const std::size_t count = std::size_t(std::count(mask.begin(), mask.end(), true));
            if (count > best_count) {
              best = {p, mask};
              best_count = count;
            }
          } catch (const DegenerateGeometry&) {
          }
        }
  }

  if (best_count < 3)
    throw NoConsensus("best consensus set has " + std::to_string(best_count) +
                      " of " + std::to_string(n) + " points");

  Pose final_pose;
  if (refit(src, dst, best.inliers, final_pose)) best.pose = final_pose;
  return best;
}

}  // namespace artic
