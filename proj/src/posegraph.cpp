#include "artic/posegraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "artic/error.hpp"

namespace artic {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

// Point of every track observed at frame t, keyed by track id.
using FrameIndex = std::map<int, std::map<int, Vec3>>;

FrameIndex index_frames(std::span<const FeatureTrack> tracks) {
  FrameIndex idx;
  for (const auto& tr : tracks)
    for (const auto& f : tr.frames) idx[f.t][tr.track_id] = f.point;
  return idx;
}

void shared_points(const std::map<int, Vec3>& a, const std::map<int, Vec3>& b,
                   std::vector<Vec3>& src, std::vector<Vec3>& dst) {
  src.clear();
  dst.clear();
  for (const auto& [tid, p] : a) {
    auto it = b.find(tid);
    if (it == b.end()) continue;
    src.push_back(p);
    dst.push_back(it->second);
  }
}

Pose exp_perturb(const Vec6& d) {
  return {quat_from_rotation_vector(d.head<3>()), Vec3(d.tail<3>())};
}

// Residual of constraint (a -> b): predicted motion x_b * x_a^-1 against the
// measurement, rotation vector stacked over translation difference.
Vec6 constraint_residual(const Pose& xa, const Pose& xb, const Pose& measured) {
  const Pose pred = compose(xb, xa.inverse());
  Vec6 r;
  r.head<3>() = rotation_vector(measured.quat().conjugate() * pred.quat());
  r.tail<3>() = pred.trans() - measured.trans();
  return r;
}

}  // namespace

ClusterTrajectory estimate_trajectory(std::span<const FeatureTrack> tracks,
                                      const PoseGraphConfig& cfg, int cluster_id) {
  if (tracks.size() < 3)
    throw DegenerateGeometry("cluster " + std::to_string(cluster_id) + " has " +
                             std::to_string(tracks.size()) + " track(s), need 3");
  const FrameIndex idx = index_frames(tracks);

  ClusterTrajectory out;
  out.cluster_id = cluster_id;
  const std::map<int, Vec3>* prev = nullptr;
  int prev_t = 0;
  std::vector<Vec3> src, dst;
  for (const auto& [t, pts] : idx) {
    if (pts.size() < 3) continue;  // unobservable at t
    if (!prev) {
      out.poses.push_back({t, Pose::identity()});
      out.inliers.push_back(0);
    } else {
      shared_points(*prev, pts, src, dst);
      if (src.size() < 3)
        throw GapTooLarge("cluster " + std::to_string(cluster_id) + ": frames " +
                          std::to_string(prev_t) + " and " + std::to_string(t) +
                          " share " + std::to_string(src.size()) + " track(s)");
      RansacConfig rc = cfg.ransac;
      rc.seed = cfg.ransac.seed + std::uint64_t(t);
      const RansacResult step = ransac_align(src, dst, rc);
      out.poses.push_back({t, compose(step.pose, out.poses.back().pose)});
      out.inliers.push_back(int(step.inlier_count()));
    }
    prev = &pts;
    prev_t = t;
  }
  if (out.poses.empty())
    throw DegenerateGeometry("cluster " + std::to_string(cluster_id) +
                             " is never observed by 3 tracks at once");
  return out;
}

std::vector<PoseConstraint> build_constraints(const ClusterTrajectory& traj,
                                              std::span<const FeatureTrack> tracks,
                                              const RansacConfig& ransac) {
  const FrameIndex idx = index_frames(tracks);
  std::vector<PoseConstraint> out;
  std::vector<Vec3> src, dst;
  const std::size_t n = traj.poses.size();
  for (std::size_t b = 1; b < n; ++b) {
    std::set<std::size_t> from;
    for (std::size_t stride = 1; stride <= b; stride *= 2) from.insert(b - stride);
    from.insert(0);
    for (std::size_t a : from) {
      auto ia = idx.find(traj.poses[a].t);
      auto ib = idx.find(traj.poses[b].t);
      if (ia == idx.end() || ib == idx.end()) continue;
      shared_points(ia->second, ib->second, src, dst);
      if (src.size() < 3) continue;
      RansacConfig rc = ransac;
      rc.seed = ransac.seed + std::uint64_t(a) * 1000003ULL + std::uint64_t(b);
      try {
        out.push_back({a, b, ransac_align(src, dst, rc).pose});
      } catch (const Error&) {
        // Skip links are optional; consecutive ones were validated upstream.
      }
    }
  }
  return out;
}

double pose_graph_residual(std::span<const TimedPose> poses,
                           std::span<const PoseConstraint> constraints) {
  double acc = 0.0;
  for (const auto& c : constraints)
    acc += constraint_residual(poses[c.from].pose, poses[c.to].pose, c.measured).squaredNorm();
  return acc;
}

ClusterTrajectory optimize_pose_graph(const ClusterTrajectory& traj,
                                      std::span<const PoseConstraint> constraints,
                                      const PoseGraphConfig& cfg,
                                      std::vector<double>* residual_trace) {
  ClusterTrajectory cur = traj;
  double cost = pose_graph_residual(cur.poses, constraints);
  if (residual_trace) residual_trace->assign(1, cost);
  const std::size_t n = cur.poses.size();
  if (n < 2 || constraints.empty() || cost == 0.0) {
    cur.converged = true;
    return cur;
  }

  const Eigen::Index dim = Eigen::Index(6 * (n - 1));
  double lambda = cfg.initial_damping;
  constexpr double h = 1e-7;
  cur.converged = false;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(constraints.size() * 144);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);

    for (const auto& c : constraints) {
      const Pose& xa = cur.poses[c.from].pose;
      const Pose& xb = cur.poses[c.to].pose;
      const Vec6 r = constraint_residual(xa, xb, c.measured);
      Eigen::Matrix<double, 6, 12> jac = Eigen::Matrix<double, 6, 12>::Zero();
      for (int k = 0; k < 6; ++k) {
        Vec6 d = Vec6::Zero();
        d(k) = h;
        const Vec6 dm = -d;
        if (c.from != 0)
          jac.col(k) = (constraint_residual(compose(exp_perturb(d), xa), xb, c.measured) -
                        constraint_residual(compose(exp_perturb(dm), xa), xb, c.measured)) /
                       (2.0 * h);
        if (c.to != 0)
          jac.col(6 + k) =
              (constraint_residual(xa, compose(exp_perturb(d), xb), c.measured) -
               constraint_residual(xa, compose(exp_perturb(dm), xb), c.measured)) /
              (2.0 * h);
      }
      const std::size_t blocks[2] = {c.from, c.to};
      for (int bi = 0; bi < 2; ++bi) {
        if (blocks[bi] == 0) continue;
        const Eigen::Index oi = Eigen::Index(6 * (blocks[bi] - 1));
        const auto ji = jac.middleCols<6>(6 * bi);
        grad.segment<6>(oi) += ji.transpose() * r;
        for (int bj = 0; bj < 2; ++bj) {
          if (blocks[bj] == 0) continue;
          const Eigen::Index oj = Eigen::Index(6 * (blocks[bj] - 1));
          const Eigen::Matrix<double, 6, 6> blk = ji.transpose() * jac.middleCols<6>(6 * bj);
          for (int u = 0; u < 6; ++u)
            for (int v = 0; v < 6; ++v) trip.emplace_back(oi + u, oj + v, blk(u, v));
        }
      }
    }
    Eigen::SparseMatrix<double> hess(dim, dim);
    hess.setFromTriplets(trip.begin(), trip.end());

    bool accepted = false;
    while (lambda < 1e10) {
      Eigen::SparseMatrix<double> damped = hess;
      for (Eigen::Index k = 0; k < dim; ++k) damped.coeffRef(k, k) += lambda;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = solver.solve(-grad);
      ClusterTrajectory trial = cur;
      for (std::size_t p = 1; p < n; ++p)
        trial.poses[p].pose =
            compose(exp_perturb(step.segment<6>(Eigen::Index(6 * (p - 1)))), cur.poses[p].pose);
      const double next = pose_graph_residual(trial.poses, constraints);
      if (std::isfinite(next) && next < cost) {
        const double rel = (cost - next) / cost;
        cur = std::move(trial);
        cost = next;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (residual_trace) residual_trace->push_back(cost);
        if (rel < cfg.relative_tolerance) cur.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at any damping: a stationary point.
      cur.converged = true;
      break;
    }
    if (cur.converged) break;
  }
  return cur;
}

ClusterTrajectory refine_trajectory(const ClusterTrajectory& traj,
                                    std::span<const FeatureTrack> tracks,
                                    const PoseGraphConfig& cfg) {
  if (traj.poses.size() < 2) return traj;

  // Work about the first-frame centroid so rotation errors do not leak into
  // translation residuals through a long lever arm.
  const PartTrajectory anchored = anchor_trajectory(traj, tracks);
  const Vec3 c = anchored.poses.front().pose.trans();
  const Pose shift = Pose::translation(c);
  const Pose unshift = Pose::translation(-c);

  std::vector<FeatureTrack> local(tracks.begin(), tracks.end());
  for (auto& tr : local)
    for (auto& f : tr.frames) f.point -= c;

  ClusterTrajectory conj = traj;
  for (auto& tp : conj.poses) tp.pose = compose(unshift, compose(tp.pose, shift));

  const auto constraints = build_constraints(conj, local, cfg.ransac);
  ClusterTrajectory refined = optimize_pose_graph(conj, constraints, cfg);
  for (auto& tp : refined.poses) tp.pose = compose(shift, compose(tp.pose, unshift));
  refined.poses.front().pose = Pose::identity();
  return refined;
}

std::vector<RelativeTransform> relative_transform_sequence(
    std::span<const TimedPose> traj_i, std::span<const TimedPose> traj_j) {
  std::vector<RelativeTransform> out;
  auto a = traj_i.begin();
  auto b = traj_j.begin();
  while (a != traj_i.end() && b != traj_j.end()) {
    if (a->t < b->t) {
      ++a;
    } else if (b->t < a->t) {
      ++b;
    } else {
      out.push_back({compose(a->pose.inverse(), b->pose), a->t});
      ++a;
      ++b;
    }
  }
  if (out.size() < 2)
    throw InsufficientOverlap("trajectories share " + std::to_string(out.size()) +
                              " frame(s), need 2");
  return out;
}

PartTrajectory anchor_trajectory(const ClusterTrajectory& traj,
                                 std::span<const FeatureTrack> tracks) {
  PartTrajectory out;
  out.part_id = traj.cluster_id;
  if (traj.poses.empty()) return out;
  const int t0 = traj.poses.front().t;
  Vec3 centroid = Vec3::Zero();
  int count = 0;
  for (const auto& tr : tracks)
    for (const auto& f : tr.frames)
      if (f.t == t0) {
        centroid += f.point;
        ++count;
      }
  if (count > 0) centroid /= double(count);
  const Pose origin = Pose::translation(centroid);
  for (const auto& tp : traj.poses) out.poses.push_back({tp.t, compose(tp.pose, origin)});
  return out;
}

}  // namespace artic
