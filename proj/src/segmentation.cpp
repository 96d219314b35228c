#include "artic/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "artic/error.hpp"

namespace artic {

namespace {

double population_variance(const std::vector<double>& xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / double(xs.size());
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

RigidityAffinity pairwise_affinity(const FeatureTrack& a, const FeatureTrack& b,
                                   double sigma_d, double sigma_n) {
  std::vector<double> dist, angle;
  auto ia = a.frames.begin();
  auto ib = b.frames.begin();
  while (ia != a.frames.end() && ib != b.frames.end()) {
    if (ia->t < ib->t) {
      ++ia;
    } else if (ib->t < ia->t) {
      ++ib;
    } else {
      dist.push_back((ia->point - ib->point).norm());
      if (ia->normal && ib->normal) angle.push_back(angle_between(*ia->normal, *ib->normal));
      ++ia;
      ++ib;
    }
  }
  if (dist.size() < 2)
    throw InsufficientOverlap("tracks " + std::to_string(a.track_id) + " and " +
                              std::to_string(b.track_id) + " share " +
                              std::to_string(dist.size()) + " frame(s)");

  RigidityAffinity out;
  out.track_a = a.track_id;
  out.track_b = b.track_id;
  out.displacement = std::exp(-population_variance(dist) / (2.0 * sigma_d * sigma_d));
  if (angle.size() >= 2)
    out.normal_angle = std::exp(-population_variance(angle) / (2.0 * sigma_n * sigma_n));
  return out;
}

namespace {

double pair_score(const FeatureTrack& a, const FeatureTrack& b, double sd, double sn) {
  try {
    return pairwise_affinity(a, b, sd, sn).score();
  } catch (const InsufficientOverlap&) {
    return 0.0;
  }
}

}  // namespace

AffinityMatrix affinity_matrix_serial(std::span<const FeatureTrack> tracks,
                                      double sigma_d, double sigma_n) {
  AffinityMatrix m{tracks.size(), std::vector<double>(tracks.size() * tracks.size(), 0.0)};
  for (std::size_t i = 0; i < m.n; ++i) {
    m.values[i * m.n + i] = 1.0;
    for (std::size_t j = i + 1; j < m.n; ++j) {
      const double s = pair_score(tracks[i], tracks[j], sigma_d, sigma_n);
      m.values[i * m.n + j] = s;
      m.values[j * m.n + i] = s;
    }
  }
  return m;
}

AffinityMatrix affinity_matrix(std::span<const FeatureTrack> tracks,
                               double sigma_d, double sigma_n) {
  AffinityMatrix m{tracks.size(), std::vector<double>(tracks.size() * tracks.size(), 0.0)};
  const long n = long(m.n);
  // Rows shrink with i; dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    m.values[std::size_t(i * n + i)] = 1.0;
    for (long j = i + 1; j < n; ++j) {
      const double s = pair_score(tracks[std::size_t(i)], tracks[std::size_t(j)], sigma_d, sigma_n);
      m.values[std::size_t(i * n + j)] = s;
      m.values[std::size_t(j * n + i)] = s;
    }
  }
  return m;
}

std::vector<std::vector<int>> ClusterAssignment::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n_clusters));
  for (const auto& [tid, c] : cluster_of)
    if (c != kNoise) out[std::size_t(c)].push_back(tid);
  return out;
}

ClusterAssignment cluster_with_affinity(std::span<const FeatureTrack> tracks,
                                        const AffinityMatrix& affinity,
                                        const SegmentationConfig& cfg) {
  const std::size_t n = tracks.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tracks[a].track_id < tracks[b].track_id;
  });

  // Neighbour lists in ascending track id order.
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t a : order)
    for (std::size_t b : order)
      if (affinity(a, b) >= cfg.epsilon) nbrs[a].push_back(b);

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int next = 0;
  for (std::size_t seed : order) {
    if (label[seed] != kUnvisited) continue;
    if (int(nbrs[seed].size()) < cfg.min_pts) {
      label[seed] = kNoise;
      continue;
    }
    const int cid = next++;
    label[seed] = cid;
    std::deque<std::size_t> frontier(nbrs[seed].begin(), nbrs[seed].end());
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      if (label[p] == kNoise) label[p] = cid;  // border point
      if (label[p] != kUnvisited) continue;
      label[p] = cid;
      if (int(nbrs[p].size()) >= cfg.min_pts)
        frontier.insert(frontier.end(), nbrs[p].begin(), nbrs[p].end());
    }
  }

  ClusterAssignment out;
  out.n_clusters = next;
  for (std::size_t i = 0; i < n; ++i) out.cluster_of[tracks[i].track_id] = label[i];
  return out;
}

ClusterAssignment cluster_tracks(std::span<const FeatureTrack> tracks,
                                 const SegmentationConfig& cfg) {
  return cluster_with_affinity(tracks, affinity_matrix(tracks, cfg.sigma_d, cfg.sigma_n), cfg);
}

}  // namespace artic
