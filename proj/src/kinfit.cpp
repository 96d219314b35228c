#include "artic/kinfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "artic/error.hpp"

namespace artic {

std::string to_string(ModelType m) {
  switch (m) {
    case ModelType::Rigid: return "rigid";
    case ModelType::Prismatic: return "prismatic";
    case ModelType::Rotational: return "rotational";
  }
  return "?";
}

ModelType model_type_from_string(const std::string& s) {
  if (s == "rigid") return ModelType::Rigid;
  if (s == "prismatic") return ModelType::Prismatic;
  if (s == "rotational" || s == "revolute") return ModelType::Rotational;
  throw SchemaError("unknown model type '" + s + "'");
}

ModelType model_type_of(const ModelParams& p) {
  return static_cast<ModelType>(p.index());
}

std::optional<Vec3> joint_axis(const ModelParams& p) {
  if (auto* pr = std::get_if<PrismaticParams>(&p)) return pr->axis;
  if (auto* ro = std::get_if<RotationalParams>(&p)) return ro->axis;
  return std::nullopt;
}

Pose predict(const ModelParams& p, double q) {
  return std::visit(
      [q](const auto& m) -> Pose {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RigidParams>) {
          return m.fixed;
        } else if constexpr (std::is_same_v<T, PrismaticParams>) {
          return {m.origin.quat(), m.origin.trans() + q * m.axis};
        } else {
          return compose(Pose::about_axis(m.center, m.axis, q), m.phase);
        }
      },
      p);
}

int ParamCounts::operator()(ModelType m) const {
  switch (m) {
    case ModelType::Rigid: return rigid;
    case ModelType::Prismatic: return prismatic;
    case ModelType::Rotational: return rotational;
  }
  return 0;
}

double bic(double log_lik, int k, std::size_t n) {
  if (n == 0) throw InvalidCount("BIC needs at least one observation");
  return -2.0 * log_lik + double(k) * std::log(double(n));
}

double log_normal(double residual, double sigma) {
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) -
         residual * residual / (2.0 * sigma * sigma);
}

namespace {

std::vector<Quat> rotations(std::span<const RelativeTransform> deltas) {
  std::vector<Quat> qs;
  qs.reserve(deltas.size());
  for (const auto& d : deltas) qs.push_back(d.delta.quat());
  return qs;
}

Vec3 mean_translation(std::span<const RelativeTransform> deltas) {
  Vec3 m = Vec3::Zero();
  for (const auto& d : deltas) m += d.delta.trans();
  return m / double(deltas.size());
}

ModelHypothesis finish(ModelType type, ModelParams params, double log_lik,
                       std::size_t n, const ParamCounts& counts) {
  ModelHypothesis h;
  h.type = type;
  h.params = std::move(params);
  h.log_lik = log_lik;
  h.k = counts(type);
  h.n = n;
  h.bic = bic(h.log_lik, h.k, h.n);
  return h;
}

// Signed angle of the twist of `q` about unit `axis`, in (-pi, pi].
double twist_angle(const Quat& q, const Vec3& axis) {
  return 2.0 * std::atan2(axis.dot(q.vec()), q.w());
}

void unwrap(std::vector<double>& angles) {
  for (std::size_t i = 1; i < angles.size(); ++i) {
    double d = angles[i] - angles[i - 1];
    while (d > std::numbers::pi) {
      angles[i] -= 2.0 * std::numbers::pi;
      d -= 2.0 * std::numbers::pi;
    }
    while (d < -std::numbers::pi) {
      angles[i] += 2.0 * std::numbers::pi;
      d += 2.0 * std::numbers::pi;
    }
  }
}

std::pair<Vec3, Vec3> plane_basis(const Vec3& axis) {
  Vec3 helper = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 u = axis.cross(helper).normalized();
  Vec3 v = axis.cross(u);
  return {u, v};
}

}  // namespace

ModelHypothesis fit_rigid(std::span<const RelativeTransform> deltas,
                          const NoiseModel& noise, const ParamCounts& counts) {
  if (deltas.empty()) throw InvalidCount("rigid fit needs at least one delta");
  const auto qs = rotations(deltas);
  const Pose fixed(chordal_mean(qs), mean_translation(deltas));

  double ll = 0.0;
  for (const auto& d : deltas) {
    ll += log_normal((d.delta.trans() - fixed.trans()).norm(), noise.sigma_pos);
    ll += log_normal(rotation_distance(d.delta.quat(), fixed.quat()),
                     noise.sigma_rot);
  }
  return finish(ModelType::Rigid, RigidParams{fixed}, ll, deltas.size(), counts);
}

ModelHypothesis fit_prismatic(std::span<const RelativeTransform> deltas,
                              const NoiseModel& noise,
                              const ParamCounts& counts) {
  if (deltas.size() < 2)
    throw DegenerateMotion("prismatic fit needs at least 2 deltas");
  const Vec3 mean = mean_translation(deltas);
  Mat3 cov = Mat3::Zero();
  for (const auto& d : deltas) {
    const Vec3 c = d.delta.trans() - mean;
    cov += c * c.transpose();
  }
  cov /= double(deltas.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const bool all_equal =
      std::all_of(deltas.begin(), deltas.end(), [&](const RelativeTransform& d) {
        return d.delta.trans() == deltas.front().delta.trans();
      });
  if (all_equal || !(es.eigenvalues()(2) > 0.0))
    throw DegenerateMotion("translations do not spread; axis undefined");

  PrismaticParams p;
  p.axis = canonical_sign(es.eigenvectors().col(2).normalized());
  const auto qs = rotations(deltas);
  p.origin = Pose(chordal_mean(qs), mean);

  double ll = 0.0;
  p.q_min = std::numeric_limits<double>::infinity();
  p.q_max = -std::numeric_limits<double>::infinity();
  for (const auto& d : deltas) {
    const Vec3 rel = d.delta.trans() - mean;
    const double q = p.axis.dot(rel);
    p.q_min = std::min(p.q_min, q);
    p.q_max = std::max(p.q_max, q);
    ll += log_normal((rel - q * p.axis).norm(), noise.sigma_pos);
    ll += log_normal(rotation_distance(d.delta.quat(), p.origin.quat()),
                     noise.sigma_rot);
  }
  return finish(ModelType::Prismatic, p, ll, deltas.size(), counts);
}

CircleFit fit_circle(std::span<const Eigen::Vector2d> pts) {
  CircleFit out;
  if (pts.empty()) return out;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= double(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread = std::max(spread, (p - mean).norm());
  if (pts.size() < 3 || spread < 1e-12) {
    out.center = mean;
    out.radius = spread;
    return out;
  }

  // Kasa: x^2 + y^2 = a x + b y + c in centered coordinates.
  const Eigen::Index n = Eigen::Index(pts.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d p = pts[std::size_t(i)] - mean;
    a(i, 0) = p.x();
    a(i, 1) = p.y();
    a(i, 2) = 1.0;
    b(i) = p.squaredNorm();
  }
  const Eigen::Vector3d sol =
      a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
  Eigen::Vector2d c(0.5 * sol(0), 0.5 * sol(1));
  double r = std::sqrt(std::max(0.0, sol(2) + c.squaredNorm()));
  if (!std::isfinite(r)) {
    c.setZero();
    r = spread;
  }

  // Geometric refinement on sum of squared radial distances.
  auto cost = [&](const Eigen::Vector2d& cc, double rr) {
    double s = 0.0;
    for (const auto& p : pts) {
      const double d = (p - mean - cc).norm() - rr;
      s += d * d;
    }
    return s;
  };
  double lambda = 1e-3;
  double current = cost(c, r);
  for (int it = 0; it < 100; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (const auto& p : pts) {
      const Eigen::Vector2d d = p - mean - c;
      const double dn = d.norm();
      if (dn < 1e-15) continue;
      const Eigen::Vector3d j(-d.x() / dn, -d.y() / dn, -1.0);
      const double res = dn - r;
      jtj += j * j.transpose();
      jtr += j * res;
    }
    bool improved = false;
    while (lambda < 1e12) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() *= (1.0 + lambda);
      const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
      const Eigen::Vector2d c2 = c + step.head<2>();
      const double r2 = r + step(2);
      const double next = cost(c2, r2);
      if (std::isfinite(next) && next <= current) {
        const double rel = (current - next) / std::max(current, 1e-300);
        c = c2;
        r = r2;
        current = next;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = rel > 1e-14;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  out.center = c + mean;
  out.radius = std::abs(r);
  return out;
}

ModelHypothesis fit_rotational(std::span<const RelativeTransform> deltas,
                               const NoiseModel& noise,
                               const ParamCounts& counts) {
  if (deltas.size() < 3)
    throw DegenerateMotion("rotational fit needs at least 3 deltas");
  const Quat q1 = deltas.front().delta.quat();

  std::vector<Vec3> rvecs;
  rvecs.reserve(deltas.size());
  double max_angle = 0.0;
  Vec3 ref = Vec3::Zero();
  for (const auto& d : deltas) {
    const Vec3 rv = rotation_vector(d.delta.quat() * q1.conjugate());
    rvecs.push_back(rv);
    if (rv.norm() > max_angle) {
      max_angle = rv.norm();
      ref = rv;
    }
  }
  if (max_angle <= 1e-6)
    throw DegenerateMotion("relative rotation never exceeds 1e-6 rad");

  // Angle-weighted mean of the per-frame rotation axes (sign-aligned).
  Vec3 sum = Vec3::Zero();
  for (const auto& rv : rvecs) sum += rv.dot(ref) >= 0.0 ? rv : Vec3(-rv);
  RotationalParams p;
  p.axis = canonical_sign(sum.normalized());

  const auto [u, v] = plane_basis(p.axis);
  std::vector<Eigen::Vector2d> planar;
  planar.reserve(deltas.size());
  double height = 0.0;
  for (const auto& d : deltas) {
    const Vec3& t = d.delta.trans();
    planar.emplace_back(u.dot(t), v.dot(t));
    height += p.axis.dot(t);
  }
  height /= double(deltas.size());
  const CircleFit circle = fit_circle(planar);
  p.center = circle.center.x() * u + circle.center.y() * v + height * p.axis;
  p.radius = circle.radius;

  std::vector<double> q(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i)
    q[i] = twist_angle(deltas[i].delta.quat() * q1.conjugate(), p.axis);
  unwrap(q);

  std::vector<Quat> phase_q;
  Vec3 phase_t = Vec3::Zero();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const Pose undo = Pose::about_axis(p.center, p.axis, q[i]).inverse();
    const Pose ph = compose(undo, deltas[i].delta);
    phase_q.push_back(ph.quat());
    phase_t += ph.trans();
  }
  p.phase = Pose(chordal_mean(phase_q), phase_t / double(deltas.size()));
  const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
  p.q_min = *lo;
  p.q_max = *hi;

  double ll = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const Vec3& t = deltas[i].delta.trans();
    const double radial = (planar[i] - circle.center).norm() - p.radius;
    const double axial = p.axis.dot(t) - height;
    ll += log_normal(std::hypot(radial, axial), noise.sigma_pos);
    const Pose model = predict(p, q[i]);
    ll += log_normal(rotation_distance(deltas[i].delta.quat(), model.quat()),
                     noise.sigma_rot);
  }
  return finish(ModelType::Rotational, p, ll, deltas.size(), counts);
}

std::vector<double> configurations(const ModelParams& params,
                                   std::span<const RelativeTransform> deltas) {
  std::vector<double> q(deltas.size(), 0.0);
  if (auto* pr = std::get_if<PrismaticParams>(&params)) {
    for (std::size_t i = 0; i < deltas.size(); ++i)
      q[i] = pr->axis.dot(deltas[i].delta.trans() - pr->origin.trans());
  } else if (auto* ro = std::get_if<RotationalParams>(&params)) {
    const Quat inv_phase = ro->phase.quat().conjugate();
    for (std::size_t i = 0; i < deltas.size(); ++i)
      q[i] = twist_angle(deltas[i].delta.quat() * inv_phase, ro->axis);
    unwrap(q);
  }
  return q;
}

std::vector<ModelHypothesis> fit_all(std::span<const RelativeTransform> deltas,
                                     const NoiseModel& noise,
                                     const ParamCounts& counts) {
  if (deltas.empty()) throw InvalidCount("model fitting needs at least one delta");
  std::vector<ModelHypothesis> out;
  out.push_back(fit_rigid(deltas, noise, counts));
  auto attempt = [&](ModelType type, auto&& fit) {
    try {
      out.push_back(fit(deltas, noise, counts));
    } catch (const DegenerateMotion& e) {
      ModelHypothesis h;
      h.type = type;
      if (type == ModelType::Prismatic)
        h.params = PrismaticParams{};
      else
        h.params = RotationalParams{};
      h.log_lik = -std::numeric_limits<double>::infinity();
      h.k = counts(type);
      h.n = deltas.size();
      h.bic = bic(h.log_lik, h.k, h.n);
      h.degenerate = true;
      h.note = e.what();
      out.push_back(std::move(h));
    }
  };
  attempt(ModelType::Prismatic, fit_prismatic);
  attempt(ModelType::Rotational, fit_rotational);
  std::stable_sort(out.begin(), out.end(),
                   [](const ModelHypothesis& a, const ModelHypothesis& b) {
                     return a.bic < b.bic;
                   });
  return out;
}

}  // namespace artic
