#include "artic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "artic/error.hpp"

namespace artic {

std::optional<double> DemoScore::mean_param_error() const {
  if (param_errors.empty()) return std::nullopt;
  double s = 0.0;
  for (double e : param_errors) s += e;
  return s / double(param_errors.size());
}

double param_error(const Vec3& a, const Vec3& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw ZeroVector("axis has zero length");
  // atan2 stays accurate near 0 and 180 degrees, unlike acos.
  const double e = std::atan2(a.cross(b).norm(), a.dot(b)) * 180.0 / std::numbers::pi;
  return std::min(e, 180.0 - e);
}

namespace {

// Hungarian method on a square cost matrix; returns column of each row.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = int(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(std::size_t(n + 1)), v(std::size_t(n + 1));
  std::vector<int> p(std::size_t(n + 1)), way(std::size_t(n + 1));
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(std::size_t(n + 1), inf);
    std::vector<bool> used(std::size_t(n + 1), false);
    do {
      used[std::size_t(j0)] = true;
      const int i0 = p[std::size_t(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[std::size_t(j)]) continue;
        const double cur = cost[std::size_t(i0 - 1)][std::size_t(j - 1)] - u[std::size_t(i0)] -
                           v[std::size_t(j)];
        if (cur < minv[std::size_t(j)]) {
          minv[std::size_t(j)] = cur;
          way[std::size_t(j)] = j0;
        }
        if (minv[std::size_t(j)] < delta) {
          delta = minv[std::size_t(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[std::size_t(j)]) {
          u[std::size_t(p[std::size_t(j)])] += delta;
          v[std::size_t(j)] -= delta;
        } else {
          minv[std::size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[std::size_t(j0)] != 0);
    do {
      const int j1 = way[std::size_t(j0)];
      p[std::size_t(j0)] = p[std::size_t(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col(std::size_t(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[std::size_t(j)] > 0) col[std::size_t(p[std::size_t(j)] - 1)] = j - 1;
  return col;
}

void check_injective(const std::map<int, int>& m) {
  std::set<int> seen;
  for (const auto& [e, t] : m)
    if (!seen.insert(t).second)
      throw UnmatchablePartition("two estimated parts map to truth part " + std::to_string(t));
}

}  // namespace

std::map<int, int> match_parts(const KinematicGraph& est, const GroundTruthGraph& truth) {
  const bool est_tracks = !est.track_parts.empty();
  const bool truth_tracks = !truth.track_parts.empty();
  std::map<int, int> out;
  if (est_tracks && !truth_tracks)
    throw UnmatchablePartition(
        "estimate carries track assignments but truth does not; supply an explicit part map");

  if (!est_tracks) {
    for (int p : est.parts)
      if (truth.has_part(p)) out[p] = p;
    if (out.empty() && !est.parts.empty() && !truth.parts.empty())
      throw UnmatchablePartition("estimate and truth share no part id");
    return out;
  }

  const std::size_t rows = est.parts.size(), cols = truth.parts.size();
  const std::size_t n = std::max(rows, cols);
  std::map<int, std::size_t> ri, ci;
  for (std::size_t k = 0; k < rows; ++k) ri[est.parts[k]] = k;
  for (std::size_t k = 0; k < cols; ++k) ci[truth.parts[k]] = k;
  std::vector<std::vector<double>> overlap(n, std::vector<double>(n, 0.0));
  for (const auto& [tid, ep] : est.track_parts) {
    auto tp = truth.track_parts.find(tid);
    if (tp == truth.track_parts.end()) continue;
    auto a = ri.find(ep);
    auto b = ci.find(tp->second);
    if (a == ri.end() || b == ci.end()) continue;
    overlap[a->second][b->second] += 1.0;
  }
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) cost[a][b] = -overlap[a][b];
  const auto col = min_cost_assignment(cost);
  for (std::size_t a = 0; a < rows; ++a) {
    const int b = col[a];
    if (b >= 0 && std::size_t(b) < cols && overlap[a][std::size_t(b)] > 0.0)
      out[est.parts[a]] = truth.parts[std::size_t(b)];
  }
  return out;
}

namespace {

// Axis of a joint expressed in the frame of edge endpoint `j` instead of `i`.
Vec3 axis_in_child_frame(const ModelParams& p, const Vec3& axis) {
  if (auto* pr = std::get_if<PrismaticParams>(&p)) return pr->origin.rot().transpose() * axis;
  if (auto* ro = std::get_if<RotationalParams>(&p)) return ro->phase.rot().transpose() * axis;
  return axis;
}

}  // namespace

DemoScore score_demo(const KinematicGraph& est, const GroundTruthGraph& truth,
                     const std::optional<std::map<int, int>>& part_map) {
  std::map<int, int> f;
  if (part_map) {
    f = *part_map;
    check_injective(f);
    for (const auto& [e, t] : f)
      if (!est.has_part(e) || !truth.has_part(t))
        throw UnmatchablePartition("part map refers to unknown part " + std::to_string(e) +
                                   " -> " + std::to_string(t));
  } else {
    f = match_parts(est, truth);
  }

  DemoScore s;
  s.n_star = int(truth.parts.size());
  s.n_v = int(est.parts.size());
  s.sv_hit = s.n_v == s.n_star;
  s.soft_total = int(truth.edges.size());

  for (const auto& e : est.edges) {
    auto fi = f.find(e.i), fj = f.find(e.j);
    if (fi == f.end() || fj == f.end()) continue;
    const KinematicEdge* te = truth.find_edge(fi->second, fj->second);
    if (!te || te->type() != e.type()) continue;
    ++s.soft_hits;
    auto ea = joint_axis(e.params);
    auto ta = joint_axis(te->params);
    if (!ea || !ta) continue;
    const bool reversed = te->i != fi->second;
    const Vec3 a = reversed ? axis_in_child_frame(e.params, *ea) : *ea;
    s.param_errors.push_back(param_error(a, *ta));
  }
  s.hard_hit = s.sv_hit && f.size() == truth.parts.size() &&
               est.edges.size() == truth.edges.size() && s.soft_hits == s.soft_total;
  return s;
}

ScoreTable aggregate(const std::vector<DemoScore>& scores) {
  if (scores.empty()) throw InvalidCount("aggregate needs at least one demonstration");
  ScoreTable t;
  t.n_demos = int(scores.size());
  t.s_v.den = t.s_h.den = t.n_demos;
  double err_sum = 0.0;
  int err_n = 0;
  for (const auto& s : scores) {
    t.s_v.num += s.sv_hit;
    t.s_h.num += s.hard_hit;
    t.s_s.num += s.soft_hits;
    t.s_s.den += s.soft_total;
    if (auto m = s.mean_param_error()) {
      err_sum += *m;
      ++err_n;
    }
  }
  if (err_n > 0) t.mean_param_error = err_sum / err_n;
  return t;
}

std::map<std::string, ScoreTable> aggregate_by_class(
    const std::map<std::string, std::vector<DemoScore>>& scores) {
  std::map<std::string, ScoreTable> out;
  std::vector<DemoScore> all;
  for (const auto& [cls, list] : scores) {
    out[cls] = aggregate(list);
    all.insert(all.end(), list.begin(), list.end());
  }
  out["all"] = aggregate(all);
  return out;
}

Json demo_score_to_json(const DemoScore& s) {
  Json j = {{"n_star", s.n_star},         {"n_v", s.n_v},
            {"sv_hit", s.sv_hit},         {"hard_hit", s.hard_hit},
            {"soft_hits", s.soft_hits},   {"soft_total", s.soft_total},
            {"param_errors_deg", s.param_errors}};
  if (auto m = s.mean_param_error()) j["mean_param_error_deg"] = *m;
  return j;
}

namespace {

Json fraction_to_json(const Fraction& f) {
  return {{"num", f.num}, {"den", f.den}, {"value", f.value()}};
}

std::string fraction_text(const Fraction& f) {
  return std::to_string(f.num) + "/" + std::to_string(f.den);
}

}  // namespace

Json score_table_to_json(const ScoreTable& t) {
  Json j = {{"n_demos", t.n_demos},
            {"S_v", fraction_to_json(t.s_v)},
            {"S_h", fraction_to_json(t.s_h)},
            {"S_s", fraction_to_json(t.s_s)}};
  j["mean_param_error_deg"] = t.mean_param_error ? Json(*t.mean_param_error) : Json(nullptr);
  return j;
}

std::string format_tables(const std::map<std::string, ScoreTable>& tables) {
  std::size_t w = 5;
  for (const auto& [name, t] : tables) w = std::max(w, name.size());
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %6s %9s %9s %9s %9s\n", int(w), "class", "demos", "S_v",
                "S_h", "S_s", "e_param");
  os << buf;
  for (const auto& [name, t] : tables) {
    const std::string e =
        t.mean_param_error ? std::to_string(*t.mean_param_error).substr(0, 6) : "-";
    std::snprintf(buf, sizeof buf, "%-*s %6d %9s %9s %9s %9s\n", int(w), name.c_str(),
                  t.n_demos, fraction_text(t.s_v).c_str(), fraction_text(t.s_h).c_str(),
                  fraction_text(t.s_s).c_str(), e.c_str());
    os << buf;
  }
  return os.str();
}

std::map<int, int> part_map_from_json(const Json& j) {
  check_format_version(j);
  if (!j.is_object() || !j.contains("part_map") || !j["part_map"].is_object())
    throw SchemaError("field 'part_map' must be an object");
  std::map<int, int> m;
  for (const auto& [k, v] : j["part_map"].items()) {
    if (!v.is_number_integer()) throw SchemaError("field 'part_map' values must be integers");
    try {
      std::size_t used = 0;
      const int key = std::stoi(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
      m[key] = v.get<int>();
    } catch (const std::logic_error&) {
      throw SchemaError("field 'part_map' key '" + k + "' is not an integer");
    }
  }
  check_injective(m);
  return m;
}

}  // namespace artic
