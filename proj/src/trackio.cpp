#include "artic/trackio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "artic/error.hpp"

namespace artic {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + std::size_t(std::count(text.begin(), text.begin() + long(offset), '\n'));
}

const Json& field(const Json& j, const std::string& name) {
  if (!j.is_object()) throw SchemaError("expected an object holding '" + name + "'");
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError("missing field '" + name + "'");
  return *it;
}

int int_field(const Json& j, const std::string& name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw SchemaError("field '" + name + "' must be an integer");
  return v.get<int>();
}

double number(const Json& v, const std::string& name) {
  if (!v.is_number()) throw SchemaError("field '" + name + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError("field '" + name + "' is not finite");
  return d;
}

int parse_id(const std::string& key, const std::string& what) {
  std::size_t used = 0;
  int id = 0;
  try {
    id = std::stoi(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || key.empty())
    throw SchemaError(what + " key '" + key + "' is not an integer");
  return id;
}

FeatureTrack track_from_json(const Json& j) {
  FeatureTrack tr;
  tr.track_id = int_field(j, "track_id");
  const Json& frames = field(j, "frames");
  if (!frames.is_array()) throw SchemaError("field 'frames' must be an array");
  for (const auto& f : frames) {
    TrackFrame fr;
    fr.t = int_field(f, "t");
    fr.point = vec_from_json(field(f, "p"), "p");
    if (f.contains("n")) {
      const Vec3 n = vec_from_json(f["n"], "n");
      if (std::abs(n.norm() - 1.0) > 1e-6)
        throw SchemaError("field 'n' of track " + std::to_string(tr.track_id) +
                          " is not unit-norm");
      fr.normal = n;
    }
    if (!tr.frames.empty() && fr.t <= tr.frames.back().t)
      throw SchemaError("field 't' of track " + std::to_string(tr.track_id) +
                        " is not strictly increasing");
    tr.frames.push_back(fr);
  }
  return tr;
}

Json track_to_json(const FeatureTrack& tr) {
  Json frames = Json::array();
  for (const auto& f : tr.frames) {
    Json jf = {{"t", f.t}, {"p", vec_to_json(f.point)}};
    if (f.normal) jf["n"] = vec_to_json(*f.normal);
    frames.push_back(std::move(jf));
  }
  return {{"track_id", tr.track_id}, {"frames", std::move(frames)}};
}

Json pose_fields(const Pose& p, const std::string& qkey, const std::string& pkey) {
  return {{qkey, quat_to_json(p.quat())}, {pkey, vec_to_json(p.trans())}};
}

Pose pose_from_fields(const Json& j, const std::string& qkey, const std::string& pkey) {
  return {quat_from_json(field(j, qkey), qkey), vec_from_json(field(j, pkey), pkey)};
}

Json range_to_json(double lo, double hi) { return Json::array({lo, hi}); }

std::pair<double, double> range_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("field 'range' must be [min, max]");
  const double lo = number(j[0], "range"), hi = number(j[1], "range");
  if (lo > hi) throw SchemaError("field 'range' has min > max");
  return {lo, hi};
}

Vec3 unit_axis(const Json& j) {
  const Vec3 a = vec_from_json(j, "axis");
  if (std::abs(a.norm() - 1.0) > 1e-6) throw SchemaError("field 'axis' is not unit-norm");
  return std::abs(a.squaredNorm() - 1.0) > 1e-14 ? Vec3(a.normalized()) : a;
}

}  // namespace

Json parse_json_document(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.what(), line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

void check_format_version(const Json& j) {
  if (!j.is_object()) throw SchemaError("top-level value must be an object");
  auto it = j.find("format_version");
  if (it == j.end()) return;
  if (!it->is_number_integer() || it->get<int>() != kFormatVersion)
    throw SchemaError("field 'format_version' must be " + std::to_string(kFormatVersion));
}

Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 3)
    throw SchemaError("field '" + name + "' must be a 3-element array");
  return {number(j[0], name), number(j[1], name), number(j[2], name)};
}

Json quat_to_json(const Quat& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

Quat quat_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 4)
    throw SchemaError("field '" + name + "' must be [w, x, y, z]");
  Quat q(number(j[0], name), number(j[1], name), number(j[2], name), number(j[3], name));
  if (std::abs(q.norm() - 1.0) > 1e-3)
    throw SchemaError("field '" + name + "' is not a unit quaternion");
  return q;
}

// ---------------------------------------------------------------- tracks

std::vector<FeatureTrack> parse_tracks(const std::string& text) {
  std::vector<FeatureTrack> out;
  std::set<int> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(e.what(), lineno);
    }
    FeatureTrack tr;
    try {
      tr = track_from_json(j);
    } catch (const SchemaError& e) {
      throw SchemaError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
    if (!seen.insert(tr.track_id).second)
      throw SchemaError("field 'track_id' duplicates " + std::to_string(tr.track_id) +
                        " (line " + std::to_string(lineno) + ")");
    out.push_back(std::move(tr));
  }
  return out;
}

std::string dump_tracks(const std::vector<FeatureTrack>& tracks) {
  std::string out;
  for (const auto& tr : tracks) {
    out += track_to_json(tr).dump();
    out += '\n';
  }
  return out;
}

std::vector<FeatureTrack> load_tracks(const std::filesystem::path& path) {
  return parse_tracks(read_file(path));
}

void save_tracks(const std::vector<FeatureTrack>& tracks,
                 const std::filesystem::path& path) {
  write_file(path, dump_tracks(tracks));
}

// ----------------------------------------------------------------- poses

std::vector<PartTrajectory> parse_pose_trajectories(const std::string& text) {
  const Json j = parse_json_document(text);
  check_format_version(j);
  const Json& parts = field(j, "parts");
  if (!parts.is_array()) throw SchemaError("field 'parts' must be an array");
  std::vector<PartTrajectory> out;
  std::set<int> seen;
  for (const auto& jp : parts) {
    PartTrajectory pt;
    pt.part_id = int_field(jp, "part_id");
    if (!seen.insert(pt.part_id).second)
      throw SchemaError("field 'part_id' duplicates " + std::to_string(pt.part_id));
    const Json& poses = field(jp, "poses");
    if (!poses.is_array()) throw SchemaError("field 'poses' must be an array");
    for (const auto& jpose : poses) {
      TimedPose tp{int_field(jpose, "t"), pose_from_fields(jpose, "q", "p")};
      if (!pt.poses.empty() && tp.t <= pt.poses.back().t)
        throw SchemaError("field 't' of part " + std::to_string(pt.part_id) +
                          " is not strictly increasing");
      pt.poses.push_back(tp);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

std::string dump_pose_trajectories(const std::vector<PartTrajectory>& parts) {
  Json jparts = Json::array();
  for (const auto& pt : parts) {
    Json poses = Json::array();
    for (const auto& tp : pt.poses) {
      Json jp = pose_fields(tp.pose, "q", "p");
      jp["t"] = tp.t;
      poses.push_back(std::move(jp));
    }
    jparts.push_back({{"part_id", pt.part_id}, {"poses", std::move(poses)}});
  }
  Json j = {{"format_version", kFormatVersion}, {"parts", std::move(jparts)}};
  return j.dump(1) + "\n";
}

std::vector<PartTrajectory> load_pose_trajectories(const std::filesystem::path& path) {
  return parse_pose_trajectories(read_file(path));
}

void save_pose_trajectories(const std::vector<PartTrajectory>& parts,
                            const std::filesystem::path& path) {
  write_file(path, dump_pose_trajectories(parts));
}

// ----------------------------------------------------------------- graphs

Json params_to_json(const ModelParams& p) {
  if (auto* r = std::get_if<RigidParams>(&p)) return pose_fields(r->fixed, "q", "p");
  if (auto* pr = std::get_if<PrismaticParams>(&p)) {
    Json j = pose_fields(pr->origin, "origin_q", "origin_p");
    j["axis"] = vec_to_json(pr->axis);
    j["range"] = range_to_json(pr->q_min, pr->q_max);
    return j;
  }
  const auto& ro = std::get<RotationalParams>(p);
  Json j = pose_fields(ro.phase, "phase_q", "phase_p");
  j["center"] = vec_to_json(ro.center);
  j["axis"] = vec_to_json(ro.axis);
  j["radius"] = ro.radius;
  j["range"] = range_to_json(ro.q_min, ro.q_max);
  return j;
}

ModelParams params_from_json(ModelType type, const Json& j) {
  switch (type) {
    case ModelType::Rigid:
      return RigidParams{pose_from_fields(j, "q", "p")};
    case ModelType::Prismatic: {
      PrismaticParams p;
      p.origin = pose_from_fields(j, "origin_q", "origin_p");
      p.axis = unit_axis(field(j, "axis"));
      std::tie(p.q_min, p.q_max) = range_from_json(field(j, "range"));
      return p;
    }
    case ModelType::Rotational: {
      RotationalParams p;
      const Quat pq = quat_from_json(field(j, "phase_q"), "phase_q");
      const Vec3 pp = j.contains("phase_p") ? vec_from_json(j["phase_p"], "phase_p")
                                            : Vec3::Zero();
      p.phase = Pose(pq, pp);
      p.center = vec_from_json(field(j, "center"), "center");
      p.axis = unit_axis(field(j, "axis"));
      p.radius = number(field(j, "radius"), "radius");
      if (p.radius < 0.0) throw SchemaError("field 'radius' is negative");
      std::tie(p.q_min, p.q_max) = range_from_json(field(j, "range"));
      return p;
    }
  }
  throw SchemaError("unknown model type");
}

Json graph_to_json(const KinematicGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"i", e.i},
                     {"j", e.j},
                     {"model", to_string(e.type())},
                     {"params", params_to_json(e.params)}});
  Json j = {{"format_version", kFormatVersion}, {"parts", g.parts}, {"edges", std::move(edges)}};
  if (!g.labels.empty()) {
    Json labels = Json::object();
    for (const auto& [id, type] : g.labels) labels[std::to_string(id)] = type;
    j["labels"] = std::move(labels);
  }
  if (!g.track_parts.empty()) {
    Json tp = Json::object();
    for (const auto& [tid, part] : g.track_parts) tp[std::to_string(tid)] = part;
    j["track_parts"] = std::move(tp);
  }
  return j;
}

KinematicGraph graph_from_json(const Json& j) {
  check_format_version(j);
  KinematicGraph g;
  const Json& parts = field(j, "parts");
  if (!parts.is_array()) throw SchemaError("field 'parts' must be an array");
  for (const auto& p : parts) {
    if (!p.is_number_integer()) throw SchemaError("field 'parts' must hold integers");
    g.parts.push_back(p.get<int>());
  }
  const Json& edges = field(j, "edges");
  if (!edges.is_array()) throw SchemaError("field 'edges' must be an array");
  for (const auto& je : edges) {
    KinematicEdge e;
    e.i = int_field(je, "i");
    e.j = int_field(je, "j");
    const Json& model = field(je, "model");
    if (!model.is_string()) throw SchemaError("field 'model' must be a string");
    e.params = params_from_json(model_type_from_string(model.get<std::string>()),
                                field(je, "params"));
    g.edges.push_back(std::move(e));
  }
  if (j.contains("labels")) {
    for (const auto& [k, v] : j["labels"].items()) {
      if (!v.is_string()) throw SchemaError("field 'labels' values must be strings");
      g.labels[parse_id(k, "labels")] = v.get<std::string>();
    }
  }
  if (j.contains("track_parts")) {
    for (const auto& [k, v] : j["track_parts"].items()) {
      if (!v.is_number_integer()) throw SchemaError("field 'track_parts' values must be integers");
      g.track_parts[parse_id(k, "track_parts")] = v.get<int>();
    }
  }
  if (!g.is_spanning_tree())
    throw SchemaError("field 'edges' does not form a spanning tree over 'parts'");
  return g;
}

std::string graph_to_dot(const KinematicGraph& g) {
  std::ostringstream out;
  out << "graph kinematic {\n";
  for (int p : g.parts) {
    out << "  p" << p << " [label=\"" << p;
    if (auto it = g.labels.find(p); it != g.labels.end()) out << " (" << it->second << ")";
    out << "\"];\n";
  }
  for (const auto& e : g.edges)
    out << "  p" << e.i << " -- p" << e.j << " [label=\"" << to_string(e.type()) << "\"];\n";
  out << "}\n";
  return out.str();
}

KinematicGraph load_graph(const std::filesystem::path& path) {
  return graph_from_json(parse_json_document(read_file(path)));
}

void save_graph(const KinematicGraph& g, const std::filesystem::path& path,
                GraphFormat format) {
  write_file(path, format == GraphFormat::Dot ? graph_to_dot(g)
                                              : graph_to_json(g).dump(1) + "\n");
}

// ----------------------------------------------------------------- labels

PartLabelMap labels_from_json(const Json& j) {
  check_format_version(j);
  const Json& m = field(j, "cluster_labels");
  if (!m.is_object()) throw SchemaError("field 'cluster_labels' must be an object");
  PartLabelMap out;
  for (const auto& [k, v] : m.items()) {
    if (!v.is_string()) throw SchemaError("field 'cluster_labels' values must be strings");
    out[parse_id(k, "cluster_labels")] = v.get<std::string>();
  }
  return out;
}

Json labels_to_json(const PartLabelMap& labels) {
  Json m = Json::object();
  for (const auto& [id, type] : labels) m[std::to_string(id)] = type;
  return {{"format_version", kFormatVersion}, {"cluster_labels", std::move(m)}};
}

PartLabelMap load_labels(const std::filesystem::path& path) {
  return labels_from_json(parse_json_document(read_file(path)));
}

void save_labels(const PartLabelMap& labels, const std::filesystem::path& path) {
  write_file(path, labels_to_json(labels).dump(1) + "\n");
}

}  // namespace artic
