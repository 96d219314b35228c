#include "artic/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "artic/error.hpp"

namespace artic {

EdgeCandidate fuse_hypotheses(int i, int j, std::span<const ModelHypothesis> vision,
                              const std::array<double, 3>& lang_log_lik,
                              std::size_t n_utterances) {
  EdgeCandidate e;
  e.i = i;
  e.j = j;
  e.n_utterances = n_utterances;
  std::array<bool, 3> seen{};
  for (const auto& h : vision) {
    const auto idx = std::size_t(h.type);
    seen[idx] = true;
    FusedHypothesis& f = e.hypotheses[idx];
    f.vision = h;
    f.lang_log_lik = lang_log_lik[idx];
    f.n = h.n + n_utterances;
    f.bic = bic(h.log_lik + f.lang_log_lik, h.k, f.n);
    e.n_deltas = h.n;
  }
  if (!(seen[0] && seen[1] && seen[2]))
    throw InvalidCount("edge fusion needs one hypothesis per model type");

  e.selected = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (e.hypotheses[k].bic < e.hypotheses[e.selected].bic) e.selected = k;
  e.cost = e.hypotheses[e.selected].bic;
  return e;
}

EdgeCandidate fuse_edge(int i, int j, std::span<const RelativeTransform> deltas,
                        std::span<const LanguageObservation> lang,
                        const std::optional<std::string>& i_type,
                        const std::optional<std::string>& j_type, const NoiseModel& noise,
                        const ParamCounts& counts) {
  const auto vision = fit_all(deltas, noise, counts);
  std::array<double, 3> ll{};
  std::size_t n_utt = 0;
  if (i_type && j_type) {
    for (const auto& obs : lang) {
      if (!mentions(obs, *i_type, *j_type)) continue;
      ++n_utt;
      for (auto m : kModelTypes) ll[std::size_t(m)] += language_log_lik(obs, i_type, j_type, m);
    }
  }
  return fuse_hypotheses(i, j, vision, ll, n_utt);
}

KinematicGraph select_structure(std::span<const EdgeCandidate> candidates,
                                std::span<const int> parts) {
  KinematicGraph g;
  g.parts.assign(parts.begin(), parts.end());
  std::map<int, int> index;
  for (std::size_t k = 0; k < parts.size(); ++k) index[parts[k]] = int(k);

  std::vector<const EdgeCandidate*> order;
  for (const auto& c : candidates)
    if (std::isfinite(c.cost) && index.count(c.i) && index.count(c.j) && c.i != c.j)
      order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const EdgeCandidate* a, const EdgeCandidate* b) {
    const int ai = std::min(a->i, a->j), aj = std::max(a->i, a->j);
    const int bi = std::min(b->i, b->j), bj = std::max(b->i, b->j);
    return std::tie(a->cost, ai, aj) < std::tie(b->cost, bi, bj);
  });

  std::vector<int> parent(parts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[std::size_t(x)] != x) x = parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
    return x;
  };
  for (const EdgeCandidate* c : order) {
    const int a = find(index[c->i]), b = find(index[c->j]);
    if (a == b) continue;
    parent[std::size_t(a)] = b;
    g.edges.push_back({c->i, c->j, c->best().vision.params});
    if (g.edges.size() + 1 == parts.size()) break;
  }

  if (!parts.empty() && g.edges.size() + 1 != parts.size()) {
    const int root = find(0);
    std::string missing;
    for (std::size_t k = 0; k < parts.size(); ++k)
      if (find(int(k)) != root) missing += (missing.empty() ? "" : ", ") + std::to_string(parts[k]);
    throw DisconnectedGraph("no usable edge reaches part(s) " + missing);
  }
  return g;
}

double tree_cost(const KinematicGraph& g, std::span<const EdgeCandidate> candidates) {
  double total = 0.0;
  for (const auto& e : g.edges)
    for (const auto& c : candidates)
      if ((c.i == e.i && c.j == e.j) || (c.i == e.j && c.j == e.i)) {
        total += c.cost;
        break;
      }
  return total;
}

// -------------------------------------------------------------- pipeline

std::vector<PartTrajectory> estimate_parts(std::span<const FeatureTrack> tracks,
                                           const InferConfig& cfg,
                                           ClusterAssignment* assignment) {
  ClusterAssignment clusters;
  try {
    clusters = cluster_tracks(tracks, cfg.segmentation);
  } catch (const Error& e) {
    throw StageError("segmentation", e);
  }
  const auto members = clusters.members();
  std::map<int, const FeatureTrack*> by_id;
  for (const auto& tr : tracks) by_id[tr.track_id] = &tr;

  const long n = long(members.size());
  std::vector<PartTrajectory> out(members.size());
  std::vector<std::optional<std::string>> failure(members.size());
  std::vector<std::optional<StageError>> errors(members.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long c = 0; c < n; ++c) {
    std::vector<FeatureTrack> own;
    for (int tid : members[std::size_t(c)]) own.push_back(*by_id.at(tid));
    try {
      ClusterTrajectory traj = estimate_trajectory(own, cfg.posegraph, int(c));
      if (cfg.refine) traj = refine_trajectory(traj, own, cfg.posegraph);
      out[std::size_t(c)] = anchor_trajectory(traj, own);
    } catch (const Error& e) {
      errors[std::size_t(c)].emplace("posegraph", e);
    }
  }
  for (auto& e : errors)
    if (e) throw *e;
  if (assignment) *assignment = std::move(clusters);
  return out;
}

namespace {

std::optional<std::string> label_of(const PartLabelMap& labels, int part) {
  auto it = labels.find(part);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> part_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  return pairs;
}

std::optional<EdgeCandidate> fit_pair(const PartTrajectory& a, const PartTrajectory& b,
                                      std::span<const LanguageObservation> lang,
                                      const PartLabelMap& labels, const InferConfig& cfg) {
  std::vector<RelativeTransform> deltas;
  try {
    deltas = relative_transform_sequence(a.poses, b.poses);
  } catch (const InsufficientOverlap&) {
    return std::nullopt;
  }
  return fuse_edge(a.part_id, b.part_id, deltas, lang, label_of(labels, a.part_id),
                   label_of(labels, b.part_id), cfg.noise, cfg.counts);
}

std::vector<PartTrajectory> sorted_parts(std::span<const PartTrajectory> parts) {
  std::vector<PartTrajectory> s(parts.begin(), parts.end());
  std::sort(s.begin(), s.end(),
            [](const auto& x, const auto& y) { return x.part_id < y.part_id; });
  return s;
}

}  // namespace

std::vector<EdgeCandidate> fit_edges_serial(std::span<const PartTrajectory> parts,
                                            std::span<const LanguageObservation> lang,
                                            const PartLabelMap& labels,
                                            const InferConfig& cfg) {
  const auto sorted = sorted_parts(parts);
  std::vector<EdgeCandidate> out;
  for (const auto& [a, b] : part_pairs(sorted.size()))
    if (auto c = fit_pair(sorted[a], sorted[b], lang, labels, cfg)) out.push_back(std::move(*c));
  return out;
}

std::vector<EdgeCandidate> fit_edges(std::span<const PartTrajectory> parts,
                                     std::span<const LanguageObservation> lang,
                                     const PartLabelMap& labels, const InferConfig& cfg) {
  const auto sorted = sorted_parts(parts);
  const auto pairs = part_pairs(sorted.size());
  std::vector<std::optional<EdgeCandidate>> slots(pairs.size());
  const long n = long(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long k = 0; k < n; ++k) {
    const auto [a, b] = pairs[std::size_t(k)];
    slots[std::size_t(k)] = fit_pair(sorted[a], sorted[b], lang, labels, cfg);
  }
  std::vector<EdgeCandidate> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

InferResult infer(const InferInput& input, const InferConfig& cfg) {
  if (input.tracks.has_value() == input.poses.has_value())
    throw ConfigError("infer needs exactly one of tracks or poses");

  InferResult result;
  ClusterAssignment assignment;
  if (input.tracks) {
    result.part_trajectories = estimate_parts(*input.tracks, cfg, &assignment);
    if (result.part_trajectories.empty())
      throw StageError("segmentation",
                       DegenerateGeometry("no cluster found among " +
                                          std::to_string(input.tracks->size()) +
                                          " track(s); every track is noise"));
  } else {
    result.part_trajectories = sorted_parts(*input.poses);
  }
  result.n_clusters = int(result.part_trajectories.size());

  std::vector<int> parts;
  for (const auto& p : result.part_trajectories) parts.push_back(p.part_id);

  std::vector<LanguageObservation> lang;
  if (input.grounding && !input.utterances.empty()) {
    const auto& space = input.grounding->space();
    for (const auto& [part, type] : input.labels)
      if (!space.objects.count(type))
        throw StageError("grounding", UnknownSymbol("label '" + type + "' of part " +
                                                    std::to_string(part) +
                                                    " is not a known object type"));
    std::vector<Symbol> candidates;
    std::set<Symbol> unique;
    for (std::size_t a = 0; a < parts.size(); ++a)
      for (std::size_t b = a + 1; b < parts.size(); ++b) {
        auto ta = label_of(input.labels, parts[a]), tb = label_of(input.labels, parts[b]);
        if (!ta || !tb) continue;
        for (const auto& s : affordance_candidates(*ta, *tb))
          if (unique.insert(s).second) candidates.push_back(s);
      }
    try {
      for (const auto& u : input.utterances) lang.push_back(evaluate(*input.grounding, u, candidates));
    } catch (const Error& e) {
      throw StageError("grounding", e);
    }
  }
  for (int p : parts)
    if (!input.labels.count(p)) result.unlabeled_parts.push_back(p);

  try {
    result.candidates = fit_edges(result.part_trajectories, lang, input.labels, cfg);
  } catch (const Error& e) {
    throw StageError("kinfit", e);
  }
  try {
    result.graph = select_structure(result.candidates, parts);
  } catch (const Error& e) {
    throw StageError("structure", e);
  }
  for (const auto& [part, type] : input.labels)
    if (result.graph.has_part(part)) result.graph.labels[part] = type;
  for (const auto& [tid, c] : assignment.cluster_of)
    if (c != kNoise) result.graph.track_parts[tid] = c;
  return result;
}

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json hypothesis_to_json(const FusedHypothesis& h) {
  Json j = {{"model", to_string(h.vision.type)},
            {"params", h.vision.degenerate ? Json(nullptr) : params_to_json(h.vision.params)},
            {"log_lik_vision", finite_or_null(h.vision.log_lik)},
            {"log_lik_language", h.lang_log_lik},
            {"k", h.vision.k},
            {"n", h.n},
            {"bic", finite_or_null(h.bic)}};
  if (h.vision.degenerate) j["degenerate"] = h.vision.note;
  return j;
}

Json InferResult::report() const {
  Json edges = Json::array();
  for (const auto& c : candidates) {
    Json hyps = Json::array();
    for (const auto& h : c.hypotheses) hyps.push_back(hypothesis_to_json(h));
    edges.push_back({{"i", c.i},
                     {"j", c.j},
                     {"hypotheses", std::move(hyps)},
                     {"selected", c.selected},
                     {"cost", finite_or_null(c.cost)},
                     {"n_utterances", c.n_utterances}});
  }
  Json j = {{"format_version", kFormatVersion},
            {"n_clusters", n_clusters},
            {"edges", std::move(edges)},
            {"graph", graph_to_json(graph)}};
  if (!unlabeled_parts.empty()) j["unlabeled_parts"] = unlabeled_parts;
  return j;
}

}  // namespace artic
