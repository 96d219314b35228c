#pragma once

#include <string>
#include <vector>

#include "artic/grounding.hpp"

namespace testing {

/// One flat phrase over the whole sentence carrying `annotations`.
inline artic::AnnotatedSentence flat_sentence(
    const std::string& text, std::vector<std::pair<artic::Symbol, bool>> annotations = {}) {
  artic::AnnotatedSentence s;
  s.tokens = artic::tokenize(text);
  if (!annotations.empty()) {
    artic::Phrase p;
    p.end = s.tokens.size();
    p.annotations = std::move(annotations);
    s.phrases.push_back(std::move(p));
  }
  return s;
}

/// Positive for `truth`, negative for the other two linkages of the pair.
inline std::vector<std::pair<artic::Symbol, bool>> pair_labels(const std::string& a,
                                                               const std::string& b,
                                                               artic::ModelType truth) {
  std::vector<std::pair<artic::Symbol, bool>> out;
  for (auto m : artic::kModelTypes) out.emplace_back(artic::Symbol::affordance(a, b, m), m == truth);
  return out;
}

/// Twenty sentences: ten slide a drawer out of a cabinet, ten swing a door
/// on its frame.
inline artic::Corpus toy_corpus() {
  using artic::ModelType;
  artic::Corpus c;
  c.space.objects = {"cabinet", "door", "drawer", "frame"};
  const std::vector<std::string> drawer = {
      "slide the drawer out",          "pull the drawer open",
      "slide out the drawer",          "the drawer slides out of the cabinet",
      "pull out the drawer",           "slide the drawer back into the cabinet",
      "push the drawer in",            "the drawer slides along its rails",
      "pull the drawer straight out",  "slide the cabinet drawer open"};
  const std::vector<std::string> door = {
      "swing the door open",           "open the door on its hinge",
      "the door swings on the frame",  "rotate the door about its hinge",
      "swing the door shut",           "the door turns on its hinges",
      "turn the door toward the frame", "the door rotates open",
      "swing open the door",           "the door pivots on the hinge"};
  for (const auto& t : drawer)
    c.sentences.push_back(flat_sentence(t, pair_labels("drawer", "cabinet", ModelType::Prismatic)));
  for (const auto& t : door)
    c.sentences.push_back(flat_sentence(t, pair_labels("door", "frame", ModelType::Rotational)));
  return c;
}

}  // namespace testing

#include "artic/metrics.hpp"

namespace testing {

/// Per-row counts of the published comparison table. N* counts moving parts,
/// so a demo's truth graph has N* + 1 parts and N* linkages.
struct TableRow {
  std::string name;
  bool multi = false;
  int k = 0;       // demonstrations
  int n_star = 0;  // moving parts per demonstration
  int s_v = 0;
  int vision_s_h = 0, vision_s_s = 0;
  int ours_s_h = 0, ours_s_s = 0;
};

inline std::vector<TableRow> table_rows() {
  return {
      {"door", false, 9, 1, 9, 5, 5, 9, 9},
      {"chair", false, 5, 1, 4, 1, 2, 4, 5},
      {"refrigerator", false, 5, 1, 5, 5, 5, 5, 5},
      {"microwave", false, 4, 1, 3, 3, 4, 3, 4},
      {"drawer", false, 2, 1, 2, 0, 0, 2, 2},
      {"chair", true, 4, 2, 2, 1, 5, 2, 6},
      {"monitor", true, 7, 2, 0, 0, 6, 0, 7},
      {"bicycle", true, 7, 3, 2, 0, 13, 0, 13},
      {"drawer", true, 11, 2, 4, 3, 10, 4, 15},
      {"door", true, 2, 2, 2, 0, 2, 2, 4},
  };
}

/// Truth: a root with `n_star` prismatic children. Estimate: the first
/// `hits` linkages typed correctly, the rest rotational, plus one extra rigid
/// part when the part count should be wrong.
inline std::pair<artic::KinematicGraph, artic::KinematicGraph> demo_graphs(int n_star, bool sv,
                                                                           int hits) {
  using namespace artic;
  KinematicGraph truth, est;
  for (int p = 0; p <= n_star; ++p) {
    truth.parts.push_back(p);
    est.parts.push_back(p);
  }
  for (int c = 1; c <= n_star; ++c) {
    truth.edges.push_back({0, c, PrismaticParams{Pose(), Vec3::UnitX(), 0.0, 0.3}});
    if (c <= hits)
      est.edges.push_back({0, c, PrismaticParams{Pose(), Vec3::UnitX(), 0.0, 0.3}});
    else
      est.edges.push_back({0, c, RotationalParams{Vec3::Zero(), Vec3::UnitZ(), 0.5, Pose(), 0, 1}});
  }
  if (!sv) {
    est.parts.push_back(n_star + 1);
    est.edges.push_back({0, n_star + 1, RigidParams{Pose()}});
  }
  return {est, truth};
}

/// Demonstrations reproducing one method's row counts: hard hits are drawn
/// from the right-part-count demos with every linkage right; the remaining
/// soft hits go round-robin to the other demos without completing a
/// right-count one.
inline std::vector<std::pair<artic::KinematicGraph, artic::KinematicGraph>> row_demos(
    const TableRow& row, int s_h, int s_s) {
  std::vector<int> hits(std::size_t(row.k), 0), cap(std::size_t(row.k), 0);
  std::vector<bool> sv(std::size_t(row.k), false);
  int left = s_s;
  for (int d = 0; d < row.k; ++d) {
    sv[std::size_t(d)] = d < row.s_v;
    if (d < s_h) {
      hits[std::size_t(d)] = row.n_star;
      left -= row.n_star;
    } else {
      cap[std::size_t(d)] = sv[std::size_t(d)] ? row.n_star - 1 : row.n_star;
    }
  }
  for (bool moved = true; left > 0 && moved;) {
    moved = false;
    for (int d = row.k - 1; d >= 0 && left > 0; --d)
      if (hits[std::size_t(d)] < cap[std::size_t(d)]) {
        ++hits[std::size_t(d)];
        --left;
        moved = true;
      }
  }
  std::vector<std::pair<artic::KinematicGraph, artic::KinematicGraph>> out;
  for (int d = 0; d < row.k; ++d)
    out.push_back(demo_graphs(row.n_star, sv[std::size_t(d)], hits[std::size_t(d)]));
  return out;
}

}  // namespace testing
