#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artic/graph.hpp"
#include "artic/trackio.hpp"

namespace artic {

struct DemoScore {
  int n_star = 0;  // parts in the ground truth
  int n_v = 0;     // parts in the estimate
  bool sv_hit = false;
  bool hard_hit = false;
  int soft_hits = 0;
  int soft_total = 0;
  std::vector<double> param_errors;  // degrees, type-correct matched joints

  std::optional<double> mean_param_error() const;
};

/// Angle between two axes in degrees, folded to [0, 90]. Throws ZeroVector.
double param_error(const Vec3& a, const Vec3& b);

/// Injective estimate -> truth part correspondence. With track assignments
/// on both graphs, parts are paired by maximum shared-track overlap; with
/// neither, parts are paired by equal id. Throws UnmatchablePartition when
/// only one side carries track assignments or no id is shared.
std::map<int, int> match_parts(const KinematicGraph& estimate, const GroundTruthGraph& truth);

/// Scores an estimate against ground truth. `part_map` (estimate -> truth)
/// overrides the automatic correspondence and must be injective.
DemoScore score_demo(const KinematicGraph& estimate, const GroundTruthGraph& truth,
                     const std::optional<std::map<int, int>>& part_map = std::nullopt);

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 0;
  double value() const { return den == 0 ? 0.0 : double(num) / double(den); }
  double percent() const { return 100.0 * value(); }
  bool operator==(const Fraction&) const = default;
};

struct ScoreTable {
  int n_demos = 0;
  Fraction s_v;  // demos with the right part count
  Fraction s_h;  // demos with the exact graph
  Fraction s_s;  // matched type-correct edges over truth edges
  /// Per-demo mean axis error averaged over demos that have one.
  std::optional<double> mean_param_error;
};

/// Throws InvalidCount for an empty list.
ScoreTable aggregate(const std::vector<DemoScore>& scores);
/// Per object class plus an "all" row over every demo.
std::map<std::string, ScoreTable> aggregate_by_class(
    const std::map<std::string, std::vector<DemoScore>>& scores);

Json demo_score_to_json(const DemoScore& s);
Json score_table_to_json(const ScoreTable& t);
/// Aligned text rendering of per-class tables.
std::string format_tables(const std::map<std::string, ScoreTable>& tables);

/// {"part_map": {"<estimate id>": <truth id>}}
std::map<int, int> part_map_from_json(const Json& j);

}  // namespace artic
