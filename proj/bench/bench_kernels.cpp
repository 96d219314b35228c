#include <benchmark/benchmark.h>

#include "artic/segmentation.hpp"
#include "artic/structure.hpp"
#include "artic/synth.hpp"

namespace {

using namespace artic;

// Cabinet with denser anchors so the affinity matrix has a few hundred rows.
GeneratedScene dense_cabinet(int copies) {
  SceneSpec s = builtin_scene("cabinet");
  for (auto& p : s.parts) {
    const auto base = p.anchors;
    const auto normals = p.normals;
    for (int c = 1; c < copies; ++c) {
      for (const auto& a : base) p.anchors.push_back(a * (1.0 - 0.1 * c));
      p.normals.insert(p.normals.end(), normals.begin(), normals.end());
    }
  }
  s.sigma_track = 0.001;
  return generate(s);
}

// Chain of parts so there are many pairs to fit.
std::vector<PartTrajectory> many_parts(int n) {
  SceneSpec s = builtin_scene("drawer");
  const PartSpec drawer = s.parts[1];
  const EdgeSpec slide = s.edges[0];
  for (int k = 2; k < n; ++k) {
    PartSpec p = drawer;
    p.id = k;
    p.origin = Pose::translation(drawer.origin.trans() + Vec3(0.0, 0.0, 0.2 * k));
    s.parts.push_back(p);
    EdgeSpec e = slide;
    e.child = k;
    e.axis = Vec3(0.1 * k, 1.0, 0.0).normalized();
    s.edges.push_back(e);
  }
  return generate(s).poses;
}

void BM_AffinitySerial(benchmark::State& st) {
  const auto g = dense_cabinet(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(affinity_matrix_serial(g.tracks, 0.005, 0.1));
  st.counters["tracks"] = double(g.tracks.size());
}

void BM_AffinityParallel(benchmark::State& st) {
  const auto g = dense_cabinet(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(affinity_matrix(g.tracks, 0.005, 0.1));
  st.counters["tracks"] = double(g.tracks.size());
}

void BM_FitEdgesSerial(benchmark::State& st) {
  const auto parts = many_parts(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fit_edges_serial(parts, {}, {}, {}));
}

void BM_FitEdgesParallel(benchmark::State& st) {
  const auto parts = many_parts(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fit_edges(parts, {}, {}, {}));
}

}  // namespace

BENCHMARK(BM_AffinitySerial)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AffinityParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitEdgesSerial)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitEdgesParallel)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
