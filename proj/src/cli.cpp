#include "artic/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include <omp.h>

#include <CLI11.hpp>

#include "artic/config.hpp"
#include "artic/error.hpp"
#include "artic/metrics.hpp"
#include "artic/synth.hpp"

namespace artic {

namespace {

namespace fs = std::filesystem;

// Flags that overlay the config file. Unset flags leave the lower layers
// untouched.
struct Overrides {
  std::optional<double> sigma_pos, sigma_rot, sigma_d, sigma_n, epsilon, ransac_threshold;
  std::optional<int> min_pts, ransac_iterations, refine_iterations, k_rigid, k_prismatic,
      k_rotational;
  std::optional<double> l2, step, sigma_track;
  std::optional<int> epochs, frames, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scene, format, tracks, poses, labels, lang_model, utterances,
      corpus, out, report;
  bool no_refine = false;

  void apply(RunConfig& c) const {
    auto set = [](const auto& o, auto& dst) {
      if (o) dst = *o;
    };
    set(sigma_pos, c.sigma_pos);
    set(sigma_rot, c.sigma_rot);
    set(sigma_d, c.sigma_d);
    set(sigma_n, c.sigma_n);
    set(epsilon, c.epsilon);
    set(ransac_threshold, c.ransac_threshold);
    set(min_pts, c.min_pts);
    set(ransac_iterations, c.ransac_iterations);
    set(refine_iterations, c.refine_iterations);
    set(k_rigid, c.k_rigid);
    set(k_prismatic, c.k_prismatic);
    set(k_rotational, c.k_rotational);
    set(l2, c.l2);
    set(step, c.step);
    set(sigma_track, c.sigma_track);
    set(epochs, c.epochs);
    set(frames, c.frames);
    set(threads, c.threads);
    set(seed, c.seed);
    set(scene, c.scene);
    set(format, c.format);
    set(tracks, c.tracks);
    set(poses, c.poses);
    set(labels, c.labels);
    set(lang_model, c.lang_model);
    set(utterances, c.utterances);
    set(corpus, c.corpus);
    set(out, c.out);
    set(report, c.report);
    if (no_refine) c.refine = false;
  }
};

struct EvalArgs {
  std::vector<std::string> estimates, truths, classes;
  std::string part_map;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty())
    out << text;
  else
    write_file(path, text);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) throw ConfigError("synth needs --out DIR");
  SceneSpec spec = builtin_scene(cfg.scene);
  spec.frames = cfg.frames;
  spec.sigma_track = cfg.sigma_track;
  spec.seed = cfg.seed;
  const GeneratedScene g = generate(spec);

  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "tracks.jsonl", g.tracks_text());
  write_file(dir / "poses.json", g.poses_text());
  write_file(dir / "truth.json", dump(graph_to_json(g.truth)));
  write_file(dir / "labels.json", dump(labels_to_json(g.labels)));
  out << dump({{"scene", spec.name},
               {"frames", spec.frames},
               {"tracks", g.tracks.size()},
               {"parts", g.truth.parts.size()},
               {"files", {"tracks.jsonl", "poses.json", "truth.json", "labels.json"}}});
  return kExitOk;
}

int cmd_segment(const RunConfig& cfg, std::ostream& out) {
  if (cfg.tracks.empty()) throw ConfigError("segment needs --tracks");
  const auto tracks = load_tracks(cfg.tracks);
  const auto a = cluster_tracks(tracks, cfg.infer_config().segmentation);
  Json assign = Json::object();
  for (const auto& [tid, c] : a.cluster_of) assign[std::to_string(tid)] = c;
  emit(dump({{"format_version", kFormatVersion},
             {"n_clusters", a.n_clusters},
             {"assignment", std::move(assign)}}),
       cfg.out, out);
  return kExitOk;
}

std::vector<PartTrajectory> part_trajectories(const RunConfig& cfg) {
  if (cfg.tracks.empty() == cfg.poses.empty())
    throw ConfigError("give exactly one of --tracks or --poses");
  if (!cfg.poses.empty()) return load_pose_trajectories(cfg.poses);
  const auto tracks = load_tracks(cfg.tracks);
  return estimate_parts(tracks, cfg.infer_config());
}

int cmd_fit(const RunConfig& cfg, const std::string& poses_out, std::ostream& out) {
  const auto parts = part_trajectories(cfg);
  if (!poses_out.empty()) save_pose_trajectories(parts, poses_out);
  std::vector<EdgeCandidate> cands;
  try {
    cands = fit_edges(parts, {}, {}, cfg.infer_config());
  } catch (const Error& e) {
    throw StageError("kinfit", e);
  }
  Json edges = Json::array();
  for (const auto& c : cands) {
    Json hyps = Json::array();
    for (const auto& h : c.hypotheses) hyps.push_back(hypothesis_to_json(h));
    edges.push_back({{"i", c.i}, {"j", c.j}, {"hypotheses", std::move(hyps)},
                     {"selected", c.selected}});
  }
  emit(dump({{"format_version", kFormatVersion},
             {"n_clusters", parts.size()},
             {"edges", std::move(edges)}}),
       cfg.out, out);
  return kExitOk;
}

int cmd_ground(const RunConfig& cfg, std::ostream& out) {
  if (cfg.corpus.empty()) throw ConfigError("ground needs --corpus");
  if (cfg.out.empty()) throw ConfigError("ground needs --out for the model file");
  const Corpus corpus = load_corpus(cfg.corpus);
  const GroundingModel model = train(corpus, cfg.train_config());
  save_grounding_model(model, cfg.out);
  const auto& trace = model.objective_trace();
  out << dump({{"sentences", corpus.sentences.size()},
               {"features", model.weights().size()},
               {"epochs", trace.size()},
               {"objective", trace.empty() ? Json(nullptr) : Json(trace.back())}});
  return kExitOk;
}

int cmd_infer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.tracks.empty() == cfg.poses.empty())
    throw ConfigError("give exactly one of --tracks or --poses");
  InferInput in;
  if (!cfg.tracks.empty()) in.tracks = load_tracks(cfg.tracks);
  if (!cfg.poses.empty()) in.poses = load_pose_trajectories(cfg.poses);
  if (!cfg.labels.empty()) in.labels = load_labels(cfg.labels);
  if (cfg.lang_model.empty() != cfg.utterances.empty())
    throw ConfigError("--lang-model and --utterances go together");
  if (!cfg.lang_model.empty()) {
    in.grounding = load_grounding_model(cfg.lang_model);
    in.utterances = load_utterances(cfg.utterances);
  }

  const InferResult r = infer(in, cfg.infer_config());
  if (in.grounding && !r.unlabeled_parts.empty()) {
    std::string ids;
    for (int p : r.unlabeled_parts) ids += (ids.empty() ? "" : ", ") + std::to_string(p);
    err << "warning: no label for part(s) " << ids << "; their edges get no language evidence\n";
  }
  const std::string graph_text =
      cfg.format == "dot" ? graph_to_dot(r.graph) : dump(graph_to_json(r.graph));
  emit(graph_text, cfg.out, out);
  if (!cfg.report.empty()) write_file(cfg.report, dump(r.report()));
  return kExitOk;
}

KinematicGraph load_estimate(const std::string& path) {
  const Json j = parse_json_document(read_file(path));
  return graph_from_json(j.is_object() && j.contains("graph") ? j["graph"] : j);
}

int cmd_eval(const RunConfig& cfg, const EvalArgs& a, std::ostream& out) {
  if (a.estimates.empty()) throw ConfigError("eval needs --estimate");
  if (a.estimates.size() != a.truths.size())
    throw ConfigError("eval needs one --truth per --estimate");
  if (!a.classes.empty() && a.classes.size() != a.estimates.size())
    throw ConfigError("eval needs one --class per --estimate when classes are given");
  std::optional<std::map<int, int>> part_map;
  if (!a.part_map.empty()) part_map = part_map_from_json(parse_json_document(read_file(a.part_map)));

  std::map<std::string, std::vector<DemoScore>> by_class;
  Json demos = Json::array();
  for (std::size_t k = 0; k < a.estimates.size(); ++k) {
    const KinematicGraph est = load_estimate(a.estimates[k]);
    const KinematicGraph truth = load_graph(a.truths[k]);
    const DemoScore s = score_demo(est, truth, part_map);
    const std::string cls = a.classes.empty() ? "demo" : a.classes[k];
    by_class[cls].push_back(s);
    Json d = demo_score_to_json(s);
    d["class"] = cls;
    d["estimate"] = a.estimates[k];
    demos.push_back(std::move(d));
  }
  const auto tables = aggregate_by_class(by_class);
  Json jt = Json::object();
  for (const auto& [cls, t] : tables) jt[cls] = score_table_to_json(t);
  out << format_tables(tables);
  if (!cfg.out.empty())
    write_file(cfg.out, dump({{"format_version", kFormatVersion},
                              {"demos", std::move(demos)},
                              {"tables", std::move(jt)}}));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Articulated object kinematic structure estimation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Overrides o;
  EvalArgs ev;
  std::string poses_out;

  app.add_option("--config", config_path, "JSON config file (flags take precedence)");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--threads", o.threads, "Worker threads, 0 = automatic");
  app.add_option("--out", o.out, "Output file (synth: output directory)");
  app.add_option("--format", o.format, "Graph output format: json or dot");
  app.add_option("--tracks", o.tracks, "Feature tracks (JSON Lines)");
  app.add_option("--poses", o.poses, "Part pose trajectories (JSON)");
  app.add_option("--labels", o.labels, "Cluster label map (JSON)");
  app.add_option("--lang-model", o.lang_model, "Trained grounding model (JSON)");
  app.add_option("--utterances", o.utterances, "Utterances describing the demonstration");
  app.add_option("--corpus", o.corpus, "Annotated training corpus (JSON)");
  app.add_option("--report", o.report, "Inference report output (JSON)");
  app.add_option("--sigma-pos", o.sigma_pos, "Position noise in meters");
  app.add_option("--sigma-rot", o.sigma_rot, "Rotation noise in radians");
  app.add_option("--sigma-d", o.sigma_d, "Segmentation displacement spread in meters");
  app.add_option("--sigma-n", o.sigma_n, "Segmentation normal-angle spread in radians");
  app.add_option("--epsilon", o.epsilon, "DBSCAN affinity threshold in (0, 1)");
  app.add_option("--min-pts", o.min_pts, "DBSCAN core-point neighbour count");
  app.add_option("--ransac-iterations", o.ransac_iterations, "RANSAC iterations");
  app.add_option("--ransac-threshold", o.ransac_threshold, "RANSAC inlier threshold in meters");
  app.add_option("--refine-iterations", o.refine_iterations, "Pose-graph refinement iterations");
  app.add_flag("--no-refine", o.no_refine, "Skip pose-graph refinement");
  app.add_option("--k-rigid", o.k_rigid, "Parameter count of the rigid model");
  app.add_option("--k-prismatic", o.k_prismatic, "Parameter count of the prismatic model");
  app.add_option("--k-rotational", o.k_rotational, "Parameter count of the rotational model");
  app.add_option("--l2", o.l2, "Grounding L2 strength");
  app.add_option("--epochs", o.epochs, "Grounding training epochs");
  app.add_option("--step", o.step, "Grounding initial step size");
  app.add_option("--scene", o.scene, "Builtin scene for synth");
  app.add_option("--frames", o.frames, "Frames to synthesise");
  app.add_option("--sigma-track", o.sigma_track, "Synthetic track noise in meters");

  app.add_subcommand("synth", "Generate a builtin synthetic scene");
  app.add_subcommand("segment", "Cluster feature tracks into parts");
  auto* fit = app.add_subcommand("fit", "Fit every model to every part pair");
  fit->add_option("--poses-out", poses_out, "Write the estimated part trajectories here");
  app.add_subcommand("ground", "Train a grounding model from a corpus");
  app.add_subcommand("infer", "Estimate the kinematic graph");
  auto* eval = app.add_subcommand("eval", "Score estimates against ground truth");
  eval->add_option("--estimate", ev.estimates, "Estimated graph or report files")->expected(1, -1);
  eval->add_option("--truth", ev.truths, "Ground-truth graph files")->expected(1, -1);
  eval->add_option("--class", ev.classes, "Object class of each demonstration")->expected(1, -1);
  eval->add_option("--part-map", ev.part_map, "Explicit estimate -> truth part map (JSON)");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path, cfg);
    o.apply(cfg);
    cfg.validate();
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "synth") return cmd_synth(cfg, out);
    if (cmd == "segment") return cmd_segment(cfg, out);
    if (cmd == "fit") return cmd_fit(cfg, poses_out, out);
    if (cmd == "ground") return cmd_ground(cfg, out);
    if (cmd == "infer") return cmd_infer(cfg, out, err);
    return cmd_eval(cfg, ev, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace artic
