#include "artic/config.hpp"

#include <array>
#include <variant>

#include "artic/error.hpp"

namespace artic {

namespace {

using Field = std::variant<double RunConfig::*, int RunConfig::*, bool RunConfig::*,
                           std::uint64_t RunConfig::*, std::string RunConfig::*>;

const std::vector<std::pair<const char*, Field>>& fields() {
  static const std::vector<std::pair<const char*, Field>> f = {
      {"sigma_pos", &RunConfig::sigma_pos},
      {"sigma_rot", &RunConfig::sigma_rot},
      {"sigma_d", &RunConfig::sigma_d},
      {"sigma_n", &RunConfig::sigma_n},
      {"epsilon", &RunConfig::epsilon},
      {"min_pts", &RunConfig::min_pts},
      {"ransac_iterations", &RunConfig::ransac_iterations},
      {"ransac_threshold", &RunConfig::ransac_threshold},
      {"refine", &RunConfig::refine},
      {"refine_iterations", &RunConfig::refine_iterations},
      {"k_rigid", &RunConfig::k_rigid},
      {"k_prismatic", &RunConfig::k_prismatic},
      {"k_rotational", &RunConfig::k_rotational},
      {"l2", &RunConfig::l2},
      {"epochs", &RunConfig::epochs},
      {"step", &RunConfig::step},
      {"scene", &RunConfig::scene},
      {"frames", &RunConfig::frames},
      {"sigma_track", &RunConfig::sigma_track},
      {"seed", &RunConfig::seed},
      {"threads", &RunConfig::threads},
      {"format", &RunConfig::format},
      {"tracks", &RunConfig::tracks},
      {"poses", &RunConfig::poses},
      {"labels", &RunConfig::labels},
      {"lang_model", &RunConfig::lang_model},
      {"utterances", &RunConfig::utterances},
      {"corpus", &RunConfig::corpus},
      {"out", &RunConfig::out},
      {"report", &RunConfig::report},
  };
  return f;
}

void require(bool ok, const std::string& field, const std::string& range) {
  if (!ok) throw ConfigError("'" + field + "' must be " + range);
}

}  // namespace

void RunConfig::validate() const {
  require(sigma_pos > 0, "sigma_pos", "> 0");
  require(sigma_rot > 0, "sigma_rot", "> 0");
  require(sigma_d > 0, "sigma_d", "> 0");
  require(sigma_n > 0, "sigma_n", "> 0");
  require(epsilon > 0 && epsilon < 1, "epsilon", "in (0, 1)");
  require(min_pts >= 1, "min_pts", ">= 1");
  require(ransac_iterations >= 1, "ransac_iterations", ">= 1");
  require(ransac_threshold > 0, "ransac_threshold", "> 0");
  require(refine_iterations >= 0, "refine_iterations", ">= 0");
  require(k_rigid >= 0, "k_rigid", ">= 0");
  require(k_prismatic >= 0, "k_prismatic", ">= 0");
  require(k_rotational >= 0, "k_rotational", ">= 0");
  require(l2 >= 0, "l2", ">= 0");
  require(epochs >= 1, "epochs", ">= 1");
  require(step > 0, "step", "> 0");
  require(frames >= 1, "frames", ">= 1");
  require(sigma_track >= 0, "sigma_track", ">= 0");
  require(threads >= 0, "threads", ">= 0");
  require(format == "json" || format == "dot", "format", "json or dot");
}

InferConfig RunConfig::infer_config() const {
  InferConfig c;
  c.segmentation.sigma_d = sigma_d;
  c.segmentation.sigma_n = sigma_n;
  c.segmentation.epsilon = epsilon;
  c.segmentation.min_pts = min_pts;
  c.posegraph.ransac.iterations = ransac_iterations;
  c.posegraph.ransac.inlier_threshold = ransac_threshold;
  c.posegraph.ransac.seed = seed;
  c.posegraph.max_iterations = refine_iterations;
  c.noise = {sigma_pos, sigma_rot};
  c.counts = {k_rigid, k_prismatic, k_rotational};
  c.refine = refine;
  return c;
}

TrainConfig RunConfig::train_config() const { return {l2, epochs, step}; }

void apply_config_json(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "format_version") {
      if (value != kFormatVersion) throw ConfigError("unsupported format_version");
      continue;
    }
    auto it = std::find_if(fields().begin(), fields().end(),
                           [&](const auto& f) { return key == f.first; });
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(cfg.*member)>;
          bool ok = false;
          if constexpr (std::is_same_v<T, bool>) ok = value.is_boolean();
          else if constexpr (std::is_same_v<T, std::string>) ok = value.is_string();
          else if constexpr (std::is_same_v<T, std::uint64_t>) ok = value.is_number_unsigned();
          else if constexpr (std::is_same_v<T, int>) ok = value.is_number_integer();
          else ok = value.is_number();
          if (!ok) throw ConfigError("config key '" + key + "' has the wrong type");
          cfg.*member = value.template get<T>();
        },
        it->second);
  }
}

Json run_config_to_json(const RunConfig& cfg) {
  Json j = {{"format_version", kFormatVersion}};
  for (const auto& [name, member] : fields())
    std::visit([&](auto m) { j[name] = cfg.*m; }, member);
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  Json j;
  try {
    j = parse_json_document(read_file(path));
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

}  // namespace artic
