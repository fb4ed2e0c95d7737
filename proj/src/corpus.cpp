#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "intent/error.hpp"
#include "intent/synthetic.hpp"
#include "json.hpp"

namespace intent {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(double x, double y, double z) { return Eigen::Vector3d(x, y, z); }

// Motion-capture grade measurement noise on the recorded object channels.
constexpr std::array<double, kChannels> kCorpusNoiseStd = {0.002, 0.002, 0.002, 0.02, 0.02, 0.02};

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(c)};
  return std::mt19937_64(seq);
}

double jitter_factor(std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return 1.0 + half_width * u(rng);
}

Eigen::Vector3d parse_vec3(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) fail(ErrorKind::kConfig, std::string(key) + " must be a 3-vector");
  return vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

PlanSegment parse_segment(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  const double duration = j.at("duration").get<double>();
  if (type == "rest") return RestPhase{duration};
  if (type == "min_jerk") return MinJerkSegment{parse_vec3(j, "displacement"), duration};
  if (type == "const_vel") {
    return ConstVelPhase{parse_vec3(j, "velocity"), duration, j.value("blend_time", 0.0)};
  }
  fail(ErrorKind::kConfig, "unknown segment type '" + type + "'");
}

json segment_to_json(const PlanSegment& segment) {
  auto v = [](const Eigen::Vector3d& x) { return json::array({x.x(), x.y(), x.z()}); };
  if (const auto* r = std::get_if<RestPhase>(&segment)) return {{"type", "rest"}, {"duration", r->duration}};
  if (const auto* m = std::get_if<MinJerkSegment>(&segment)) {
    return {{"type", "min_jerk"}, {"displacement", v(m->displacement)}, {"duration", m->duration}};
  }
  const auto& c = std::get<ConstVelPhase>(segment);
  return {{"type", "const_vel"}, {"velocity", v(c.velocity)}, {"duration", c.duration}, {"blend_time", c.blend_time}};
}

std::vector<PlanSegment> parse_segments(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::kConfig, "segments must be a non-empty list");
  std::vector<PlanSegment> out;
  for (const json& s : j) out.push_back(parse_segment(s));
  return out;
}

std::vector<PlanSegment> jittered(const std::vector<PlanSegment>& segments, double time_factor,
                                  double size_factor, std::mt19937_64& rep_rng, double rep_width) {
  std::vector<PlanSegment> out;
  out.reserve(segments.size());
  for (const PlanSegment& segment : segments) {
    const double ft = time_factor * jitter_factor(rep_rng, rep_width);
    const double fs = size_factor * jitter_factor(rep_rng, rep_width);
    if (const auto* r = std::get_if<RestPhase>(&segment)) {
      out.push_back(RestPhase{r->duration * ft});
    } else if (const auto* m = std::get_if<MinJerkSegment>(&segment)) {
      out.push_back(MinJerkSegment{m->displacement * fs, m->duration * ft});
    } else {
      const auto& c = std::get<ConstVelPhase>(segment);
      out.push_back(ConstVelPhase{c.velocity * fs, c.duration * ft, c.blend_time * ft});
    }
  }
  return out;
}

}  // namespace

std::vector<TaskSpec> default_tasks() {
  std::vector<TaskSpec> tasks;
  auto rest = [](double d) -> PlanSegment { return RestPhase{d}; };
  auto mj = [](double x, double y, double z, double d) -> PlanSegment { return MinJerkSegment{vec3(x, y, z), d}; };
  auto cv = [](double x, double y, double z, double d, double b) -> PlanSegment {
    return ConstVelPhase{vec3(x, y, z), d, b};
  };
  tasks.push_back({"lateral_left", {rest(1.0), mj(0, 1.5, 0, 2.4), rest(1.0)}});
  tasks.push_back({"lateral_right", {rest(1.0), mj(0, -1.5, 0, 2.4), rest(1.0)}});
  tasks.push_back({"forward", {rest(1.0), mj(2.0, 0, 0, 3.0), rest(1.0)}});
  tasks.push_back({"backward", {rest(1.0), mj(-2.0, 0, 0, 3.0), rest(1.0)}});
  tasks.push_back({"diagonal", {rest(1.0), mj(1.2, 1.2, 0, 2.8), rest(1.0)}});
  tasks.push_back({"diagonal_back", {rest(1.0), mj(-1.2, 1.0, 0, 2.8), rest(1.0)}});
  tasks.push_back({"corridor_forward", {rest(0.8), cv(0.8, 0, 0, 2.0, 0.6), rest(0.8)}});
  tasks.push_back({"corridor_lateral", {rest(0.8), cv(0, -0.7, 0, 2.5, 0.5), rest(0.8)}});
  tasks.push_back({"stop_and_go",
                   {rest(0.8), mj(0.8, 0, 0, 1.6), rest(0.5), mj(0.8, 0, 0, 1.6), rest(0.5),
                    mj(0.6, 0, 0, 1.4), rest(0.8)}});
  tasks.push_back({"hallway_turn", {rest(0.8), cv(0.8, 0, 0, 1.2, 0.5), cv(0, 0.8, 0, 1.2, 0.8), rest(0.8)}});
  tasks.push_back({"lift_over",
                   {rest(0.8), mj(0, 0, 0.3, 1.2), mj(1.2, 0, 0, 2.2), mj(0, 0, -0.3, 1.2), rest(0.8)}});
  tasks.push_back({"out_and_back", {rest(0.8), mj(1.2, 0, 0, 2.0), rest(0.4), mj(-1.2, 0, 0, 2.0), rest(0.8)}});
  return tasks;
}

CorpusConfig default_corpus_config() {
  CorpusConfig config;
  config.tasks = default_tasks();
  config.noise = NoiseSpec{kCorpusNoiseStd, 0};
  return config;
}

CorpusConfig parse_corpus_config(const std::string& json_text) {
  CorpusConfig config = default_corpus_config();
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) fail(ErrorKind::kConfig, "corpus config must be a JSON object");
    config.dyads = j.value("dyads", config.dyads);
    config.repetitions = j.value("repetitions", config.repetitions);
    config.seed = j.value("seed", config.seed);
    config.rate_hz = j.value("rate_hz", config.rate_hz);
    if (j.contains("follower")) {
      const json& f = j["follower"];
      config.follower.mass = f.value("mass", config.follower.mass);
      config.follower.damping = f.value("damping", config.follower.damping);
      config.follower.stiffness = f.value("stiffness", config.follower.stiffness);
    }
    if (j.contains("jitter")) {
      const json& f = j["jitter"];
      config.jitter.duration = f.value("duration", config.jitter.duration);
      config.jitter.displacement = f.value("displacement", config.jitter.displacement);
      config.jitter.impedance = f.value("impedance", config.jitter.impedance);
      config.jitter.repetition = f.value("repetition", config.jitter.repetition);
    }
    if (j.contains("noise")) {
      const json& n = j["noise"];
      if (n.is_null() || n == "none") {
        config.noise.reset();
      } else if (n.contains("std")) {
        NoiseSpec spec;
        const auto v = n["std"].get<std::vector<double>>();
        if (v.size() != kChannels) fail(ErrorKind::kConfig, "noise std must have 6 entries");
        std::copy(v.begin(), v.end(), spec.std.begin());
        config.noise = spec;
      } else {
        const double sv = n.value("velocity_std", 0.0);
        const double sa = n.value("acceleration_std", 0.0);
        config.noise = NoiseSpec{{sv, sv, sv, sa, sa, sa}, 0};
      }
    }
    if (j.contains("tasks") && !(j["tasks"].is_string() && j["tasks"] == "default")) {
      config.tasks.clear();
      for (const json& t : j["tasks"]) {
        config.tasks.push_back({t.value("name", "task" + std::to_string(config.tasks.size())),
                                parse_segments(t.at("segments"))});
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("corpus config: ") + e.what());
  }
  if (config.dyads < 1 || config.repetitions < 1 || config.tasks.empty()) {
    fail(ErrorKind::kConfig, "corpus config needs at least one dyad, repetition and task");
  }
  return config;
}

CorpusConfig load_corpus_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open corpus config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus_config(buffer.str());
}

std::vector<PlanSegment> parse_plan_json(const std::string& json_text) {
  try {
    return parse_segments(json::parse(json_text));
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("plan: ") + e.what());
  }
}

std::string corpus_config_to_json(const CorpusConfig& config) {
  json j;
  j["dyads"] = config.dyads;
  j["repetitions"] = config.repetitions;
  j["seed"] = config.seed;
  j["rate_hz"] = config.rate_hz;
  j["follower"] = {{"mass", config.follower.mass},
                   {"damping", config.follower.damping},
                   {"stiffness", config.follower.stiffness}};
  j["jitter"] = {{"duration", config.jitter.duration},
                 {"displacement", config.jitter.displacement},
                 {"impedance", config.jitter.impedance},
                 {"repetition", config.jitter.repetition}};
  if (config.noise) {
    j["noise"] = {{"std", config.noise->std}};
  } else {
    j["noise"] = nullptr;
  }
  json tasks = json::array();
  for (const TaskSpec& t : config.tasks) {
    json segs = json::array();
    for (const PlanSegment& s : t.segments) segs.push_back(segment_to_json(s));
    tasks.push_back({{"name", t.name}, {"segments", segs}});
  }
  j["tasks"] = tasks;
  return j.dump(2);
}

FollowerImpedance dyad_follower(const CorpusConfig& config, std::int64_t dyad_id) {
  auto rng = derived_rng(config.seed, static_cast<std::uint64_t>(dyad_id), 1);
  FollowerImpedance f = config.follower;
  f.mass *= jitter_factor(rng, config.jitter.impedance);
  f.damping *= jitter_factor(rng, config.jitter.impedance);
  f.stiffness *= jitter_factor(rng, config.jitter.impedance);
  return f;
}

std::vector<Trial> make_corpus(const CorpusConfig& config) {
  if (config.dyads < 1) fail(ErrorKind::kConfig, "corpus needs at least one dyad");
  std::vector<Trial> corpus;
  corpus.reserve(static_cast<std::size_t>(config.dyads) * config.tasks.size() * config.repetitions);
  for (std::int64_t dyad = 1; dyad <= config.dyads; ++dyad) {
    const FollowerImpedance follower = dyad_follower(config, dyad);
    auto style = derived_rng(config.seed, static_cast<std::uint64_t>(dyad), 2);
    const double time_factor = jitter_factor(style, config.jitter.duration);
    const double size_factor = jitter_factor(style, config.jitter.displacement);

    for (std::size_t task = 0; task < config.tasks.size(); ++task) {
      for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::int64_t trial_id = static_cast<std::int64_t>(task) * config.repetitions + rep + 1;
        auto rep_rng = derived_rng(config.seed, static_cast<std::uint64_t>(dyad), 3,
                                   static_cast<std::uint64_t>(trial_id));
        const auto plan = jittered(config.tasks[task].segments, time_factor, size_factor, rep_rng,
                                   config.jitter.repetition);
        Trial trial = simulate_dyad(plan, follower, config.rate_hz);
        if (trial.samples.size() < kHistoryLength + 50) {
          fail(ErrorKind::kConfig, "trial '" + config.tasks[task].name + "' (dyad " + std::to_string(dyad) +
                                       ", trial " + std::to_string(trial_id) +
                                       ") is too short for one 150+50 step window");
        }
        trial.dyad_id = dyad;
        trial.trial_id = trial_id;
        if (config.noise) {
          NoiseSpec spec = *config.noise;
          spec.seed = config.seed;
          add_noise(trial.samples, spec, static_cast<std::uint64_t>(dyad) << 32 | static_cast<std::uint64_t>(trial_id));
        }
        corpus.push_back(std::move(trial));
      }
    }
  }
  return corpus;
}

}  // namespace intent
