#include "selfcal/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "selfcal/errors.hpp"

namespace selfcal {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <typename T>
T get(const json& obj, const char* key, std::string_view where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}.{}: {}", where, key, e.what()));
  }
}

template <typename T>
void read_if(const json& obj, const char* key, std::string_view where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

Pose pose_from_json(const json& j, std::string_view where) {
  check_keys(j, {"q", "p"}, where);
  const auto q = get<std::vector<double>>(j, "q", where);
  const auto p = get<std::vector<double>>(j, "p", where);
  if (q.size() != 4 || p.size() != 3) {
    throw ConfigError(fmt::format("{} needs q[4] (w,x,y,z) and p[3]", where));
  }
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  if (!(quat.norm() > 1e-12)) throw ConfigError(fmt::format("{}.q has zero norm", where));
  return Pose(quat, Vector3(p[0], p[1], p[2]));
}

EngineConfig engine_from_json(const json& j) {
  constexpr std::string_view where = "engine";
  check_keys(j,
             {"tsvd_threshold", "max_entropy", "pq_size", "window_size", "kf_translation",
              "kf_rotation", "decay_lambda", "same_count", "min_update", "initial_guess",
              "reference_sensor", "second_sensor", "sigma_t", "sigma_r", "policy",
              "decay_enabled", "adjoint_transport", "max_iterations", "step_tolerance"},
             where);
  EngineConfig c;
  read_if(j, "tsvd_threshold", where, c.tsvd_threshold);
  read_if(j, "max_entropy", where, c.max_entropy);
  read_if(j, "pq_size", where, c.pq_size);
  read_if(j, "window_size", where, c.window_size);
  read_if(j, "kf_translation", where, c.kf_translation);
  read_if(j, "kf_rotation", where, c.kf_rotation);
  read_if(j, "decay_lambda", where, c.decay_lambda);
  read_if(j, "same_count", where, c.same_count);
  read_if(j, "min_update", where, c.min_update);
  read_if(j, "reference_sensor", where, c.reference_sensor);
  read_if(j, "second_sensor", where, c.second_sensor);
  read_if(j, "sigma_t", where, c.sigma_t);
  read_if(j, "sigma_r", where, c.sigma_r);
  read_if(j, "decay_enabled", where, c.decay_enabled);
  read_if(j, "adjoint_transport", where, c.adjoint_transport);
  read_if(j, "max_iterations", where, c.max_iterations);
  read_if(j, "step_tolerance", where, c.step_tolerance);
  if (j.contains("initial_guess")) c.initial_guess = pose_from_json(j["initial_guess"], "engine.initial_guess");
  if (j.contains("policy")) c.policy = swap_policy_from_string(get<std::string>(j, "policy", where));
  return c;
}

}  // namespace

std::string_view to_string(SwapPolicy policy) {
  return policy == SwapPolicy::kNaive ? "naive" : "local_minimum";
}

SwapPolicy swap_policy_from_string(std::string_view s) {
  if (s == "local_minimum") return SwapPolicy::kLocalMinimum;
  if (s == "naive") return SwapPolicy::kNaive;
  throw ConfigError(fmt::format("unknown swap policy '{}'", s));
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  constexpr std::string_view where = "config";
  check_keys(j,
             {"trajectory", "duration", "rate", "theta_true", "drift_events", "noise", "seed",
              "reference_sensor", "second_sensor", "engine"},
             where);

  RunConfig rc;
  ScenarioSpec& s = rc.scenario;
  if (j.contains("trajectory")) s.trajectory = trajectory_from_string(get<std::string>(j, "trajectory", where));
  read_if(j, "duration", where, s.duration);
  read_if(j, "rate", where, s.rate);
  read_if(j, "seed", where, s.seed);
  read_if(j, "reference_sensor", where, s.reference_sensor);
  read_if(j, "second_sensor", where, s.second_sensor);
  if (j.contains("theta_true")) s.theta_true = pose_from_json(j["theta_true"], "theta_true");
  if (j.contains("noise")) {
    check_keys(j["noise"], {"sigma_t", "sigma_r"}, "noise");
    read_if(j["noise"], "sigma_t", "noise", s.noise.sigma_t);
    read_if(j["noise"], "sigma_r", "noise", s.noise.sigma_r);
  }
  if (j.contains("drift_events")) {
    if (!j["drift_events"].is_array()) throw ConfigError("drift_events must be an array");
    for (const json& e : j["drift_events"]) {
      check_keys(e, {"t", "theta"}, "drift_events[]");
      s.drift_events.push_back({get<double>(e, "t", "drift_events[]"),
                                pose_from_json(e.at("theta"), "drift_events[].theta")});
    }
  }
  s.validate();

  if (j.contains("engine")) rc.engine = engine_from_json(j["engine"]);
  // Sensor names follow the scenario unless the engine overrides them.
  if (!j.contains("engine") || !j["engine"].contains("reference_sensor")) {
    rc.engine.reference_sensor = s.reference_sensor;
  }
  if (!j.contains("engine") || !j["engine"].contains("second_sensor")) {
    rc.engine.second_sensor = s.second_sensor;
  }
  rc.engine.validate();
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace selfcal
