#include "selfcal/cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "selfcal/config.hpp"
#include "selfcal/engine.hpp"
#include "selfcal/errors.hpp"
#include "selfcal/io.hpp"
#include "selfcal/simulator.hpp"

namespace selfcal {

namespace {

// Optional per-flag overrides of the engine parameters.
struct Overrides {
  std::optional<double> eps_svd, sigma_max, kf_trans, kf_rot, lambda, min_update;
  std::optional<std::size_t> pq, meas;
  std::optional<int> same;
  std::optional<std::string> policy;

  void apply(EngineConfig& c) const {
    if (eps_svd) c.tsvd_threshold = *eps_svd;
    if (sigma_max) c.max_entropy = *sigma_max;
    if (pq) c.pq_size = *pq;
    if (meas) c.window_size = *meas;
    if (kf_trans) c.kf_translation = *kf_trans;
    if (kf_rot) c.kf_rotation = *kf_rot;
    if (lambda) c.decay_lambda = *lambda;
    if (same) c.same_count = *same;
    if (min_update) c.min_update = *min_update;
    if (policy) c.policy = swap_policy_from_string(*policy);
    c.validate();
  }
};

void add_overrides(CLI::App* app, Overrides& o) {
  const EngineConfig d;
  auto def = [](auto v) { return fmt::format(" (default {})", v); };
  app->add_option("--theta-eps-svd", o.eps_svd,
                  "Relative TSVD truncation threshold" + def(d.tsvd_threshold));
  app->add_option("--theta-sigma-max", o.sigma_max,
                  "Maximum admissible segment entropy" + def(d.max_entropy));
  app->add_option("--theta-pq", o.pq, "Segments in the priority queue" + def(d.pq_size));
  app->add_option("--theta-meas", o.meas, "Motion pairs per candidate window" + def(d.window_size));
  app->add_option("--theta-kf-trans", o.kf_trans,
                  "Keyframing translation [m]" + def(d.kf_translation));
  app->add_option("--theta-kf-rot", o.kf_rot, "Keyframing rotation [rad]" + def(d.kf_rotation));
  app->add_option("--theta-lambda", o.lambda, "Time decay rate [1/s]" + def(d.decay_lambda));
  app->add_option("--theta-same", o.same,
                  "Consecutive small updates for convergence" + def(d.same_count));
  app->add_option("--theta-min-update", o.min_update,
                  "Update norm counted as small" + def(d.min_update));
  app->add_option("--policy", o.policy, "Swap policy: local_minimum or naive (default local_minimum)");
}

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_config(path);
}

void print_pose(std::ostream& out, std::string_view prefix, const Pose& p) {
  const Vector3 t = p.translation();
  const Vector3 r = p.rotation_vector();
  const char* names[] = {"tx", "ty", "tz", "rx", "ry", "rz"};
  for (int i = 0; i < 3; ++i) fmt::print(out, "{}{}={:.17g}\n", prefix, names[i], t[i]);
  for (int i = 0; i < 3; ++i) fmt::print(out, "{}{}={:.17g}\n", prefix, names[i + 3], r[i]);
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const Overrides& overrides, std::ostream& out) {
  RunConfig rc = load_config(config_path);
  overrides.apply(rc.engine);
  const auto stream = generate(rc.scenario);
  write_stream(stream, std::filesystem::path(out_path));
  const NullSpaceResult oracle =
      null_space_oracle(stream, rc.scenario.theta_true, rc.engine.keyframer_config());
  fmt::print(out, "measurements={}\n", stream.size());
  fmt::print(out, "duration={:.17g}\n", rc.scenario.duration);
  fmt::print(out, "trajectory={}\n", to_string(rc.scenario.trajectory));
  fmt::print(out, "oracle_rank={}\n", oracle.rank);
  return kExitOk;
}

int cmd_calibrate(const std::string& input, const std::string& config_path,
                  const std::string& report_path, const Overrides& overrides, std::ostream& out) {
  RunConfig rc = config_or_default(config_path);
  overrides.apply(rc.engine);
  const auto stream = read_stream(std::filesystem::path(input),
                                  diagonal_covariance(rc.engine.sigma_t, rc.engine.sigma_r));
  const RunResult result = run(rc.engine, stream);
  write_report(result.report, std::filesystem::path(report_path));
  const CalibrationEstimate& est = result.state.estimate;
  print_pose(out, "", est.theta);
  fmt::print(out, "entropy={:.17g}\n", est.entropy);
  fmt::print(out, "rank={}\n", est.numerical_rank);
  fmt::print(out, "converged={}\n", result.state.converged ? "true" : "false");
  fmt::print(out, "solve_count={}\n", result.state.solve_count);
  fmt::print(out, "keyframes={}\n", result.state.keyframes);
  return kExitOk;
}

int cmd_compare(const std::string& input, const std::string& config_path,
                const std::string& out_path, const Overrides& overrides, std::ostream& out) {
  RunConfig rc = config_or_default(config_path);
  overrides.apply(rc.engine);
  const auto stream = read_stream(std::filesystem::path(input),
                                  diagonal_covariance(rc.engine.sigma_t, rc.engine.sigma_r));
  EngineConfig lm_cfg = rc.engine;
  lm_cfg.policy = SwapPolicy::kLocalMinimum;
  EngineConfig naive_cfg = rc.engine;
  naive_cfg.policy = SwapPolicy::kNaive;
  Engine lm(lm_cfg);
  Engine naive(naive_cfg);

  std::ofstream csv(out_path);
  if (!csv) throw Error(fmt::format("cannot write '{}'", out_path));
  csv << "t,local_minimum_entropy,naive_entropy,local_minimum_solve_count,naive_solve_count\n";
  auto emit = [&](double t) {
    fmt::print(csv, "{:.9g},{:.9g},{:.9g},{},{}\n", t, lm.state().estimate.entropy,
               naive.state().estimate.entropy, lm.state().solve_count,
               naive.state().solve_count);
  };
  auto changed = [](const std::vector<ReportRow>& rows) {
    for (const auto& r : rows) {
      if (r.kind == ReportKind::kEstimate) return true;
    }
    return false;
  };
  for (const auto& m : stream) {
    const bool a = changed(lm.step(m));
    const bool b = changed(naive.step(m));
    if (a || b) emit(m.t);
  }
  const bool a = changed(lm.finish());
  const bool b = changed(naive.finish());
  if (a || b) emit(lm.state().last_time);

  fmt::print(out, "local_minimum_solve_count={}\n", lm.state().solve_count);
  fmt::print(out, "naive_solve_count={}\n", naive.state().solve_count);
  fmt::print(out, "local_minimum_entropy={:.17g}\n", lm.state().estimate.entropy);
  fmt::print(out, "naive_entropy={:.17g}\n", naive.state().estimate.entropy);
  fmt::print(out, "local_minimum_pq_entropy={:.17g}\n", lm.state().pq.total_entropy());
  fmt::print(out, "naive_pq_entropy={:.17g}\n", naive.state().pq.total_entropy());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online SE(3) extrinsic self-calibration between two odometry streams", "selfcal"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path, input_path, out_path, report_path;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic two-sensor JSONL stream");
  sim->add_option("--config", config_path, "Scenario config (JSON)")->required();
  sim->add_option("--out", out_path, "Output JSONL stream")->required();
  add_overrides(sim, overrides);

  auto* cal = app.add_subcommand("calibrate", "Run the estimator over a JSONL stream");
  cal->add_option("--input", input_path, "Input JSONL stream")->required();
  cal->add_option("--config", config_path, "Config (JSON); engine defaults when omitted");
  cal->add_option("--report", report_path, "Output CSV report")->required();
  add_overrides(cal, overrides);

  auto* cmp = app.add_subcommand("compare-policies",
                                 "Run local-minimum and naive swap policies side by side");
  cmp->add_option("--input", input_path, "Input JSONL stream")->required();
  cmp->add_option("--config", config_path, "Config (JSON); engine defaults when omitted");
  cmp->add_option("--out", out_path, "Output CSV")->required();
  add_overrides(cmp, overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(config_path, out_path, overrides, out);
    if (*cal) return cmd_calibrate(input_path, config_path, report_path, overrides, out);
    return cmd_compare(input_path, config_path, out_path, overrides, out);
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }
}

}  // namespace selfcal
