#include "w2sd/experiment_runner.hpp"

#include "w2sd/baselines.hpp"
#include "w2sd/reflection.hpp"
#include "w2sd/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace w2sd {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_value(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::string error_arm_name(double k_err) { return "w2sd-error-k" + format_value(k_err); }

ArmSpec make_arm(const std::string& arm, double k_err, const ExperimentConfig& cfg, ModelBuilder& builder) {
  const NoiseSchedule& schedule = cfg.schedule;
  const int T = schedule.steps();
  const int lambda = cfg.lambda;
  const auto placement = cfg.placement;
  ArmSpec spec;
  spec.name = arm;
  spec.method = arm;
  spec.steps = T;

  auto single = [&](const std::string& role) {
    const ModelPtr m = builder.build(role);
    spec.labels = {m->label()};
    spec.provenance = {{role, m->provenance()}};
    spec.expected_evaluations = static_cast<std::uint64_t>(T);
    spec.method = "standard";
    spec.runner = [m, schedule, placement](std::uint64_t seed, bool diagnostics) {
      return run_standard(*m, SamplerConfig{schedule, 0, seed, placement, diagnostics});
    };
  };
  if (arm == "standard") {
    single("strong");
    return spec;
  }
  if (arm == "weak-standard") {
    single("weak");
    return spec;
  }
  if (arm == "ideal-standard") {
    single("ideal");
    return spec;
  }

  const ModelPtr strong = builder.build("strong");
  spec.lambda = lambda;
  if (arm == "resample-vanilla") {
    spec.labels = {strong->label()};
    spec.provenance = {{"strong", strong->provenance()}};
    spec.expected_evaluations = static_cast<std::uint64_t>(T + lambda);
    const int max_draws = cfg.max_draws;
    spec.runner = [strong, schedule, lambda, max_draws, placement](std::uint64_t seed, bool) {
      return run_resample_vanilla(
          *strong, ResampleConfig{schedule, lambda, seed, NoiseSelection::kNone, max_draws, placement});
    };
    return spec;
  }

  const ModelPtr weak = builder.build("weak");
  spec.labels = {strong->label(), weak->label()};
  spec.provenance = {{"strong", strong->provenance()}, {"weak", weak->provenance()}};
  spec.expected_evaluations = static_cast<std::uint64_t>(T + 2 * lambda);
  if (arm == "w2sd") {
    spec.runner = [strong, weak, schedule, lambda, placement](std::uint64_t seed, bool diagnostics) {
      return run_w2sd(*strong, *weak, SamplerConfig{schedule, lambda, seed, placement, diagnostics});
    };
  } else if (arm == "s2wd") {
    spec.runner = [strong, weak, schedule, lambda, placement](std::uint64_t seed, bool diagnostics) {
      return run_s2wd(*strong, *weak, SamplerConfig{schedule, lambda, seed, placement, diagnostics});
    };
  } else if (arm == "w2sd-error") {
    spec.name = error_arm_name(k_err);
    spec.extras["k_err"] = k_err;
    spec.runner = [strong, weak, schedule, lambda, placement, k_err](std::uint64_t seed, bool diagnostics) {
      return run_w2sd_with_error(*strong, *weak, SamplerConfig{schedule, lambda, seed, placement, diagnostics},
                                 k_err);
    };
  } else if (arm == "resample-accept-positive" || arm == "resample-accept-negative") {
    const auto selection =
        arm == "resample-accept-positive" ? NoiseSelection::kAcceptPositive : NoiseSelection::kAcceptNegative;
    const int max_draws = cfg.max_draws;
    spec.method = "resample-advanced";
    spec.runner = [strong, weak, schedule, lambda, selection, max_draws, placement](std::uint64_t seed, bool) {
      return run_resample_advanced(*strong, *weak,
                                   ResampleConfig{schedule, lambda, seed, selection, max_draws, placement});
    };
  } else if (arm == "auto-guidance") {
    spec.lambda = 0;
    spec.expected_evaluations = static_cast<std::uint64_t>(2 * T);
    const double w = cfg.guidance_weight;
    const auto mode = cfg.guidance_mode;
    spec.runner = [strong, weak, schedule, w, mode](std::uint64_t seed, bool) {
      return run_auto_guidance(AutoGuidanceConfig{strong, weak, w, schedule, seed, mode});
    };
  } else {
    throw std::invalid_argument("unknown arm '" + arm + "'");
  }
  return spec;
}

}  // namespace

ModelPtr ModelBuilder::build_spec(const ModelSpec& spec, const NoiseSchedule& schedule) {
  switch (spec.type) {
    case ModelType::kMixture:
      return make_analytic_model(*spec.mixture, schedule, spec.label);
    case ModelType::kGuided:
      return make_guided_model(*spec.guidance, schedule, spec.label);
    case ModelType::kTrained:
      return train_score_model(*spec.mixture, spec.counts, spec.train, schedule, spec.train_seed, spec.label);
  }
  throw std::logic_error("unhandled model type");
}

ModelPtr ModelBuilder::build(const std::string& role, const NoiseSchedule& schedule) {
  const ModelSpec& spec = config_.model(role);
  if (spec.type != ModelType::kTrained) return build_spec(spec, schedule);
  auto it = trained_.find(role);
  if (it == trained_.end()) {
    it = trained_.emplace(role, train_score_model(*spec.mixture, spec.counts, spec.train, config_.schedule,
                                                  spec.train_seed, spec.label))
             .first;
  }
  const auto& fitted = it->second;
  if (fitted->schedule() == schedule) return fitted;
  return std::make_shared<const TrainedScoreModel>(fitted->network(), fitted->data_variance(), schedule,
                                                   fitted->label(), fitted->provenance());
}

nlohmann::json SweepResult::to_json() const {
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({{"value", p.value},
                   {"difference", p.difference},
                   {"w2sd_distance", p.distance},
                   {"gain", p.gain},
                   {"per_seed_gain", p.per_seed_gain},
                   {"within_noise_band", p.within_noise_band}});
  }
  return {{"axis", axis},
          {"strong_value", strong_value},
          {"baseline_distance", baseline_distance},
          {"baseline_per_seed", baseline_per_seed},
          {"noise_band", noise_band},
          {"points", pts}};
}

const ExperimentReport& ExperimentResult::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.report.arm == name) return a.report;
  }
  throw std::out_of_range("no arm named '" + name + "'");
}

namespace {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::optional<fs::path> dir) : dir_(std::move(dir)) {
    if (dir_) fs::create_directories(*dir_);
  }

  bool enabled() const { return dir_.has_value(); }

  void write(const std::string& relative, const std::string& content) const {
    if (!dir_) return;
    const fs::path path = *dir_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("failed to write " + path.string());
  }

  void remove(const std::string& relative) const {
    if (dir_) fs::remove(*dir_ / relative);
  }

 private:
  std::optional<fs::path> dir_;
};

Evaluation make_evaluation(const ExperimentConfig& cfg, const RunOptions& opt) {
  const GaussianMixture& truth = cfg.ground_truth();
  const GaussianMixture reference = cfg.mode_reference ? *cfg.mode_reference : truth;
  return Evaluation{reference,     reference.weights(), sample_mixture(truth, cfg.reference_samples, cfg.reference_seed),
                    cfg.n_chains,  opt.threads,         cfg.hash,
                    cfg.projections, cfg.export_chains, false};
}

void write_arm_artifacts(const ArtifactWriter& writer, const ArmRun& run, const ExperimentConfig& cfg) {
  if (!writer.enabled()) return;
  const std::string& name = run.report.arm;
  const std::size_t n = std::min(run.trajectories.size(), cfg.export_chains);
  const std::vector<Trajectory> exported(run.trajectories.begin(), run.trajectories.begin() + n);
  const NoiseSchedule schedule(cfg.schedule.sigma(), run.report.steps, cfg.schedule.drift());
  if (!exported.empty()) {
    std::ostringstream traj;
    write_trajectories_csv(traj, exported, schedule, cfg.hash);
    writer.write("trajectories/" + name + ".csv", traj.str());
    const bool reflected = std::any_of(exported.begin(), exported.end(),
                                       [](const Trajectory& t) { return !t.reflections.empty(); });
    if (reflected) {
      std::ostringstream diag;
      write_diagnostics_csv(diag, exported, schedule, cfg.hash);
      writer.write("diagnostics/" + name + ".csv", diag.str());
    }
  }
  const int dim = run.terminals.empty() ? 0 : static_cast<int>(run.terminals.front().size());
  for (int axis = 0; axis < dim; ++axis) {
    std::vector<double> values;
    values.reserve(run.terminals.size());
    for (const auto& x : run.terminals) values.push_back(x[axis]);
    std::ostringstream hist;
    write_histogram_csv(hist, values, cfg.histogram_bins, cfg.histogram_lo, cfg.histogram_hi, cfg.hash);
    writer.write("histograms/" + name + (dim == 1 ? "" : "_x" + std::to_string(axis)) + ".csv", hist.str());
  }
}

std::string profile_csv(const DifferenceProfile& profile, const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n# probe_policy=" << profile.probe_policy << "\n" << std::setprecision(17);
  out << "k,mean_cosine,used,skipped\n";
  for (const auto& e : profile.entries) {
    out << e.k << ',';
    if (e.defined()) out << e.mean_cosine;
    out << ',' << e.used << ',' << e.skipped << "\n";
  }
  return out.str();
}

SweepResult sweep_impl(const ExperimentConfig& cfg, ModelBuilder& builder, const Evaluation& ev,
                       std::vector<ArmRun>* runs) {
  if (!cfg.sweep) throw std::invalid_argument("magnitude sweep needs a sweep section");
  const SweepSpec& sweep = *cfg.sweep;
  SweepResult result;
  result.axis = sweep.axis;

  ArmRun baseline = evaluate_arm(make_arm("standard", 0.0, cfg, builder), cfg.seeds, ev);
  result.baseline_distance = baseline.report.distance;
  for (const auto& s : baseline.report.seeds) result.baseline_per_seed.push_back(s.distance);
  result.noise_band = 2.0 * baseline.report.distance_std;

  const ModelSpec& strong_spec = cfg.model("strong");
  if (sweep.axis == "weak-guidance-scale" && strong_spec.type == ModelType::kGuided) {
    result.strong_value = strong_spec.guidance->scale;
  } else if (sweep.axis == "weak-mixture-weight" && strong_spec.type == ModelType::kMixture) {
    result.strong_value = strong_spec.mixture->component(0).weight;
  }

  const ModelPtr strong = builder.build("strong");
  const NoiseSchedule schedule = cfg.schedule;
  const int lambda = cfg.lambda;
  const auto placement = cfg.placement;
  for (double value : sweep.values) {
    ModelSpec weak_spec = cfg.model("weak");
    if (sweep.axis == "weak-guidance-scale") {
      weak_spec.guidance->scale = value;
    } else {
      auto comps = weak_spec.mixture->components();
      comps[0].weight = value;
      comps[1].weight = 1.0 - value;
      weak_spec.mixture = GaussianMixture(comps);
    }
    weak_spec.label = cfg.model("weak").label + "@" + format_value(value);
    const ModelPtr weak = builder.build_spec(weak_spec, schedule);

    ArmSpec arm;
    arm.name = "w2sd-sweep-" + format_value(value);
    arm.method = "w2sd";
    arm.labels = {strong->label(), weak->label()};
    arm.provenance = {{"strong", strong->provenance()}, {"weak", weak->provenance()}};
    arm.steps = schedule.steps();
    arm.lambda = lambda;
    arm.expected_evaluations = static_cast<std::uint64_t>(schedule.steps() + 2 * lambda);
    arm.extras = {{"sweep_axis", sweep.axis}, {"sweep_value", value}};
    arm.runner = [strong, weak, schedule, lambda, placement](std::uint64_t seed, bool diagnostics) {
      return run_w2sd(*strong, *weak, SamplerConfig{schedule, lambda, seed, placement, diagnostics});
    };
    ArmRun run = evaluate_arm(arm, cfg.seeds, ev);

    SweepPoint p;
    p.value = value;
    p.difference = result.strong_value - value;
    p.distance = run.report.distance;
    p.gain = result.baseline_distance - run.report.distance;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      p.per_seed_gain.push_back(result.baseline_per_seed[s] - run.report.seeds[s].distance);
    }
    p.within_noise_band = std::abs(p.gain) <= result.noise_band;
    run.report.extras["gain"] = p.gain;
    result.points.push_back(p);
    if (runs) runs->push_back(std::move(run));
  }
  if (runs) runs->insert(runs->begin(), std::move(baseline));
  return result;
}

void add_gains(std::vector<ArmRun>& arms) {
  const auto base = std::find_if(arms.begin(), arms.end(), [](const ArmRun& a) { return a.report.arm == "standard"; });
  if (base == arms.end()) return;
  const ExperimentReport ref = base->report;
  for (auto& a : arms) {
    if (&a == &*base) continue;
    std::vector<double> delta;
    for (std::size_t i = 0; i < a.report.mode_fractions.size(); ++i) {
      delta.push_back(a.report.mode_fractions[i] - ref.mode_fractions[i]);
    }
    a.report.extras["gain_vs_standard"] = {{"mode_balance", ref.mode_balance_error - a.report.mode_balance_error},
                                           {"distance", ref.distance - a.report.distance},
                                           {"mode_fraction_delta", delta}};
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const ArtifactWriter writer(opt.out_dir);
  writer.remove("FAILED");
  ExperimentResult result;
  result.config_hash = cfg.hash;
  try {
    ModelBuilder builder(cfg);
    Evaluation ev = make_evaluation(cfg, opt);
    json report = {{"config_hash", cfg.hash},
                   {"name", cfg.name},
                   {"kind", cfg.kind},
                   {"config", cfg.to_json()},
                   {"conventions",
                    {{"gain", "baseline distance minus method distance; positive is an improvement"},
                     {"mode_balance_error", "sum over components of |fraction - target weight|"},
                     {"mode_assignment", "maximum posterior responsibility at noise level 0"}}}};

    if (cfg.kind == "magnitude-sweep") {
      result.sweep = sweep_impl(cfg, builder, ev, &result.arms);
      report["sweep"] = result.sweep->to_json();
    } else if (cfg.kind == "equal-compute") {
      ModelFactory strong = [&builder](const NoiseSchedule& s) { return builder.build("strong", s); };
      ModelFactory weak = [&builder](const NoiseSchedule& s) { return builder.build("weak", s); };
      auto ec = equal_compute_compare(strong, weak, cfg.schedule, cfg.t_std, cfg.seeds, ev);
      report["equal_compute"] = {
          {"t_std", ec.t_std},
          {"t_w2s", ec.t_w2s},
          {"lambda", ec.lambda},
          {"evaluations", {{"standard", ec.t_std}, {"w2sd", ec.t_w2s + 2 * ec.lambda}}},
          {"distance_gain", ec.standard.report.distance - ec.w2sd.report.distance},
          {"mode_balance_gain", ec.standard.report.mode_balance_error - ec.w2sd.report.mode_balance_error}};
      result.arms.push_back(ec.standard);
      result.arms.push_back(ec.w2sd);
      result.equal_compute = std::move(ec);
    } else {
      const bool chain_profile = cfg.kind == "cosine-profile" && cfg.cosine_probes == "chain-states";
      for (const auto& arm : cfg.arms) {
        std::vector<double> k_values{0.0};
        if (arm == "w2sd-error") k_values = cfg.k_err;
        for (double k : k_values) {
          Evaluation arm_ev = ev;
          arm_ev.keep_all = chain_profile && arm == "w2sd";
          result.arms.push_back(evaluate_arm(make_arm(arm, k, cfg, builder), cfg.seeds, arm_ev));
        }
      }
      if (cfg.kind == "cosine-profile") {
        const ModelPtr strong = builder.build("strong");
        const ModelPtr weak = builder.build("weak");
        const ModelPtr ideal = builder.build("ideal");
        DifferenceProfile profile;
        if (chain_profile) {
          const auto it = std::find_if(result.arms.begin(), result.arms.end(),
                                       [](const ArmRun& a) { return a.report.arm == "w2sd"; });
          if (it == result.arms.end()) throw std::invalid_argument("chain-state cosine profile needs the w2sd arm");
          profile = cosine_profile(*strong, *weak, *ideal, it->trajectories);
          it->report.cosine_summary = profile.summary();
        } else {
          profile = cosine_profile(*strong, *weak, *ideal,
                                   grid_probes(cfg.schedule, strong->dim(), cfg.grid_lo, cfg.grid_hi,
                                               cfg.grid_per_axis));
        }
        report["cosine_profile"] = profile.to_json();
        writer.write("cosine_profile.csv", profile_csv(profile, cfg.hash));
        result.profile = std::move(profile);
      }
      add_gains(result.arms);
    }

    json arms = json::array();
    json timing_arms = json::object();
    bool acceptance_written = false;
    for (auto& run : result.arms) {
      arms.push_back(run.report.to_json());
      timing_arms[run.report.arm] = run.report.wall_clock_seconds;
      write_arm_artifacts(writer, run, cfg);
      if (run.report.method == "resample-advanced") {
        std::ostringstream log;
        const std::size_t n = std::min(run.trajectories.size(), cfg.export_chains);
        write_acceptance_csv(log, {run.trajectories.begin(), run.trajectories.begin() + n}, cfg.hash);
        writer.write(acceptance_written ? "acceptance_log_" + run.report.arm + ".csv" : "acceptance_log.csv",
                     log.str());
        if (!acceptance_written) writer.write("acceptance_log_" + run.report.arm + ".csv", log.str());
        acceptance_written = true;
      }
    }
    report["arms"] = arms;
    result.report = report;
    result.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    writer.write("report.json", report.dump(2) + "\n");
    const json timing = {{"config_hash", cfg.hash},
                         {"threads", opt.threads},
                         {"total_seconds", result.wall_clock_seconds},
                         {"arms", timing_arms}};
    writer.write("timing.json", timing.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (writer.enabled()) {
      try {
        writer.write("FAILED", std::string("config_hash=") + cfg.hash + "\n" + e.what() + "\n");
      } catch (...) {
      }
    }
    throw;
  }
  return result;
}

SweepResult magnitude_sweep(const ExperimentConfig& config, const RunOptions& options) {
  ModelBuilder builder(config);
  return sweep_impl(config, builder, make_evaluation(config, options), nullptr);
}

bool report_hash_consistent(const nlohmann::json& report) {
  if (!report.is_object() || !report.contains("config") || !report.contains("config_hash")) return false;
  if (!report.at("config_hash").is_string()) return false;
  return config_hash(report.at("config")) == report.at("config_hash").get<std::string>();
}

std::filesystem::path default_preset_dir() {
  if (const char* env = std::getenv("W2SD_PRESETS")) return env;
  return W2SD_PRESET_DIR;
}

std::vector<PresetInfo> list_presets(const std::filesystem::path& dir) {
  std::vector<PresetInfo> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    PresetInfo info;
    info.path = entry.path();
    info.name = entry.path().stem().string();
    std::ifstream in(entry.path());
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_object()) {
      info.kind = doc.value("kind", "");
      info.description = doc.value("description", "");
    }
    out.push_back(info);
  }
  std::sort(out.begin(), out.end(), [](const PresetInfo& a, const PresetInfo& b) { return a.name < b.name; });
  return out;
}

nlohmann::json load_config_document(const std::string& name_or_path, const std::filesystem::path& preset_dir) {
  fs::path path = name_or_path;
  if (!fs::is_regular_file(path)) path = preset_dir / (name_or_path + ".json");
  if (!fs::is_regular_file(path)) {
    throw ConfigError({{"", "no config file or preset named '" + name_or_path + "'"}});
  }
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError({{"", path.string() + ": JSON syntax error: " + e.what()}});
  }
}

}  // namespace w2sd
