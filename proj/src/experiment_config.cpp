#include "w2sd/experiment_config.hpp"

#include "w2sd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace w2sd {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::string summarize(const std::vector<ConfigDiagnostic>& diags) {
  std::string msg = "invalid config:";
  for (const auto& d : diags) msg += "\n  " + (d.path.empty() ? std::string("<root>") : d.path) + ": " + d.message;
  return msg;
}

class Checker {
 public:
  std::vector<ConfigDiagnostic> diags;

  void add(const std::string& path, const std::string& message) { diags.push_back({path, message}); }

  bool is_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    add(path, "expected an object");
    return false;
  }

  void allowed(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        add(join(path, key), "unknown field");
      }
    }
  }

  std::optional<double> number(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      add(join(path, key), "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      add(join(path, key), "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<long long> integer(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      add(join(path, key), "expected an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<std::string> string(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_string()) {
      add(join(path, key), "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<GaussianMixture> mixture(const json& obj, const char* key, const std::string& path, bool required) {
    if (!obj.contains(key)) {
      if (required) add(join(path, key), "required mixture is missing");
      return std::nullopt;
    }
    try {
      return GaussianMixture::from_json(obj.at(key));
    } catch (const std::exception& e) {
      add(join(path, key), e.what());
      return std::nullopt;
    }
  }
};

const std::vector<std::string> kKinds = {"standard",          "w2sd",          "s2wd",          "w2sd-error",
                                         "resample-vanilla",  "resample-advanced", "auto-guidance", "equal-compute",
                                         "cosine-profile",    "magnitude-sweep"};

const std::vector<std::string> kArms = {"standard",
                                        "weak-standard",
                                        "ideal-standard",
                                        "w2sd",
                                        "s2wd",
                                        "w2sd-error",
                                        "resample-vanilla",
                                        "resample-accept-positive",
                                        "resample-accept-negative",
                                        "auto-guidance"};

const std::vector<std::string> kRoles = {"strong", "weak", "ideal", "ground_truth"};

std::vector<std::string> default_arms(const std::string& kind) {
  if (kind == "standard") return {"standard"};
  if (kind == "w2sd") return {"standard", "w2sd"};
  if (kind == "s2wd") return {"standard", "s2wd"};
  if (kind == "w2sd-error") return {"standard", "w2sd-error"};
  if (kind == "resample-vanilla") return {"standard", "resample-vanilla"};
  if (kind == "resample-advanced") return {"standard", "resample-accept-positive", "resample-accept-negative"};
  if (kind == "auto-guidance") return {"standard", "auto-guidance"};
  if (kind == "cosine-profile") return {"w2sd"};
  return {};
}

std::vector<std::string> roles_for_kind(const std::string& kind) {
  if (kind == "standard" || kind == "resample-vanilla") return {"strong"};
  if (kind == "cosine-profile") return {"strong", "weak", "ideal"};
  return {"strong", "weak"};
}

std::vector<std::string> roles_for_arm(const std::string& arm) {
  if (arm == "standard" || arm == "resample-vanilla") return {"strong"};
  if (arm == "weak-standard") return {"weak"};
  if (arm == "ideal-standard") return {"ideal"};
  return {"strong", "weak"};
}

std::optional<ModelSpec> parse_model(Checker& c, const json& j, const std::string& path, const std::string& role) {
  if (!c.is_object(j, path)) return std::nullopt;
  const auto type = c.string(j, "type", path);
  if (!type) {
    if (!j.contains("type")) c.add(join(path, "type"), "required (mixture, guided or trained)");
    return std::nullopt;
  }
  ModelSpec spec;
  spec.label = c.string(j, "label", path).value_or(role);
  const std::size_t before = c.diags.size();
  if (*type == "mixture") {
    c.allowed(j, path, {"type", "label", "mixture"});
    spec.type = ModelType::kMixture;
    spec.mixture = c.mixture(j, "mixture", path, true);
  } else if (*type == "guided") {
    c.allowed(j, path, {"type", "label", "conditional", "unconditional", "scale"});
    spec.type = ModelType::kGuided;
    auto cond = c.mixture(j, "conditional", path, true);
    auto uncond = c.mixture(j, "unconditional", path, true);
    const auto scale = c.number(j, "scale", path);
    if (!j.contains("scale")) c.add(join(path, "scale"), "required guidance scale is missing");
    if (cond && uncond && cond->dim() != uncond->dim()) {
      c.add(join(path, "unconditional"), "dimension differs from the conditional mixture");
    }
    if (cond && uncond && scale) spec.guidance = GuidanceConfig{*cond, *uncond, *scale};
  } else if (*type == "trained") {
    c.allowed(j, path, {"type", "label", "data", "counts", "train", "seed"});
    spec.type = ModelType::kTrained;
    spec.mixture = c.mixture(j, "data", path, true);
    if (!j.contains("counts") || !j.at("counts").is_array()) {
      c.add(join(path, "counts"), "required array of per-component sample counts");
    } else {
      const auto& counts = j.at("counts");
      for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!counts[i].is_number_integer() || counts[i].get<long long>() < 1) {
          c.add(index_path(join(path, "counts"), i), "counts must be positive integers");
        } else {
          spec.counts.push_back(counts[i].get<std::size_t>());
        }
      }
      if (spec.mixture && counts.size() != spec.mixture->size()) {
        c.add(join(path, "counts"), "needs one count per data component (" + std::to_string(spec.mixture->size()) +
                                        "), got " + std::to_string(counts.size()));
      }
    }
    if (spec.mixture && spec.mixture->dim() > 2) c.add(join(path, "data"), "trained models support dimension <= 2");
    if (j.contains("train")) {
      try {
        spec.train = TrainConfig::from_json(j.at("train"));
      } catch (const std::exception& e) {
        c.add(join(path, "train"), e.what());
      }
    }
    if (const auto s = c.integer(j, "seed", path)) {
      if (*s < 0) c.add(join(path, "seed"), "must be >= 0");
      spec.train_seed = static_cast<std::uint64_t>(*s);
    }
  } else {
    c.add(join(path, "type"), "unknown model type '" + *type + "' (expected mixture, guided or trained)");
  }
  if (c.diags.size() != before) return std::nullopt;
  return spec;
}

int model_dim(const ModelSpec& m) {
  if (m.guidance) return m.guidance->conditional.dim();
  return m.mixture ? m.mixture->dim() : 0;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigDiagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

nlohmann::json ModelSpec::to_json() const {
  switch (type) {
    case ModelType::kMixture:
      return {{"type", "mixture"}, {"label", label}, {"mixture", mixture->to_json()}};
    case ModelType::kGuided:
      return {{"type", "guided"},
              {"label", label},
              {"conditional", guidance->conditional.to_json()},
              {"unconditional", guidance->unconditional.to_json()},
              {"scale", guidance->scale}};
    case ModelType::kTrained:
      return {{"type", "trained"},
              {"label", label},
              {"data", mixture->to_json()},
              {"counts", counts},
              {"train", train.to_json()},
              {"seed", train_seed}};
  }
  return nullptr;
}

const ModelSpec& ExperimentConfig::model(const std::string& role) const {
  const auto it = models.find(role);
  if (it == models.end()) throw std::out_of_range("config has no '" + role + "' model");
  return it->second;
}

const GaussianMixture& ExperimentConfig::ground_truth() const {
  if (has_model("ground_truth")) return *model("ground_truth").mixture;
  const auto& ideal = model("ideal");
  if (ideal.type != ModelType::kMixture) throw std::logic_error("ideal model is not mixture-backed");
  return *ideal.mixture;
}

nlohmann::json ExperimentConfig::to_json() const {
  json models_json = json::object();
  for (const auto& [role, spec] : models) models_json[role] = spec.to_json();
  json doc = {{"name", name},
              {"description", description},
              {"kind", kind},
              {"schedule", schedule.to_json()},
              {"lambda", lambda},
              {"placement", to_string(placement)},
              {"n_chains", n_chains},
              {"seeds", seeds},
              {"models", models_json},
              {"arms", arms},
              {"k_err", k_err},
              {"resample", {{"max_draws", max_draws}}},
              {"auto_guidance", {{"weight", guidance_weight}, {"mode", to_string(guidance_mode)}}},
              {"equal_compute", {{"t_std", t_std}}},
              {"cosine", {{"probes", cosine_probes}, {"grid", {{"lo", grid_lo}, {"hi", grid_hi}, {"per_axis", grid_per_axis}}}}},
              {"evaluation",
               {{"reference_samples", reference_samples},
                {"reference_seed", reference_seed},
                {"projections", projections},
                {"histogram", {{"bins", histogram_bins}, {"lo", histogram_lo}, {"hi", histogram_hi}}}}},
              {"export", {{"trajectories", export_chains}}}};
  if (mode_reference) doc["evaluation"]["mode_reference"] = mode_reference->to_json();
  if (sweep) doc["sweep"] = {{"axis", sweep->axis}, {"values", sweep->values}};
  return doc;
}

const std::vector<std::string>& experiment_kinds() { return kKinds; }
const std::vector<std::string>& arm_names() { return kArms; }

ExperimentConfig validate_config(const nlohmann::json& raw) {
  Checker c;
  ExperimentConfig cfg;
  if (!c.is_object(raw, "")) throw ConfigError(c.diags);
  c.allowed(raw, "",
            {"name", "description", "kind", "schedule", "lambda", "placement", "n_chains", "seeds", "models", "arms",
             "k_err", "resample", "auto_guidance", "sweep", "equal_compute", "cosine", "evaluation", "export"});

  cfg.name = c.string(raw, "name", "").value_or(cfg.name);
  cfg.description = c.string(raw, "description", "").value_or("");

  const auto kind = c.string(raw, "kind", "");
  if (!kind) {
    if (!raw.contains("kind")) c.add("kind", "required; one of the experiment kinds");
  } else if (std::find(kKinds.begin(), kKinds.end(), *kind) == kKinds.end()) {
    c.add("kind", "unknown experiment kind '" + *kind + "'");
  } else {
    cfg.kind = *kind;
  }

  double sigma = 25.0;
  int steps = 50;
  OdeDrift drift = OdeDrift::kProbabilityFlow;
  if (raw.contains("schedule") && c.is_object(raw.at("schedule"), "schedule")) {
    const auto& s = raw.at("schedule");
    c.allowed(s, "schedule", {"sigma", "steps", "drift"});
    if (const auto v = c.number(s, "sigma", "schedule")) {
      if (*v <= 1.0) c.add("schedule.sigma", "must be > 1");
      else sigma = *v;
    }
    if (const auto v = c.integer(s, "steps", "schedule")) {
      if (*v < 1 || *v > 100000) c.add("schedule.steps", "must be in [1, 100000]");
      else steps = static_cast<int>(*v);
    }
    if (const auto v = c.string(s, "drift", "schedule")) {
      try {
        drift = ode_drift_from_string(*v);
      } catch (const std::exception& e) {
        c.add("schedule.drift", e.what());
      }
    }
  }
  cfg.schedule = NoiseSchedule(sigma, steps, drift);

  cfg.lambda = steps - 1;
  if (const auto v = c.integer(raw, "lambda", "")) {
    if (*v < 0 || *v > steps) {
      c.add("lambda", "violates 0 <= lambda <= T (lambda = " + std::to_string(*v) + ", T = " + std::to_string(steps) +
                          ")");
    } else {
      cfg.lambda = static_cast<int>(*v);
    }
  }
  if (const auto v = c.string(raw, "placement", "")) {
    try {
      cfg.placement = placement_from_string(*v);
    } catch (const std::exception& e) {
      c.add("placement", e.what());
    }
  }
  if (const auto v = c.integer(raw, "n_chains", "")) {
    if (*v < 2) c.add("n_chains", "must be >= 2");
    else cfg.n_chains = static_cast<std::size_t>(*v);
  }
  if (raw.contains("seeds")) {
    const auto& s = raw.at("seeds");
    if (!s.is_array() || s.empty()) {
      c.add("seeds", "expected a non-empty array of non-negative integers");
    } else {
      cfg.seeds.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_integer() || s[i].get<long long>() < 0) {
          c.add(index_path("seeds", i), "expected a non-negative integer");
        } else {
          cfg.seeds.push_back(s[i].get<std::uint64_t>());
        }
      }
    }
  }

  // Models.
  if (raw.contains("models") && c.is_object(raw.at("models"), "models")) {
    const auto& m = raw.at("models");
    for (const auto& [role, spec] : m.items()) {
      if (std::find(kRoles.begin(), kRoles.end(), role) == kRoles.end()) {
        c.add(join("models", role), "unknown model role (expected strong, weak, ideal or ground_truth)");
        continue;
      }
      if (auto parsed = parse_model(c, spec, join("models", role), role)) cfg.models[role] = std::move(*parsed);
    }
    if (cfg.has_model("ground_truth") && cfg.model("ground_truth").type != ModelType::kMixture) {
      c.add("models.ground_truth.type", "the ground truth must be a mixture");
    }
    int dim = 0;
    for (const auto& [role, spec] : cfg.models) {
      const int d = model_dim(spec);
      if (dim == 0) dim = d;
      else if (d != dim) c.add(join("models", role), "dimension differs from the other models");
    }
  }

  // Arms.
  const bool fixed_arms = cfg.kind == "equal-compute" || cfg.kind == "magnitude-sweep";
  if (raw.contains("arms")) {
    const auto& a = raw.at("arms");
    if (fixed_arms) {
      c.add("arms", "not applicable to kind '" + cfg.kind + "'");
    } else if (!a.is_array() || a.empty()) {
      c.add("arms", "expected a non-empty array of arm names");
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_string() || std::find(kArms.begin(), kArms.end(), a[i].get<std::string>()) == kArms.end()) {
          c.add(index_path("arms", i), "unknown arm");
        } else if (!seen.insert(a[i].get<std::string>()).second) {
          c.add(index_path("arms", i), "duplicate arm");
        } else {
          cfg.arms.push_back(a[i].get<std::string>());
        }
      }
    }
  } else {
    cfg.arms = default_arms(cfg.kind);
  }

  // Required roles.
  std::set<std::string> required;
  if (!cfg.kind.empty()) {
    for (const auto& r : roles_for_kind(cfg.kind)) required.insert(r);
  }
  for (const auto& arm : cfg.arms) {
    for (const auto& r : roles_for_arm(arm)) required.insert(r);
  }
  for (const auto& r : required) {
    if (!cfg.has_model(r) && !(raw.contains("models") && raw.at("models").contains(r))) {
      c.add(join("models", r), "the '" + r + "' model is required by kind '" + cfg.kind + "'");
    }
  }
  const bool has_truth = cfg.has_model("ground_truth") ||
                         (cfg.has_model("ideal") && cfg.model("ideal").type == ModelType::kMixture);
  const bool truth_declared =
      raw.contains("models") && raw.at("models").is_object() &&
      (raw.at("models").contains("ground_truth") || raw.at("models").contains("ideal"));
  if (!has_truth && !truth_declared) {
    c.add("models.ground_truth", "required: no ground-truth mixture and no mixture-backed ideal model");
  }

  // Error injection.
  if (raw.contains("k_err")) {
    const auto& k = raw.at("k_err");
    if (!k.is_array()) {
      c.add("k_err", "expected an array of non-negative numbers");
    } else {
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (!k[i].is_number() || !std::isfinite(k[i].get<double>()) || k[i].get<double>() < 0.0) {
          c.add(index_path("k_err", i), "expected a finite non-negative number");
        } else {
          cfg.k_err.push_back(k[i].get<double>());
        }
      }
    }
  }
  if (std::find(cfg.arms.begin(), cfg.arms.end(), "w2sd-error") != cfg.arms.end() && cfg.k_err.empty() &&
      !raw.contains("k_err")) {
    c.add("k_err", "required by the w2sd-error arm");
  }

  if (raw.contains("resample") && c.is_object(raw.at("resample"), "resample")) {
    const auto& r = raw.at("resample");
    c.allowed(r, "resample", {"max_draws"});
    if (const auto v = c.integer(r, "max_draws", "resample")) {
      if (*v < 1) c.add("resample.max_draws", "must be >= 1");
      else cfg.max_draws = static_cast<int>(*v);
    }
  }

  if (raw.contains("auto_guidance") && c.is_object(raw.at("auto_guidance"), "auto_guidance")) {
    const auto& a = raw.at("auto_guidance");
    c.allowed(a, "auto_guidance", {"weight", "mode"});
    cfg.guidance_weight = c.number(a, "weight", "auto_guidance").value_or(cfg.guidance_weight);
    if (const auto v = c.string(a, "mode", "auto_guidance")) {
      try {
        cfg.guidance_mode = auto_guidance_mode_from_string(*v);
      } catch (const std::exception& e) {
        c.add("auto_guidance.mode", e.what());
      }
    }
  }

  if (raw.contains("sweep") && c.is_object(raw.at("sweep"), "sweep")) {
    const auto& s = raw.at("sweep");
    c.allowed(s, "sweep", {"axis", "values"});
    SweepSpec sweep;
    const auto axis = c.string(s, "axis", "sweep");
    if (!axis) {
      if (!s.contains("axis")) c.add("sweep.axis", "required (weak-guidance-scale or weak-mixture-weight)");
    } else if (*axis != "weak-guidance-scale" && *axis != "weak-mixture-weight") {
      c.add("sweep.axis", "unknown sweep axis '" + *axis + "'");
    } else {
      sweep.axis = *axis;
    }
    if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty()) {
      c.add("sweep.values", "required non-empty array of numbers");
    } else {
      const auto& v = s.at("values");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
          c.add(index_path("sweep.values", i), "must be a finite number");
          continue;
        }
        const double x = v[i].get<double>();
        if (!sweep.values.empty() && !(x > sweep.values.back())) {
          c.add(index_path("sweep.values", i), "sweep values must be strictly increasing");
        }
        if (sweep.axis == "weak-mixture-weight" && (x < 0.0 || x > 1.0)) {
          c.add(index_path("sweep.values", i), "a mixture weight must lie in [0, 1]");
        }
        sweep.values.push_back(x);
      }
    }
    cfg.sweep = sweep;
    if (cfg.has_model("weak")) {
      const auto& weak = cfg.model("weak");
      if (sweep.axis == "weak-guidance-scale" && weak.type != ModelType::kGuided) {
        c.add("models.weak.type", "the weak-guidance-scale sweep needs a guided weak model");
      }
      if (sweep.axis == "weak-mixture-weight" && (weak.type != ModelType::kMixture || weak.mixture->size() != 2)) {
        c.add("models.weak", "the weak-mixture-weight sweep needs a two-component mixture weak model");
      }
    }
  } else if (cfg.kind == "magnitude-sweep" && !raw.contains("sweep")) {
    c.add("sweep", "required by kind 'magnitude-sweep'");
  }

  if (raw.contains("equal_compute") && c.is_object(raw.at("equal_compute"), "equal_compute")) {
    const auto& e = raw.at("equal_compute");
    c.allowed(e, "equal_compute", {"t_std"});
    if (const auto v = c.integer(e, "t_std", "equal_compute")) {
      if (*v < 4) c.add("equal_compute.t_std", "must be >= 4");
      else cfg.t_std = static_cast<int>(*v);
    }
  }

  if (raw.contains("cosine") && c.is_object(raw.at("cosine"), "cosine")) {
    const auto& co = raw.at("cosine");
    c.allowed(co, "cosine", {"probes", "grid"});
    if (const auto v = c.string(co, "probes", "cosine")) {
      if (*v != "chain-states" && *v != "grid") c.add("cosine.probes", "expected chain-states or grid");
      else cfg.cosine_probes = *v;
    }
    if (co.contains("grid") && c.is_object(co.at("grid"), "cosine.grid")) {
      const auto& g = co.at("grid");
      c.allowed(g, "cosine.grid", {"lo", "hi", "per_axis"});
      cfg.grid_lo = c.number(g, "lo", "cosine.grid").value_or(cfg.grid_lo);
      cfg.grid_hi = c.number(g, "hi", "cosine.grid").value_or(cfg.grid_hi);
      if (const auto v = c.integer(g, "per_axis", "cosine.grid")) {
        if (*v < 2) c.add("cosine.grid.per_axis", "must be >= 2");
        else cfg.grid_per_axis = static_cast<int>(*v);
      }
      if (!(cfg.grid_hi > cfg.grid_lo)) c.add("cosine.grid", "needs hi > lo");
    }
  }

  if (raw.contains("evaluation") && c.is_object(raw.at("evaluation"), "evaluation")) {
    const auto& e = raw.at("evaluation");
    c.allowed(e, "evaluation", {"reference_samples", "reference_seed", "projections", "mode_reference", "histogram"});
    if (const auto v = c.integer(e, "reference_samples", "evaluation")) {
      if (*v < 2) c.add("evaluation.reference_samples", "must be >= 2");
      else cfg.reference_samples = static_cast<std::size_t>(*v);
    }
    if (const auto v = c.integer(e, "reference_seed", "evaluation")) {
      if (*v < 0) c.add("evaluation.reference_seed", "must be >= 0");
      else cfg.reference_seed = static_cast<std::uint64_t>(*v);
    }
    if (const auto v = c.integer(e, "projections", "evaluation")) {
      if (*v < 8) c.add("evaluation.projections", "must be >= 8");
      else cfg.projections = static_cast<int>(*v);
    }
    cfg.mode_reference = c.mixture(e, "mode_reference", "evaluation", false);
    if (e.contains("histogram") && c.is_object(e.at("histogram"), "evaluation.histogram")) {
      const auto& h = e.at("histogram");
      c.allowed(h, "evaluation.histogram", {"bins", "lo", "hi"});
      if (const auto v = c.integer(h, "bins", "evaluation.histogram")) {
        if (*v < 1) c.add("evaluation.histogram.bins", "must be >= 1");
        else cfg.histogram_bins = static_cast<int>(*v);
      }
      cfg.histogram_lo = c.number(h, "lo", "evaluation.histogram").value_or(cfg.histogram_lo);
      cfg.histogram_hi = c.number(h, "hi", "evaluation.histogram").value_or(cfg.histogram_hi);
      if (!(cfg.histogram_hi > cfg.histogram_lo)) c.add("evaluation.histogram", "needs hi > lo");
    }
  }

  if (raw.contains("export") && c.is_object(raw.at("export"), "export")) {
    const auto& e = raw.at("export");
    c.allowed(e, "export", {"trajectories"});
    if (const auto v = c.integer(e, "trajectories", "export")) {
      if (*v < 0) c.add("export.trajectories", "must be >= 0");
      else cfg.export_chains = static_cast<std::size_t>(*v);
    }
  }

  if (!c.diags.empty()) throw ConfigError(c.diags);
  cfg.export_chains = std::min(cfg.export_chains, cfg.n_chains);
  cfg.hash = config_hash(cfg.to_json());
  return cfg;
}

ExperimentConfig validate_config_text(const std::string& text) {
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({{"", std::string("JSON syntax error: ") + e.what()}});
  }
  return validate_config(raw);
}

nlohmann::json apply_overrides(nlohmann::json raw, std::optional<std::uint64_t> seed,
                               std::optional<std::size_t> chains) {
  if (!raw.is_object()) return raw;
  if (seed) {
    std::size_t count = 1;
    if (raw.contains("seeds") && raw.at("seeds").is_array() && !raw.at("seeds").empty()) count = raw.at("seeds").size();
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t i = 0; i < count; ++i) seeds.push_back(*seed + i);
    raw["seeds"] = seeds;
  }
  if (chains) raw["n_chains"] = *chains;
  return raw;
}

}  // namespace w2sd
